import json
import time

import pytest

from heckelab.cli import RunConfig, main
from heckelab.errors import IncompatiblePair, InvalidConfig


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


SMALL_IDENTITY = {
    "field": {"kind": "equal", "p": 2},
    "field2": {"kind": "equal", "p": 2},
    "closeness": 5,
    "group": {"family": "SL", "n": 2},
    "level": 1,
    "window": 1,
    "seed": 11,
}

GL2_Q2 = {
    "field": {"kind": "mixed", "p": 2, "e": 1},
    "group": {"family": "GL", "n": 2},
    "level": 1,
    "window": 1,
    "seed": 11,
}


def test_cartan_command(tmp_path, capsys):
    cfg = write_config(tmp_path, GL2_Q2)
    assert main(["--config", cfg, "cartan", "[[2,0],[0,1]]"]) == 0
    out = capsys.readouterr().out
    assert "tau = (1,0)" in out
    assert "True" in out


def test_cartan_command_nontrivial_witness(tmp_path, capsys):
    cfg = write_config(tmp_path, GL2_Q2)
    assert main(["--config", cfg, "cartan", "[[0,1],[2,0]]"]) == 0
    out = capsys.readouterr().out
    assert "tau = (1,0)" in out


def test_cartan_command_identity(tmp_path, capsys):
    cfg = write_config(tmp_path, GL2_Q2)
    assert main(["--config", cfg, "cartan", "[[1,0],[0,1]]"]) == 0
    assert "tau = (0,0)" in capsys.readouterr().out


def test_dcosets_command(tmp_path, capsys):
    cfg = write_config(tmp_path, dict(GL2_Q2, level=0))
    assert main(["--config", cfg, "dcosets", "[[2,0],[0,1]]"]) == 0
    assert "degree deg(t_g) = 3" in capsys.readouterr().out


def test_convolve_unit(tmp_path, capsys):
    cfg = write_config(tmp_path, GL2_Q2)
    assert main([
        "--config", cfg, "convolve",
        '{"terms":[{"tau":[0,0]}]}', '{"terms":[{"tau":[1,0]}]}',
    ]) == 0
    out = capsys.readouterr().out
    assert "tau=(1,0)" in out
    assert "degree check" in out


def test_convolve_spherical_oracle(tmp_path, capsys):
    cfg = write_config(tmp_path, dict(GL2_Q2, level=0, window=2))
    assert main([
        "--config", cfg, "convolve",
        '{"terms":[{"tau":[1,0]}]}', '{"terms":[{"tau":[1,0]}]}',
    ]) == 0
    out = capsys.readouterr().out
    assert "tau=(2,0)" in out and "tau=(1,1)" in out
    assert "coeff 3" in out
    assert "sum c_x deg(x) = 9, deg(g)*deg(h) = 9" in out


def test_orbits_command(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL_IDENTITY)
    assert main(["--config", cfg, "orbits", "1,-1"]) == 0
    assert "|X_tau| = 9, |Gamma_tau| = 4" in capsys.readouterr().out


def test_transport_command(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "field": {"kind": "mixed", "p": 2, "e": 4},
        "field2": {"kind": "equal", "p": 2},
        "closeness": 4,
        "group": {"family": "GL", "n": 2},
        "level": 1,
        "window": 1,
    })
    assert main(["--config", cfg, "transport", '[["pi","0"],["0","1"]]']) == 0
    out = capsys.readouterr().out
    assert "g' = [t, 0; 0, 1]" in out


def test_verify_identity_pair_exit_zero(tmp_path):
    cfg = write_config(tmp_path, SMALL_IDENTITY)
    out = tmp_path / "report.json"
    assert main(["--config", cfg, "--out", str(out), "verify", "--suite", "all"]) == 0
    report = json.loads(out.read_text())
    assert report["success"] is True
    assert report["suites"]["kazhdan"]["pairs_equal"] == \
        report["suites"]["kazhdan"]["pairs_checked"]


def test_verify_reports_are_deterministic(tmp_path):
    cfg = write_config(tmp_path, SMALL_IDENTITY)
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(["--config", cfg, "--out", str(out1), "verify", "--suite", "field"]) == 0
    assert main(["--config", cfg, "--out", str(out2), "verify", "--suite", "field"]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_verify_csv_emission(tmp_path):
    cfg = write_config(tmp_path, SMALL_IDENTITY)
    out = tmp_path / "r.json"
    csv = tmp_path / "sc.csv"
    assert main([
        "--config", cfg, "--out", str(out), "--csv", str(csv),
        "verify", "--suite", "kazhdan",
    ]) == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "g,h,x,c,x_transported,c_transported"
    assert len(lines) > 1


def test_undersized_closeness_diagnostic(tmp_path, capsys):
    cfg = write_config(tmp_path, dict(SMALL_IDENTITY, closeness=2))
    code = main(["--config", cfg, "verify", "--suite", "kazhdan"])
    assert code == 2
    assert "InsufficientCloseness" in capsys.readouterr().err


def test_config_rejection_is_fast_and_precise():
    t0 = time.time()
    with pytest.raises(InvalidConfig, match="SL needs n >= 2"):
        RunConfig.from_dict({
            "field": {"kind": "mixed", "p": 2},
            "group": {"family": "SL", "n": 1},
        })
    with pytest.raises(InvalidConfig, match="field.kind"):
        RunConfig.from_dict({"field": {"kind": "padic", "p": 2}})
    with pytest.raises(IncompatiblePair):
        RunConfig.from_dict({
            "field": {"kind": "mixed", "p": 2, "e": 1},
            "field2": {"kind": "equal", "p": 2},
            "closeness": 3,
        })
    assert time.time() - t0 < 0.1


def test_bad_matrix_diagnostic(tmp_path, capsys):
    cfg = write_config(tmp_path, GL2_Q2)
    assert main(["--config", cfg, "cartan", "not json"]) == 2
    assert "ParseError" in capsys.readouterr().err


def test_singular_matrix_diagnostic(tmp_path, capsys):
    cfg = write_config(tmp_path, GL2_Q2)
    assert main(["--config", cfg, "cartan", "[[1,1],[1,1]]"]) == 2
    assert "Singular" in capsys.readouterr().err
