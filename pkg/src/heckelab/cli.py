"""Command-line front end.

Commands: cartan, dcosets, convolve, orbits, transport, verify.  A single
JSON config file fixes the field pair, group, level, window, coefficient
ring, budget and seed; flags override individual entries.  Reports are
deterministic for a fixed config and seed (sorted output, no clocks).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass

from . import kazhdan
from .errors import HeckelabError, InvalidConfig, ParseError
from .hecke import HeckeAlgebra, HeckeElement
from .localfield import EQUAL, MIXED, ClosePair, FieldModel
from .matgrp import DEFAULT_BUDGET, CartanDatum, GroupSpec, cartan, dominant_window
from .rings import ZZ, PrimeField, parse_ring
from .sampling import random_in_k, random_windowed

_KINDS = {
    "mixed": MIXED,
    "mixedchar": MIXED,
    "equal": EQUAL,
    "equalchar": EQUAL,
}


@dataclass
class RunConfig:
    """Validated run configuration; invalid inputs fail before any work."""

    field: FieldModel
    field2: FieldModel | None
    closeness: int | None
    family: str
    n: int
    level: int
    window: int
    ring: object
    budget: int
    seed: int

    @staticmethod
    def _model(raw: dict, where: str) -> FieldModel:
        try:
            kind = _KINDS[str(raw.get("kind", "")).lower()]
        except KeyError:
            raise InvalidConfig(f"{where}.kind must be one of {sorted(set(_KINDS))}")
        try:
            if kind == MIXED:
                return FieldModel.mixed(int(raw["p"]), int(raw.get("e", 1)))
            return FieldModel.equal(int(raw["p"]), int(raw.get("f", 1)))
        except (KeyError, ValueError) as exc:
            raise InvalidConfig(f"bad {where}: {exc}")

    @staticmethod
    def from_dict(raw: dict) -> "RunConfig":
        if "field" not in raw:
            raise InvalidConfig("config needs a 'field' entry")
        field = RunConfig._model(raw["field"], "field")
        field2 = RunConfig._model(raw["field2"], "field2") if "field2" in raw else None
        group = raw.get("group", {})
        family = str(group.get("family", "GL")).upper()
        if family not in ("GL", "SL"):
            raise InvalidConfig("group.family must be GL or SL")
        try:
            n = int(group.get("n", 2))
            level = int(raw.get("level", 1))
            window = int(raw.get("window", 1))
            budget = int(raw.get("budget", DEFAULT_BUDGET))
            seed = int(raw.get("seed", 1))
            closeness = int(raw["closeness"]) if "closeness" in raw else None
        except ValueError as exc:
            raise InvalidConfig(f"non-integer config entry: {exc}")
        if family == "SL" and n < 2:
            raise InvalidConfig("SL needs n >= 2")
        if n < 1:
            raise InvalidConfig("n must be >= 1")
        if level < 0:
            raise InvalidConfig("level must be >= 0")
        if window < 0:
            raise InvalidConfig("window must be >= 0")
        if budget < 1:
            raise InvalidConfig("budget must be positive")
        ring = parse_ring(str(raw.get("ring", "Z")))
        cfg = RunConfig(
            field=field, field2=field2, closeness=closeness,
            family=family, n=n, level=level, window=window,
            ring=ring, budget=budget, seed=seed,
        )
        if field2 is not None:
            cfg.close_pair()  # raises IncompatiblePair with a precise reason
        return cfg

    def spec(self) -> GroupSpec:
        return GroupSpec(self.family, self.n, self.field)

    def spec2(self) -> GroupSpec:
        if self.field2 is None:
            raise InvalidConfig("this command needs a 'field2' entry")
        return GroupSpec(self.family, self.n, self.field2)

    def close_pair(self) -> ClosePair:
        if self.field2 is None:
            raise InvalidConfig("this command needs a 'field2' entry")
        if self.closeness is None:
            raise InvalidConfig("this command needs a 'closeness' level")
        return ClosePair(self.field, self.field2, self.closeness)

    def transport_context(self) -> kazhdan.TransportContext:
        return kazhdan.TransportContext(
            self.close_pair(), self.spec(), self.spec2(),
            m=self.level, N=self.closeness, window=self.window, budget=self.budget,
        )

    def describe(self) -> dict:
        out = {
            "field": str(self.field),
            "group": f"{self.family}{self.n}",
            "level": self.level,
            "window": self.window,
            "ring": self.ring.name,
            "budget": self.budget,
            "seed": self.seed,
        }
        if self.field2 is not None:
            out["field2"] = str(self.field2)
            out["closeness"] = self.closeness
        return out


def load_config(args) -> RunConfig:
    raw = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
    for key in ("seed", "budget"):
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    return RunConfig.from_dict(raw)


def _parse_matrix(cfg: RunConfig, text: str):
    try:
        rows = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"matrix is not valid JSON: {exc}")
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise ParseError("matrix must be a JSON list of rows")
    return cfg.spec().parse_matrix(rows)


def _parse_tau(cfg: RunConfig, text: str) -> CartanDatum:
    parts = json.loads(text) if text.strip().startswith("[") else text.split(",")
    return CartanDatum(tuple(int(x) for x in parts))


def _parse_hecke(cfg: RunConfig, algebra: HeckeAlgebra, text: str) -> HeckeElement:
    raw = json.loads(text)
    ring = cfg.ring
    terms = {}
    for item in raw.get("terms", []):
        coeff = ring.from_int(int(item.get("coeff", 1)))
        if "tau" in item:
            label = algebra.label_of_tau(CartanDatum(tuple(item["tau"])))
        elif "k" in item:
            label = algebra.classify(cfg.spec().parse_matrix(item["k"]))
        else:
            raise ParseError("each term needs 'tau' or 'k'")
        terms[label] = ring.add(terms.get(label, ring.zero), coeff)
    return HeckeElement(ring, terms)


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"report written to {args.out}")
    else:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------


def cmd_cartan(args) -> int:
    cfg = load_config(args)
    g = _parse_matrix(cfg, args.matrix)
    fac = cartan(g)
    ok = fac.product() == g and fac.a.in_k() and fac.b.in_k()
    print(f"tau = {fac.tau}")
    print(f"a = {fac.a}")
    print(f"b = {fac.b}")
    print(f"exact reconstruction a*n_tau*b == g: {ok}")
    _emit_maybe(args, {
        "tau": list(fac.tau.coords),
        "a": fac.a.serialize(),
        "b": fac.b.serialize(),
        "reconstructs": ok,
    })
    return 0 if ok else 1


def cmd_dcosets(args) -> int:
    cfg = load_config(args)
    algebra = HeckeAlgebra(cfg.spec(), cfg.level, cfg.budget)
    g = _parse_matrix(cfg, args.matrix)
    cosets = algebra.left_cosets(g)
    print(f"degree deg(t_g) = {len(cosets)} at level m = {cfg.level}")
    for rep in cosets:
        print(f"  {rep}")
    _emit_maybe(args, {"degree": len(cosets), "cosets": [r.serialize() for r in cosets]})
    return 0


def cmd_orbits(args) -> int:
    cfg = load_config(args)
    algebra = HeckeAlgebra(cfg.spec(), cfg.level, cfg.budget)
    tau = _parse_tau(cfg, args.tau)
    table = algebra.orbit_table(tau)
    q2 = len(algebra.residue_classes) ** 2
    print(f"tau = {tau}: |X_tau| = {table.orbit_count}, |Gamma_tau| = {table.gamma_size}, "
          f"|K/K_m|^2 = {q2}")
    for label in table.labels:
        print(f"  {label}")
    _emit_maybe(args, {
        "tau": list(tau.coords),
        "orbit_count": table.orbit_count,
        "gamma_size": table.gamma_size,
        "labels": [l.serialize() for l in table.labels],
    })
    return 0


def cmd_convolve(args) -> int:
    cfg = load_config(args)
    algebra = HeckeAlgebra(cfg.spec(), cfg.level, cfg.budget)
    f1 = _parse_hecke(cfg, algebra, args.f1)
    f2 = _parse_hecke(cfg, algebra, args.f2)
    prod = algebra.convolve(f1, f2, window=cfg.window)
    print(f"f1 * f2 = {prod}")
    rows = []
    for label in prod.support():
        rows.append({
            "label": label.serialize(),
            "coeff": prod.ring.coeff_str(prod.terms[label]),
            "degree": algebra.degree(label),
        })
        print(f"  {label}: coeff {prod.ring.coeff_str(prod.terms[label])}, "
              f"deg {algebra.degree(label)}")
    if prod.flagged:
        print(f"flagged outside window B={cfg.window}: {[str(l) for l in prod.flagged]}")
    degree_line = None
    if f1.ring == ZZ and len(f1.terms) == 1 and len(f2.terms) == 1:
        (l1, c1), (l2, c2) = next(iter(f1.terms.items())), next(iter(f2.terms.items()))
        if c1 == 1 and c2 == 1:
            lhs = sum(prod.terms[l] * algebra.degree(l) for l in prod.terms)
            rhs = algebra.degree(l1) * algebra.degree(l2)
            degree_line = {"sum_c_deg": lhs, "deg_g_times_deg_h": rhs, "equal": lhs == rhs}
            print(f"degree check: sum c_x deg(x) = {lhs}, deg(g)*deg(h) = {rhs}")
    _emit_maybe(args, {"product": prod.serialize(), "table": rows, "degree_check": degree_line})
    return 0


def cmd_transport(args) -> int:
    cfg = load_config(args)
    ctx = cfg.transport_context()
    g = _parse_matrix(cfg, args.matrix)
    g2 = ctx.transport_element(g)
    label = ctx.algebra.classify(g)
    label2 = ctx.algebra2.classify(g2)
    print(f"g  = {g}")
    print(f"g' = {g2}")
    print(f"label  over F : {label}")
    print(f"label' over F': {label2}")
    _emit_maybe(args, {
        "transported": g2.serialize(),
        "label": label.serialize(),
        "label_transported": label2.serialize(),
    })
    return 0


def cmd_verify(args) -> int:
    cfg = load_config(args)
    rng = random.Random(cfg.seed)
    suites = {}
    failures = []
    which = args.suite
    if which in ("field", "all"):
        suites["field"] = _suite_field(cfg, rng, failures)
    if which in ("hecke", "all"):
        suites["hecke"] = _suite_hecke(cfg, rng, failures)
    if which in ("kazhdan", "all"):
        suites["kazhdan"] = _suite_kazhdan(cfg, failures)
    payload = {
        "config": cfg.describe(),
        "seed": cfg.seed,
        "suites": suites,
        "success": not failures,
    }
    _emit(args, payload)
    if args.csv:
        from .hecke import structure_constants_csv

        if cfg.field2 is not None:
            text = kazhdan.structure_constants_csv(cfg.transport_context())
        else:
            algebra = HeckeAlgebra(cfg.spec(), cfg.level, cfg.budget)
            text = structure_constants_csv(algebra, cfg.window)
        with open(args.csv, "w") as fh:
            fh.write(text)
        print(f"structure constants written to {args.csv}")
    if failures:
        print(f"FAILED: {failures[0]}", file=sys.stderr)
        return 1
    return 0


def _check(checks, failures, name, ok, detail=None):
    entry = {"name": name, "ok": bool(ok)}
    if detail is not None:
        entry["detail"] = detail
    checks.append(entry)
    if not ok:
        failures.append(name)


def _suite_field(cfg: RunConfig, rng, failures) -> dict:
    from .sampling import random_element

    checks = []
    models = [cfg.field] + ([cfg.field2] if cfg.field2 else [])
    for model in models:
        ok_mul = ok_ultra = True
        for _ in range(200):
            x, y = random_element(model, rng), random_element(model, rng)
            if not x.is_zero() and not y.is_zero():
                if (x * y).val() != x.val() + y.val():
                    ok_mul = False
            s = x + y
            if s.val() < min(x.val(), y.val()):
                ok_ultra = False
            if x.val() != y.val() and s.val() != min(x.val(), y.val()):
                ok_ultra = False
        _check(checks, failures, f"valuation multiplicative [{model}]", ok_mul)
        _check(checks, failures, f"ultrametric inequality [{model}]", ok_ultra)
        ring = model.residue_ring(min(2, max(1, cfg.level or 1)))
        ok_rt = all(ring.reduce(r.lift()) == r for r in ring.elements())
        _check(checks, failures, f"reduce(lift) identity [{model}]", ok_rt)
    if cfg.field2 is not None:
        pair = cfg.close_pair()
        ringN = cfg.field.residue_ring(pair.N)
        ok_hom = True
        for _ in range(100):
            a = ringN.reduce(_random_residue_lift(cfg.field, rng, pair.N))
            b = ringN.reduce(_random_residue_lift(cfg.field, rng, pair.N))
            if pair.apply(a + b) != pair.apply(a) + pair.apply(b):
                ok_hom = False
            if pair.apply(a * b) != pair.apply(a) * pair.apply(b):
                ok_hom = False
        _check(checks, failures, "lambda is a ring map (sampled)", ok_hom)
        uni = pair.apply(ringN.uniformizer()) == cfg.field2.residue_ring(pair.N).uniformizer()
        _check(checks, failures, "lambda maps uniformizer to uniformizer", uni)
    return {"checks": checks}


def _random_residue_lift(model, rng, N):
    from .sampling import random_integral

    return random_integral(model, rng, depth=N)


def _suite_hecke(cfg: RunConfig, rng, failures) -> dict:
    checks = []
    algebra = HeckeAlgebra(cfg.spec(), cfg.level, cfg.budget)
    spec = cfg.spec()
    unit = algebra.unit(ZZ)
    f = algebra.t(random_windowed(spec, rng, cfg.window))
    _check(checks, failures, "unit law",
           algebra.convolve(unit, f) == f and algebra.convolve(f, unit) == f)
    taus = [t for t in dominant_window(spec.family, spec.n, cfg.window)]
    ok_single = True
    for t1 in taus:
        for t2 in taus:
            prod = algebra.convolve(
                algebra.t(spec.n_of_tau(t1)), algebra.t(spec.n_of_tau(t2))
            )
            target = algebra.label_of_tau(t1 + t2)
            if prod.terms != {target: 1}:
                ok_single = False
    _check(checks, failures, "t_(n_tau1) * t_(n_tau2) = t_(n_tau1+tau2)", ok_single)
    ok_fact = True
    for _ in range(10):
        k1, k2 = random_in_k(spec, rng), random_in_k(spec, rng)
        tau = taus[rng.randrange(len(taus))]
        n_tau = spec.n_of_tau(tau)
        lhs = algebra.t(k1 @ n_tau @ k2)
        rhs = algebra.convolve(algebra.convolve(algebra.t(k1), algebra.t(n_tau)), algebra.t(k2))
        if lhs != rhs:
            ok_fact = False
    _check(checks, failures, "t_(k1 n_tau k2) = t_k1 * t_n_tau * t_k2", ok_fact)
    ok_deg = True
    labels = algebra.labels_in_window(cfg.window)
    for _ in range(5):
        l1, l2 = rng.choice(labels), rng.choice(labels)
        sc = algebra.structure_constants(l1, l2)
        lhs = sum(c * algebra.degree(l) for l, c in sc.items())
        if lhs != algebra.degree(l1) * algebra.degree(l2):
            ok_deg = False
        if any(c <= 0 for c in sc.values()):
            ok_deg = False
    _check(checks, failures, "degree conservation, positive integer constants", ok_deg)
    ell = next(l for l in (3, 5, 7) if l != spec.model.p)
    fl = PrimeField(ell)
    l1, l2 = rng.choice(labels), rng.choice(labels)
    over_z = algebra.convolve(algebra.t_of_label(l1), algebra.t_of_label(l2))
    over_fl = algebra.convolve(algebra.t_of_label(l1, fl), algebra.t_of_label(l2, fl))
    from .hecke import base_change

    _check(checks, failures, f"base change Z -> F_{ell}", base_change(over_z, fl) == over_fl)
    return {"checks": checks}


def _suite_kazhdan(cfg: RunConfig, failures) -> dict:
    ctx = cfg.transport_context()
    report = kazhdan.verify_algebra_map(ctx)
    if not report.success:
        failures.append("kazhdan structure constants")
    return report.to_dict()


# -- entry point ---------------------------------------------------------------


def _emit_maybe(args, payload):
    if getattr(args, "out", None):
        _emit(args, payload)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heckelab",
        description="Exact Hecke algebras of split groups over close local fields",
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="override RNG seed")
    parser.add_argument("--budget", type=int, help="override enumeration budget")
    parser.add_argument("--out", help="write the JSON report here")
    parser.add_argument("--csv", help="write matched structure constants as CSV")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cartan", help="Cartan factorization of a matrix")
    p.add_argument("matrix", help="JSON matrix, entries ints or element strings")
    p.set_defaults(func=cmd_cartan)

    p = sub.add_parser("dcosets", help="left cosets of K_m g K_m")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_dcosets)

    p = sub.add_parser("orbits", help="orbit/stabilizer table of a cocharacter")
    p.add_argument("tau", help="cocharacter, e.g. '1,-1' or '[1,0]'")
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("convolve", help="convolution of two Hecke elements")
    p.add_argument("f1", help="JSON Hecke element, e.g. {\"terms\":[{\"tau\":[1,0]}]}")
    p.add_argument("f2")
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("transport", help="transport an element across the pair")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser("verify", help="run invariant suites / the flagship check")
    p.add_argument("--suite", choices=["field", "hecke", "kazhdan", "all"], default="all")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HeckelabError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
