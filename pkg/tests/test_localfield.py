import itertools
from fractions import Fraction

import pytest

from heckelab.errors import IncompatiblePair, NegativeValuation, PrecisionExceeded
from heckelab.localfield import INF, ClosePair, FieldModel, gf, poly_trim
from heckelab.sampling import random_element, random_integral

from conftest import all_models


# ---------------------------------------------------------------- valuations


def test_valuation_of_uniformizer_and_p():
    m = FieldModel.mixed(2, 2)
    assert m.uniformizer().val() == 1
    assert m.from_int(2).val() == 2  # pi^2 = p forces v(p) = e


def test_valuation_equal_char_unit_denominator():
    m = FieldModel.equal(3)
    t = m.uniformizer()
    x = (t * t) / (m.one() + t)
    assert x.val() == 2


def test_valuation_mixed_min_formula():
    # v(3 + pi) over Q_3(pi), pi^2 = 3: min(e*1 + 0, 1) = 1,
    # cross-checked by the factorization 3 + pi = pi * (pi + 1)
    m = FieldModel.mixed(3, 2)
    pi = m.uniformizer()
    x = m.from_int(3) + pi
    assert x.val() == 1
    factored = pi * (pi + m.one())
    assert x == factored
    assert factored.val() == pi.val() + (pi + m.one()).val()


def test_valuation_zero_is_infinite():
    for model in all_models():
        assert model.zero().val() == INF


@pytest.mark.parametrize("model", all_models(), ids=str)
def test_valuation_properties_random(model, rng):
    for _ in range(1000):
        x = random_element(model, rng)
        y = random_element(model, rng)
        if not x.is_zero() and not y.is_zero():
            assert (x * y).val() == x.val() + y.val()
        s = x + y
        assert s.val() >= min(x.val(), y.val())
        if x.val() != y.val():
            assert s.val() == min(x.val(), y.val())


@pytest.mark.parametrize("model", all_models(), ids=str)
def test_field_axioms_random(model, rng):
    for _ in range(100):
        x = random_element(model, rng)
        y = random_element(model, rng)
        z = random_element(model, rng)
        assert (x + y) * z == x * z + y * z
        assert x * y == y * x
        assert (x * y) * z == x * (y * z)
        if not x.is_zero():
            assert x * x.inverse() == model.one()


# ---------------------------------------------------------------- reduce / lift


def test_reduce_trivial_one():
    for model in all_models():
        r = model.one().residue(3)
        assert r == model.residue_ring(3).one()


def test_reduce_p_is_zero_when_fully_ramified():
    m = FieldModel.mixed(2, 2)
    assert m.from_int(2).residue(2).is_zero()


def test_reduce_geometric_series():
    # 1/(1+t) mod t^2 over F_2; oracle: truncation of sum (-t)^k
    m = FieldModel.equal(2)
    t = m.uniformizer()
    x = m.one() / (m.one() + t)
    k = m.gf
    series = poly_trim([1, k.neg(1)])  # 1 - t truncated at t^2
    assert x.residue(2).coords == tuple(series) + (0,) * (2 - len(series))
    assert str(x.residue(2)) == "1 + t@2"


def test_reduce_negative_valuation_rejected():
    m = FieldModel.equal(3)
    bad = m.one() / m.uniformizer()
    with pytest.raises(NegativeValuation):
        bad.residue(2)


def test_lift_examples():
    m = FieldModel.mixed(2, 2)
    r = (m.one() + m.uniformizer()).residue(2)
    assert r.lift() == m.one() + m.uniformizer()
    e = FieldModel.equal(3)
    r2 = (e.from_int(2) * e.uniformizer()).residue(3)
    assert r2.lift() == e.from_int(2) * e.uniformizer()
    for model in all_models():
        assert model.zero().residue(2).lift() == model.zero()


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("N", [1, 2])
def test_reduce_lift_identity_exhaustive(p, N):
    for model in (FieldModel.mixed(p, 2), FieldModel.equal(p)):
        ring = model.residue_ring(N)
        for r in ring.elements():
            assert ring.reduce(r.lift()) == r
            assert r.lift().val() >= 0


def test_residue_ring_sizes():
    assert FieldModel.mixed(2, 2).residue_ring(3).size == 8
    assert FieldModel.equal(3).residue_ring(2).size == 9
    assert FieldModel.equal(2, 2).residue_ring(2).size == 16
    assert FieldModel.mixed(2, 5).residue_ring(2).size == 4


def test_residue_ring_is_a_ring(rng):
    for model in (FieldModel.mixed(2, 2), FieldModel.equal(3)):
        ring = model.residue_ring(3)
        els = list(ring.elements())
        for _ in range(300):
            a, b, c = rng.choice(els), rng.choice(els), rng.choice(els)
            assert (a + b) * c == a * c + b * c
            assert a * b == b * a
            assert (a * b) * c == a * (b * c)


def test_reduction_is_ring_hom(rng):
    for model in (FieldModel.mixed(3, 2), FieldModel.equal(2)):
        ring = model.residue_ring(3)
        for _ in range(200):
            x = random_integral(model, rng)
            y = random_integral(model, rng)
            assert ring.reduce(x + y) == ring.reduce(x) + ring.reduce(y)
            assert ring.reduce(x * y) == ring.reduce(x) * ring.reduce(y)


# ---------------------------------------------------------------- lambda


def test_lambda_maps_uniformizer_to_uniformizer():
    pair = ClosePair(FieldModel.mixed(2, 2), FieldModel.equal(2), 2)
    image = pair.apply(FieldModel.mixed(2, 2).uniformizer().residue(2))
    assert image == FieldModel.equal(2).residue_ring(2).uniformizer()
    assert str(image) == "t@2"


def test_lambda_respects_characteristic():
    m = FieldModel.mixed(2, 2)
    pair = ClosePair(m, FieldModel.equal(2), 2)
    assert pair.apply(m.from_int(2).residue(2)).is_zero()


def test_lambda_identity_pair():
    e3 = FieldModel.equal(3)
    pair = ClosePair(e3, e3, 4)
    x = (e3.one() + e3.from_int(2) * e3.uniformizer()).residue(4)
    assert pair.apply(x) == x


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("N", [1, 2])
def test_lambda_ring_isomorphism_exhaustive(p, N):
    src = FieldModel.mixed(p, 2)
    dst = FieldModel.equal(p)
    pair = ClosePair(src, dst, N)
    ring = src.residue_ring(N)
    els = list(ring.elements())
    images = set()
    for a in els:
        images.add(pair.apply(a).coords)
        for b in els:
            assert pair.apply(a + b) == pair.apply(a) + pair.apply(b)
            assert pair.apply(a * b) == pair.apply(a) * pair.apply(b)
    assert len(images) == dst.residue_ring(N).size
    assert pair.apply(ring.one()) == dst.residue_ring(N).one()


def test_lambda_flagship_pair_sampled(rng):
    src = FieldModel.mixed(2, 5)
    dst = FieldModel.equal(2)
    pair = ClosePair(src, dst, 5)
    ring = src.residue_ring(5)
    for _ in range(1000):
        a = ring.reduce(random_integral(src, rng))
        b = ring.reduce(random_integral(src, rng))
        assert pair.apply(a + b) == pair.apply(a) + pair.apply(b)
        assert pair.apply(a * b) == pair.apply(a) * pair.apply(b)


def test_lambda_inverse_roundtrip(rng):
    pair = ClosePair(FieldModel.mixed(2, 5), FieldModel.equal(2), 5)
    ring = FieldModel.mixed(2, 5).residue_ring(4)
    for _ in range(200):
        a = ring.reduce(random_integral(FieldModel.mixed(2, 5), rng))
        assert pair.apply_inverse(pair.apply(a)) == a
        assert pair.inverse().apply(pair.apply(a)) == a


def test_lambda_lower_precision():
    pair = ClosePair(FieldModel.mixed(2, 5), FieldModel.equal(2), 5)
    x = FieldModel.mixed(2, 5).uniformizer().residue(3)
    assert pair.apply(x) == FieldModel.equal(2).residue_ring(3).uniformizer()


def test_lambda_precision_exceeded():
    pair = ClosePair(FieldModel.mixed(2, 2), FieldModel.equal(2), 2)
    x = FieldModel.mixed(2, 2).one().residue(3)
    with pytest.raises(PrecisionExceeded):
        pair.apply(x)


def test_incompatible_pairs_rejected():
    with pytest.raises(IncompatiblePair):
        ClosePair(FieldModel.mixed(2, 1), FieldModel.equal(2), 2)  # e < N
    with pytest.raises(IncompatiblePair):
        ClosePair(FieldModel.mixed(2, 2), FieldModel.equal(3), 2)  # p differs
    with pytest.raises(IncompatiblePair):
        ClosePair(FieldModel.mixed(2, 3), FieldModel.equal(2, 2), 2)  # f > 1
    # identical models pair at any level, even past the ramification
    ClosePair(FieldModel.mixed(2, 1), FieldModel.mixed(2, 1), 7)


# ---------------------------------------------------------------- serialization


@pytest.mark.parametrize("model", all_models()[:6], ids=str)
def test_element_string_roundtrip(model, rng):
    for _ in range(100):
        x = random_element(model, rng)
        assert model.parse(str(x)) == x


def test_parse_specific_forms():
    m = FieldModel.mixed(2, 2)
    assert m.parse("1 + 1/2*pi") == m.one() + m.from_fraction(Fraction(1, 2)) * m.uniformizer()
    assert m.parse("-3") == m.from_int(-3)
    e = FieldModel.equal(2)
    t = e.uniformizer()
    assert e.parse("(1 + t)/(1 + t + t^2)") == (e.one() + t) / (e.one() + t + t * t)


def test_residue_string_has_precision_suffix():
    m = FieldModel.mixed(3, 2)
    assert str(m.one().residue(2)).endswith("@2")


# ---------------------------------------------------------------- GF(p^f)


def test_gf4_field_axioms():
    k = gf(2, 2)
    els = range(4)
    for a, b in itertools.product(els, els):
        assert k.add(a, b) == k.add(b, a)
        assert k.mul(a, b) == k.mul(b, a)
        for c in els:
            assert k.mul(a, k.add(b, c)) == k.add(k.mul(a, b), k.mul(a, c))
    for a in range(1, 4):
        assert k.mul(a, k.inv(a)) == 1


def test_gf9_inverses():
    k = gf(3, 2)
    for a in range(1, 9):
        assert k.mul(a, k.inv(a)) == 1


def test_equal_char_f2_arithmetic(rng):
    model = FieldModel.equal(2, 2)
    t = model.uniformizer()
    x = model.one() + t
    assert (x * x.inverse()) == model.one()
    ring = model.residue_ring(2)
    assert ring.size == 16
    els = list(ring.elements())
    units = [e for e in els if e.is_unit()]
    assert len(units) == 12  # unit constant term: 3 choices, times 4 for the t digit
