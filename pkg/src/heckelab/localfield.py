"""Exact arithmetic in dense models of non-Archimedean local fields.

Two models are provided:

* ``mixed`` characteristic: F = Q_p(pi) with the Eisenstein relation
  pi^e = p.  Elements are polynomials of degree < e in pi with rational
  coefficients, multiplied modulo pi^e - p.  The valuation of
  sum a_i pi^i is min_i (e*v_p(a_i) + i), normalized so v(pi) = 1.

* ``equal`` characteristic: F = F_q((t)) modelled densely by the rational
  function field F_q(t), q = p^f.  Elements are reduced fractions of
  polynomials; the valuation is the order of vanishing at t = 0 of the
  numerator minus that of the denominator.

Both models expose the valuation ring o = {v >= 0}, finite residue rings
o/pi^N, a canonical (deterministic, coordinate-wise) lift o/pi^N -> o, and
``ClosePair`` which realizes a ring isomorphism o_F/pi^N -> o_F'/pi'^N
sending the uniformizer class to the uniformizer class.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import (
    IncompatiblePair,
    NegativeValuation,
    ParseError,
    PrecisionExceeded,
)

INF = float("inf")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _vp_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    assert n != 0
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_fraction(x: Fraction, p: int):
    """p-adic valuation of a rational, INF for zero."""
    if x == 0:
        return INF
    return _vp_int(x.numerator, p) - _vp_int(x.denominator, p)


# ---------------------------------------------------------------------------
# finite fields F_{p^f}, elements encoded as integers in [0, p^f)
# ---------------------------------------------------------------------------


class GF:
    """The field F_{p^f}.

    Elements are integers in [0, q) whose base-p digits are the coefficients
    of a residue polynomial modulo a fixed irreducible monic polynomial of
    degree f (the lexicographically smallest one, so the encoding is
    deterministic).  For f = 1 this is plain arithmetic mod p.
    """

    def __init__(self, p: int, f: int = 1):
        if not is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        if f < 1:
            raise ValueError("f must be >= 1")
        self.p = p
        self.f = f
        self.q = p**f
        self.modulus = self._find_irreducible() if f > 1 else (0, 1)
        self._inv = {}

    def _digits(self, a: int):
        p, f = self.p, self.f
        return tuple((a // p**i) % p for i in range(f))

    def _encode(self, digits) -> int:
        return sum(d * self.p**i for i, d in enumerate(digits))

    def _find_irreducible(self):
        # smallest monic degree-f polynomial with no root pattern that
        # factors; test by exhaustive division against lower degrees
        p, f = self.p, self.f
        for tail in itertools.product(range(p), repeat=f):
            poly = tail + (1,)
            if self._is_irreducible(poly):
                return poly
        raise AssertionError("no irreducible polynomial found")

    def _is_irreducible(self, poly) -> bool:
        p = self.p
        deg = len(poly) - 1
        for d in range(1, deg // 2 + 1):
            for tail in itertools.product(range(p), repeat=d):
                div = tail + (1,)
                if _polymod_intcoeffs(poly, div, p) == ():
                    return False
        return True

    def add(self, a: int, b: int) -> int:
        p = self.p
        if self.f == 1:
            return (a + b) % p
        da, db = self._digits(a), self._digits(b)
        return self._encode(tuple((x + y) % p for x, y in zip(da, db)))

    def neg(self, a: int) -> int:
        p = self.p
        if self.f == 1:
            return (-a) % p
        return self._encode(tuple((-x) % p for x in self._digits(a)))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        p = self.p
        if self.f == 1:
            return (a * b) % p
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * self.f - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        rem = _polymod_intcoeffs(tuple(prod), self.modulus, p)
        return self._encode(rem + (0,) * (self.f - len(rem)))

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in GF")
        if a not in self._inv:
            # brute force is fine at desk scale (q <= a few hundred)
            for b in range(1, self.q):
                if self.mul(a, b) == 1:
                    self._inv[a] = b
                    break
        return self._inv[a]

    def __repr__(self):
        return f"GF({self.p}^{self.f})" if self.f > 1 else f"GF({self.p})"


def _polymod_intcoeffs(a, m, p):
    """Remainder of a modulo monic m, coefficients in Z/p, low-first tuples."""
    a = list(a)
    dm = len(m) - 1
    while len(a) > dm:
        lead = a[-1] % p
        if lead:
            shift = len(a) - 1 - dm
            for i, c in enumerate(m):
                a[shift + i] = (a[shift + i] - lead * c) % p
        a.pop()
    while a and a[-1] % p == 0:
        a.pop()
    return tuple(c % p for c in a)


@lru_cache(maxsize=None)
def gf(p: int, f: int = 1) -> GF:
    return GF(p, f)


# ---------------------------------------------------------------------------
# polynomials over GF(q): low-first tuples of encoded elements, no top zeros
# ---------------------------------------------------------------------------


def poly_trim(c):
    c = tuple(c)
    n = len(c)
    while n and c[n - 1] == 0:
        n -= 1
    return c[:n]


def poly_add(k: GF, a, b):
    n = max(len(a), len(b))
    a = a + (0,) * (n - len(a))
    b = b + (0,) * (n - len(b))
    return poly_trim(k.add(x, y) for x, y in zip(a, b))


def poly_neg(k: GF, a):
    return tuple(k.neg(x) for x in a)


def poly_mul(k: GF, a, b):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = k.add(out[i + j], k.mul(x, y))
    return poly_trim(out)

def poly_divmod(k: GF, a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    quot = [0] * max(0, len(a) - len(b) + 1)
    inv_lead = k.inv(b[-1])
    while len(a) >= len(b) and poly_trim(a):
        if a[-1] == 0:
            a.pop()
            continue
        shift = len(a) - len(b)
        coeff = k.mul(a[-1], inv_lead)
        quot[shift] = coeff
        for i, c in enumerate(b):
            a[shift + i] = k.sub(a[shift + i], k.mul(coeff, c))
        a.pop()
    return poly_trim(quot), poly_trim(a)


def poly_gcd(k: GF, a, b):
    a, b = poly_trim(a), poly_trim(b)
    if len(a) == 1 or len(b) == 1:
        return (1,) if a or b else ()
    while b:
        a, b = b, poly_divmod(k, a, b)[1]
    if a:
        inv = k.inv(a[-1])
        a = tuple(k.mul(c, inv) for c in a)  # monic normalization
    return a


def poly_ord0(a):
    """Order of vanishing at t = 0; INF for the zero polynomial."""
    if not a:
        return INF
    i = 0
    while a[i] == 0:
        i += 1
    return i


# ---------------------------------------------------------------------------
# field models
# ---------------------------------------------------------------------------

MIXED = "MixedChar"
EQUAL = "EqualChar"


@dataclass(frozen=True)
class FieldModel:
    """A dense model of a local field: see the module docstring.

    kind is MIXED (F = Q_p(pi), pi^e = p, residue degree fixed at 1) or
    EQUAL (F = F_{p^f}(t) inside F_{p^f}((t))).
    """

    kind: str
    p: int
    e: int = 1
    f: int = 1

    def __post_init__(self):
        if self.kind not in (MIXED, EQUAL):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.e < 1 or self.f < 1:
            raise ValueError("e and f must be >= 1")
        if self.kind == MIXED and self.f != 1:
            raise ValueError("mixed-characteristic model has residue degree 1")
        if self.kind == EQUAL and self.e != 1:
            raise ValueError("equal-characteristic model stores e = 1")

    @staticmethod
    def mixed(p: int, e: int = 1) -> "FieldModel":
        return FieldModel(MIXED, p, e=e)

    @staticmethod
    def equal(p: int, f: int = 1) -> "FieldModel":
        return FieldModel(EQUAL, p, f=f)

    @property
    def q(self) -> int:
        """Residue field size."""
        return self.p**self.f

    @property
    def gf(self) -> GF:
        return gf(self.p, self.f)

    # -- element constructors ------------------------------------------------

    def element(self, data) -> "FieldElement":
        return FieldElement(self, data)

    def zero(self) -> "FieldElement":
        if self.kind == MIXED:
            return FieldElement(self, (0,) * self.e)
        return FieldElement(self, ((), (1,)))

    def one(self) -> "FieldElement":
        return self.from_int(1)

    def from_int(self, n: int) -> "FieldElement":
        if self.kind == MIXED:
            return FieldElement(self, (n,) + (0,) * (self.e - 1))
        return FieldElement(self, (poly_trim((n % self.p,)), (1,)))

    def from_fraction(self, x: Fraction) -> "FieldElement":
        x = Fraction(x)
        if self.kind == MIXED:
            nums = (x.numerator,) + (0,) * (self.e - 1)
            return FieldElement(self, _mixed_normalize(nums, x.denominator), _canonical=True)
        # equal characteristic: only p-integral rationals make sense
        if x.denominator % self.p == 0:
            raise ValueError("denominator not invertible in residue characteristic")
        num = x.numerator % self.p
        den_inv = pow(x.denominator % self.p, -1, self.p)
        return self.from_int(num * den_inv)

    def uniformizer(self) -> "FieldElement":
        if self.kind == MIXED:
            if self.e == 1:
                return self.from_int(self.p)
            coords = [0] * self.e
            coords[1] = 1
            return FieldElement(self, tuple(coords))
        return FieldElement(self, ((0, 1), (1,)))

    def pi_pow(self, k: int) -> "FieldElement":
        """pi^k for any integer k, exact (cached)."""
        return _pi_pow(self, k)

    def residue_ring(self, N: int) -> "ResidueRing":
        return residue_ring(self, N)

    def parse(self, text: str) -> "FieldElement":
        return _parse_element(self, text)

    def __str__(self):
        if self.kind == MIXED:
            return f"Q_{self.p}(pi), pi^{self.e} = {self.p}"
        return f"F_{self.q}((t))"


class FieldElement:
    """An exact element of a field model; immutable and hashable.

    Mixed model: rational coordinates of 1, pi, ..., pi^(e-1), stored as
    ``data = (nums, den)`` with integer numerators over one positive common
    denominator, gcd-normalized (one gcd per operation instead of one per
    coordinate keeps Fraction overhead off the hot paths).  Equal model:
    ``data`` is a reduced fraction (num, den) of low-first coefficient
    tuples over GF(q), den monic.
    """

    __slots__ = ("model", "data")

    def __init__(self, model: FieldModel, data, _canonical=False):
        self.model = model
        if model.kind == MIXED:
            if _canonical:
                self.data = data
                return
            items = tuple(data)
            assert len(items) == model.e
            if all(isinstance(c, int) for c in items):
                self.data = _mixed_normalize(items, 1)
            else:
                fracs = [Fraction(c) for c in items]
                den = 1
                for f in fracs:
                    den = den * f.denominator // _gcd(den, f.denominator)
                nums = tuple(f.numerator * (den // f.denominator) for f in fracs)
                self.data = _mixed_normalize(nums, den)
        else:
            num, den = data
            if not _canonical:
                num, den = _ratfun_reduce(model.gf, poly_trim(num), poly_trim(den))
            self.data = (num, den)

    @property
    def coords(self):
        """Mixed model only: the rational coordinates as Fractions."""
        nums, den = self.data
        return tuple(Fraction(x, den) for x in nums)

    # -- ring structure ------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.model != self.model:
                raise ValueError("elements of different field models")
            return other
        if isinstance(other, int):
            return self.model.from_int(other)
        if isinstance(other, Fraction):
            return self.model.from_fraction(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        m = self.model
        if m.kind == MIXED:
            n1, d1 = self.data
            n2, d2 = other.data
            if d1 == d2:
                return FieldElement(
                    m, _mixed_normalize(tuple(a + b for a, b in zip(n1, n2)), d1),
                    _canonical=True,
                )
            g = _gcd(d1, d2)
            den = d1 // g * d2
            m1, m2 = den // d1, den // d2
            nums = tuple(a * m1 + b * m2 for a, b in zip(n1, n2))
            return FieldElement(m, _mixed_normalize(nums, den), _canonical=True)
        k = m.gf
        n1, d1 = self.data
        n2, d2 = other.data
        if d1 == (1,) and d2 == (1,):
            return FieldElement(m, (poly_add(k, n1, n2), (1,)), _canonical=True)
        num = poly_add(k, poly_mul(k, n1, d2), poly_mul(k, n2, d1))
        return FieldElement(m, (num, poly_mul(k, d1, d2)))

    __radd__ = __add__

    def __neg__(self):
        m = self.model
        if m.kind == MIXED:
            nums, den = self.data
            return FieldElement(m, (tuple(-a for a in nums), den), _canonical=True)
        num, den = self.data
        return FieldElement(m, (poly_neg(m.gf, num), den), _canonical=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        m = self.model
        if m.kind == MIXED:
            e, p = m.e, m.p
            n1, d1 = self.data
            n2, d2 = other.data
            prod = [0] * (2 * e - 1)
            for i, a in enumerate(n1):
                if a:
                    for j, b in enumerate(n2):
                        prod[i + j] += a * b
            # fold pi^(e+j) = p * pi^j
            for i in range(2 * e - 2, e - 1, -1):
                prod[i - e] += prod[i] * p
            return FieldElement(m, _mixed_normalize(tuple(prod[:e]), d1 * d2), _canonical=True)
        k = m.gf
        n1, d1 = self.data
        n2, d2 = other.data
        if d1 == (1,) and d2 == (1,):
            return FieldElement(m, (poly_mul(k, n1, n2), (1,)), _canonical=True)
        return FieldElement(m, (poly_mul(k, n1, n2), poly_mul(k, d1, d2)))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        m = self.model
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if m.kind == EQUAL:
            num, den = self.data
            return FieldElement(m, (den, num))
        # invert modulo the Eisenstein polynomial x^e - p via extended gcd
        modulus = [Fraction(0)] * (m.e + 1)
        modulus[0] = Fraction(-m.p)
        modulus[m.e] = Fraction(1)
        s = _q_poly_invmod(list(self.coords), modulus)
        return FieldElement(m, tuple(s[: m.e] + [Fraction(0)] * (m.e - len(s))))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.model.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- valuation and predicates ---------------------------------------------

    def val(self):
        """The normalized valuation, in Z for nonzero elements, INF for 0."""
        m = self.model
        if m.kind == MIXED:
            nums, den = self.data
            vden = _vp_int(den, m.p) if den % m.p == 0 else 0
            best = INF
            for i, a in enumerate(nums):
                if a:
                    v = m.e * (_vp_int(a, m.p) - vden) + i
                    if v < best:
                        best = v
            return best
        num, den = self.data
        return poly_ord0(num) - poly_ord0(den) if num else INF

    def is_zero(self) -> bool:
        if self.model.kind == MIXED:
            return not any(self.data[0])
        return not self.data[0]

    def is_integral(self) -> bool:
        return self.val() >= 0

    def is_unit(self) -> bool:
        return self.val() == 0

    def residue(self, N: int) -> "ResidueElement":
        return self.model.residue_ring(N).reduce(self)

    # -- structural ------------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.model == other.model and self.data == other.data

    def __hash__(self):
        return hash((self.model, self.data))

    def __repr__(self):
        return f"<{self} over {self.model}>"

    def __str__(self):
        m = self.model
        if m.kind == MIXED:
            return _format_terms(self.coords, "pi")
        num, den = self.data
        num_s = _format_terms(num, "t")
        if den == (1,):
            return num_s
        return f"({num_s})/({_format_terms(den, 't')})"


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def mixed_dot(model: "FieldModel", xs, ys) -> "FieldElement":
    """Fused inner product sum x_i y_i in the mixed model.

    Accumulates integer numerators over a running common denominator and
    normalizes once, instead of once per term; this is the hot loop of all
    matrix products.
    """
    e, p = model.e, model.p
    acc = [0] * e
    den_acc = 1
    width = 2 * e - 1
    for x, y in zip(xs, ys):
        n1, d1 = x.data
        n2, d2 = y.data
        prod = [0] * width
        for i, a in enumerate(n1):
            if a:
                for j, b in enumerate(n2):
                    prod[i + j] += a * b
        for i in range(width - 1, e - 1, -1):
            prod[i - e] += prod[i] * p
        d = d1 * d2
        if d == den_acc:
            for i in range(e):
                acc[i] += prod[i]
        else:
            g = _gcd(den_acc, d)
            m_old, m_new = d // g, den_acc // g
            for i in range(e):
                acc[i] = acc[i] * m_old + prod[i] * m_new
            den_acc = den_acc * m_old
    return FieldElement(model, _mixed_normalize(tuple(acc), den_acc), _canonical=True)


def _mixed_normalize(nums, den: int):
    """Canonical (nums, den): positive denominator, joint gcd one."""
    if den < 0:
        den = -den
        nums = tuple(-x for x in nums)
    g = den
    for x in nums:
        if g == 1:
            break
        g = _gcd(g, x)
    if g > 1:
        return tuple(x // g for x in nums), den // g
    return tuple(nums), den


@lru_cache(maxsize=None)
def _pi_pow(model: "FieldModel", k: int) -> "FieldElement":
    if k == 0:
        return model.one()
    if k < 0:
        return _pi_pow(model, -k).inverse()
    return _pi_pow(model, k - 1) * model.uniformizer()


def _ratfun_reduce(k: GF, num, den):
    if not den:
        raise ZeroDivisionError("zero denominator")
    if not num:
        return (), (1,)
    if den == (1,):
        return num, den
    g = poly_gcd(k, num, den)
    if len(g) > 1:
        num = poly_divmod(k, num, g)[0]
        den = poly_divmod(k, den, g)[0]
    lead_inv = k.inv(den[-1])
    num = tuple(k.mul(c, lead_inv) for c in num)
    den = tuple(k.mul(c, lead_inv) for c in den)
    return num, den


def _q_poly_divmod(a, b):
    """Division with remainder in Q[x]; low-first Fraction lists."""
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    b = list(b)
    while b and b[-1] == 0:
        b.pop()
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    db = len(b) - 1
    q = [Fraction(0)] * max(1, len(a))
    while len(a) - 1 >= db and a:
        c = a[-1] / b[-1]
        shift = len(a) - 1 - db
        q[shift] = c
        for i in range(db + 1):
            a[shift + i] -= c * b[i]
        while a and a[-1] == 0:
            a.pop()
    return q, a


def _q_poly_invmod(a, modulus):
    """Inverse of a modulo an irreducible polynomial over Q (extended gcd)."""
    r0, r1 = list(modulus), list(a)
    s0, s1 = [Fraction(0)], [Fraction(1)]
    while any(c != 0 for c in r1):
        q, r = _q_poly_divmod(r0, r1)
        # s_next = s0 - q*s1
        s_next = list(s0) + [Fraction(0)] * max(0, len(q) + len(s1) - 1 - len(s0))
        for i, qc in enumerate(q):
            if qc:
                for j, sc in enumerate(s1):
                    s_next[i + j] -= qc * sc
        r0, r1 = r1, r
        s0, s1 = s1, s_next
    # r0 is a nonzero constant c with s0*a = c mod modulus
    const = r0[0]
    assert all(c == 0 for c in r0[1:]) and const != 0
    return [c / const for c in s0]


def _format_terms(coeffs, var: str) -> str:
    parts = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        if i == 0:
            parts.append(str(c))
        else:
            v = var if i == 1 else f"{var}^{i}"
            parts.append(v if c == 1 else f"{c}*{v}")
    return " + ".join(parts) if parts else "0"


_TERM_RE = re.compile(
    r"^\s*(?:(?P<coeff>-?\d+(?:/\d+)?)\s*\*?\s*)?"
    r"(?:(?P<var>pi|t)(?:\^(?P<pow>\d+))?)?\s*$"
)


def _parse_element(model: FieldModel, text: str) -> FieldElement:
    text = text.strip()
    if model.kind == EQUAL and text.startswith("("):
        mt = re.fullmatch(r"\((?P<num>[^()]*)\)\s*/\s*\((?P<den>[^()]*)\)", text)
        if not mt:
            raise ParseError(f"cannot parse field element {text!r}")
        num = _parse_poly(model, mt.group("num"))
        den = _parse_poly(model, mt.group("den"))
        return FieldElement(model, (num, den))
    if model.kind == EQUAL:
        return FieldElement(model, (_parse_poly(model, text), (1,)))
    coords = [Fraction(0)] * model.e
    for term, sign in _split_terms(text):
        mt = _TERM_RE.match(term)
        if not mt or (mt.group("coeff") is None and mt.group("var") is None):
            raise ParseError(f"cannot parse term {term!r} in {text!r}")
        coeff = Fraction(mt.group("coeff")) if mt.group("coeff") else Fraction(1)
        power = 0
        if mt.group("var"):
            if mt.group("var") != "pi":
                raise ParseError(f"unexpected variable in {text!r}")
            power = int(mt.group("pow") or 1)
        if power >= model.e:
            raise ParseError(f"pi^{power} exceeds degree {model.e - 1}")
        coords[power] += sign * coeff
    return FieldElement(model, tuple(coords))


def _parse_poly(model: FieldModel, text: str):
    coeffs = {}
    for term, sign in _split_terms(text):
        mt = _TERM_RE.match(term)
        if not mt or (mt.group("coeff") is None and mt.group("var") is None):
            raise ParseError(f"cannot parse term {term!r} in {text!r}")
        c = int(mt.group("coeff")) if mt.group("coeff") else 1
        power = 0
        if mt.group("var"):
            if mt.group("var") != "t":
                raise ParseError(f"unexpected variable in {text!r}")
            power = int(mt.group("pow") or 1)
        k = model.gf
        prev = coeffs.get(power, 0)
        val = c % model.p if sign > 0 else (-c) % model.p
        coeffs[power] = k.add(prev, val)
    if not coeffs:
        return ()
    out = [0] * (max(coeffs) + 1)
    for i, c in coeffs.items():
        out[i] = c
    return poly_trim(out)


def _split_terms(text: str):
    """Yield (term, sign) pairs from a '+/-' separated expression."""
    text = text.strip()
    if not text:
        raise ParseError("empty element string")
    out = []
    sign = 1
    buf = []
    for ch in text:
        if ch in "+-" and buf and buf[-1] not in "*^/":
            out.append(("".join(buf), sign))
            sign = 1 if ch == "+" else -1
            buf = []
        elif ch in "+-" and not buf:
            sign = -sign if ch == "-" else sign
        else:
            buf.append(ch)
    out.append(("".join(buf), sign))
    return [(t.strip(), s) for t, s in out if t.strip()]


# ---------------------------------------------------------------------------
# residue rings o/pi^N
# ---------------------------------------------------------------------------


class ResidueRing:
    """The finite ring o/pi^N of a field model, N >= 0.

    Mixed model: coordinates are integer classes, the pi^i coefficient
    living modulo p^ceil((N-i)/e).  Equal model: a polynomial of degree < N
    over F_q.  N = 0 gives the zero ring (used for the spherical level).
    """

    def __init__(self, model: FieldModel, N: int):
        if N < 0:
            raise ValueError("precision must be >= 0")
        self.model = model
        self.N = N
        if model.kind == MIXED:
            self.caps = tuple(
                max(0, -((- (N - i)) // model.e)) for i in range(model.e)
            )
            self.moduli = tuple(model.p**k for k in self.caps)
        else:
            self.caps = (N,)
            self.moduli = (model.q,) * N
        self.size = 1
        for mod in self.moduli:
            self.size *= mod

    # -- constructors ----------------------------------------------------------

    def zero(self) -> "ResidueElement":
        return ResidueElement(self, (0,) * self._width())

    def one(self) -> "ResidueElement":
        coords = [0] * self._width()
        if coords:
            coords[0] = 1 % self.moduli[0]
        return ResidueElement(self, tuple(coords))

    def uniformizer(self) -> "ResidueElement":
        return self.reduce(self.model.uniformizer())

    def from_int(self, n: int) -> "ResidueElement":
        return self.reduce(self.model.from_int(n))

    def _width(self) -> int:
        return self.model.e if self.model.kind == MIXED else self.N

    def element(self, coords) -> "ResidueElement":
        coords = tuple(c % mod for c, mod in zip(coords, self.moduli))
        return ResidueElement(self, coords)

    def elements(self):
        """All ring elements in a fixed deterministic order."""
        for coords in itertools.product(*(range(mod) for mod in self.moduli)):
            yield ResidueElement(self, coords)

    # -- reduction and canonical lift -------------------------------------------

    def reduce(self, x: FieldElement) -> "ResidueElement":
        if x.model != self.model:
            raise ValueError("element of a different model")
        if x.val() < 0:
            raise NegativeValuation(f"v({x}) < 0, not in the valuation ring")
        if self.N == 0:
            return self.zero()
        m = self.model
        if m.kind == MIXED:
            nums, den = x.data
            coords = []
            for a, mod in zip(nums, self.moduli):
                if mod == 1:
                    coords.append(0)
                else:
                    # x integral and normalized force den prime to p
                    coords.append((a * pow(den % mod, -1, mod)) % mod)
            return ResidueElement(self, tuple(coords))
        num, den = x.data
        inv = _series_inverse(m.gf, den, self.N)
        series = poly_mul(m.gf, num, inv)[: self.N]
        return ResidueElement(self, tuple(series) + (0,) * (self.N - len(series)))

    def lift(self, r: "ResidueElement") -> FieldElement:
        """Canonical lift: least non-negative coordinate representatives."""
        if r.ring is not self:
            raise ValueError("residue element of a different ring")
        m = self.model
        if m.kind == MIXED:
            return FieldElement(m, tuple(r.coords))
        return FieldElement(m, (poly_trim(r.coords), (1,)), _canonical=True)


@lru_cache(maxsize=None)
def residue_ring(model: FieldModel, N: int) -> ResidueRing:
    return ResidueRing(model, N)


def _series_inverse(k: GF, den, N: int):
    """Power-series inverse of den mod t^N; requires den(0) != 0."""
    if not den or den[0] == 0:
        raise ZeroDivisionError("denominator vanishes at t = 0")
    inv0 = k.inv(den[0])
    out = [inv0]
    for n in range(1, N):
        acc = 0
        for j in range(1, min(n, len(den) - 1) + 1):
            acc = k.add(acc, k.mul(den[j], out[n - j]))
        out.append(k.neg(k.mul(inv0, acc)))
    return poly_trim(out)


class ResidueElement:
    """An element of o/pi^N in canonical coordinates; immutable, hashable."""

    __slots__ = ("ring", "coords")

    def __init__(self, ring: ResidueRing, coords):
        self.ring = ring
        self.coords = tuple(coords)
        assert len(self.coords) == ring._width()

    def _check(self, other):
        if not isinstance(other, ResidueElement) or other.ring is not self.ring:
            raise ValueError("residue elements of different rings")

    def __add__(self, other):
        self._check(other)
        r = self.ring
        if r.model.kind == MIXED:
            return ResidueElement(
                r,
                tuple(
                    (a + b) % mod
                    for a, b, mod in zip(self.coords, other.coords, r.moduli)
                ),
            )
        k = r.model.gf
        return ResidueElement(r, tuple(k.add(a, b) for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        r = self.ring
        if r.model.kind == MIXED:
            return ResidueElement(r, tuple((-a) % mod for a, mod in zip(self.coords, r.moduli)))
        k = r.model.gf
        return ResidueElement(r, tuple(k.neg(a) for a in self.coords))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        r = self.ring
        m = r.model
        if m.kind == MIXED:
            e, p = m.e, m.p
            prod = [0] * (2 * e - 1)
            for i, a in enumerate(self.coords):
                if a:
                    for j, b in enumerate(other.coords):
                        prod[i + j] += a * b
            for i in range(2 * e - 2, e - 1, -1):
                prod[i - e] += prod[i] * p
            return ResidueElement(r, tuple(c % mod for c, mod in zip(prod, r.moduli)))
        k = m.gf
        N = r.N
        out = [0] * N
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(other.coords):
                    if i + j < N and b:
                        out[i + j] = k.add(out[i + j], k.mul(a, b))
        return ResidueElement(r, tuple(out))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def val(self):
        """Valuation as seen at this precision: an int < N, or N meaning
        'congruent to zero mod pi^N'."""
        r = self.ring
        if self.is_zero():
            return r.N
        m = r.model
        if m.kind == EQUAL:
            return poly_ord0(self.coords)
        best = r.N
        for i, c in enumerate(self.coords):
            if c:
                best = min(best, m.e * _vp_int(c, m.p) + i)
        return best

    def is_unit(self) -> bool:
        # in the zero ring (N = 0) every element is trivially a unit
        return self.ring.N == 0 or self.val() == 0

    def inverse(self) -> "ResidueElement":
        if self.ring.N == 0:
            return self
        if not self.is_unit():
            raise ZeroDivisionError("not a unit in the residue ring")
        # lift, invert exactly (the inverse of a unit is integral), reduce
        return self.ring.reduce(self.lift().inverse())

    def lift(self) -> FieldElement:
        return self.ring.lift(self)

    def shift_down(self, k: int) -> "ResidueElement":
        """Divide by pi^k: an element of o/pi^(N-k); requires val >= k."""
        if self.val() < k:
            raise ValueError("element not divisible by pi^k")
        target = self.ring.model.residue_ring(self.ring.N - k)
        shifted = self.lift() * self.ring.model.pi_pow(-k)
        return target.reduce(shifted)

    def at_precision(self, N: int) -> "ResidueElement":
        """Truncate to a lower precision N."""
        if N > self.ring.N:
            raise PrecisionExceeded(f"cannot raise precision {self.ring.N} -> {N}")
        target = self.ring.model.residue_ring(N)
        return target.reduce(self.lift())

    def sort_key(self):
        return self.coords

    def __eq__(self, other):
        return (
            isinstance(other, ResidueElement)
            and other.ring is self.ring
            and other.coords == self.coords
        )

    def __hash__(self):
        return hash((id(self.ring), self.coords))

    def __str__(self):
        m = self.ring.model
        var = "pi" if m.kind == MIXED else "t"
        return f"{_format_terms(self.coords, var)}@{self.ring.N}"

    __repr__ = __str__


# ---------------------------------------------------------------------------
# m-close pairs and the isomorphism lambda_N
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosePair:
    """A matched pair of field models with closeness level N.

    Carries the coordinate-wise ring isomorphism
    lambda_N : o_F/pi^N -> o_F'/pi'^N with lambda_N(pi class) = pi' class.
    Identical models pair at any level; distinct models must share p, have
    residue degree 1, and every mixed-characteristic side needs e >= N
    (otherwise o/pi^N and F_p[t]/t^N are non-isomorphic rings).
    """

    model_f: FieldModel
    model_f2: FieldModel
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise IncompatiblePair("closeness level must be >= 1")
        a, b = self.model_f, self.model_f2
        if a == b:
            return
        if a.p != b.p:
            raise IncompatiblePair("residue characteristics differ")
        for side in (a, b):
            if side.f != 1:
                raise IncompatiblePair("cross pairs require residue degree 1")
            if side.kind == MIXED and side.e < self.N:
                raise IncompatiblePair(
                    f"mixed side needs ramification e >= N: e={side.e}, N={self.N}"
                )

    @property
    def identity(self) -> bool:
        return self.model_f == self.model_f2

    def inverse(self) -> "ClosePair":
        return ClosePair(self.model_f2, self.model_f, self.N)

    def apply(self, r: ResidueElement) -> ResidueElement:
        """lambda at the element's own precision N' <= N."""
        return self._map(r, self.model_f, self.model_f2)

    def apply_inverse(self, r: ResidueElement) -> ResidueElement:
        return self._map(r, self.model_f2, self.model_f)

    def _map(self, r: ResidueElement, src: FieldModel, dst: FieldModel) -> ResidueElement:
        if r.ring.model != src:
            raise ValueError("residue element does not belong to the source model")
        n = r.ring.N
        if n > self.N:
            raise PrecisionExceeded(f"element precision {n} exceeds pair level {self.N}")
        target = dst.residue_ring(n)
        if src == dst:
            return ResidueElement(target, r.coords)
        # distinct models: both sides are F_p[t]/t^n in uniformizer digits
        digits = self._digits(r, n)
        return self._from_digits(target, digits, n)

    @staticmethod
    def _digits(r: ResidueElement, n: int):
        m = r.ring.model
        if m.kind == EQUAL:
            return r.coords[:n]
        # e >= n, so every live coordinate cap is exactly p
        return tuple(r.coords[i] if i < len(r.coords) else 0 for i in range(n))

    @staticmethod
    def _from_digits(target: ResidueRing, digits, n: int):
        m = target.model
        if m.kind == EQUAL:
            return ResidueElement(target, tuple(digits) + (0,) * (target.N - n))
        coords = [0] * m.e
        for i in range(n):
            coords[i] = digits[i]
        return ResidueElement(target, tuple(coords))

    def __str__(self):
        return f"({self.model_f}) ~ ({self.model_f2}) at level {self.N}"
