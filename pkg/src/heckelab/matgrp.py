"""Split matrix groups GL_n, SL_n over a local-field model.

Provides the hyperspecial maximal compact K = G(o) and its congruence
filtration K_m, the Cartan factorization g = a * n_tau * b computed by
Smith normal form over the valuation ring, the diagonal cocharacter
section tau -> n_tau = diag(pi^a_1, ..., pi^a_n), and exact enumeration
of the finite quotients K/K_m and K_m/K_(m+c).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (
    BudgetExceeded,
    NonUnitDet,
    NotDominant,
    NotInK,
    SLTraceNonzero,
    Singular,
)
from .localfield import FieldElement, FieldModel, ResidueElement, ResidueRing, mixed_dot

GL = "GL"
SL = "SL"

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class GroupSpec:
    """One of the split families GL_n / SL_n over a field model.

    n = 1 is admitted for GL only, as a degenerate test case.
    """

    family: str
    n: int
    model: FieldModel

    def __post_init__(self):
        if self.family not in (GL, SL):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == SL and self.n < 2:
            raise ValueError("SL needs n >= 2")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    def identity(self) -> "GroupElement":
        one, zero = self.model.one(), self.model.zero()
        rows = tuple(
            tuple(one if i == j else zero for j in range(self.n)) for i in range(self.n)
        )
        return GroupElement(self, rows)

    def element(self, rows) -> "GroupElement":
        return GroupElement(self, rows)

    def from_ints(self, rows) -> "GroupElement":
        conv = tuple(
            tuple(self.model.from_int(x) if isinstance(x, int) else x for x in row)
            for row in rows
        )
        return GroupElement(self, conv)

    def parse_matrix(self, rows_of_strings) -> "GroupElement":
        conv = tuple(
            tuple(
                self.model.from_int(x) if isinstance(x, int) else self.model.parse(str(x))
                for x in row
            )
            for row in rows_of_strings
        )
        return GroupElement(self, conv)

    def n_of_tau(self, tau: "CartanDatum") -> "GroupElement":
        """The cocharacter section: diag(pi^a_1, ..., pi^a_n)."""
        if len(tau.coords) != self.n:
            raise ValueError(f"cocharacter length {len(tau.coords)} != n = {self.n}")
        if self.family == SL and sum(tau.coords) != 0:
            raise SLTraceNonzero(f"{tau} does not sum to zero")
        zero = self.model.zero()
        rows = tuple(
            tuple(
                self.model.pi_pow(tau.coords[i]) if i == j else zero
                for j in range(self.n)
            )
            for i in range(self.n)
        )
        return GroupElement(self, rows)


@dataclass(frozen=True)
class CartanDatum:
    """A dominant cocharacter: integers a_1 >= a_2 >= ... >= a_n."""

    coords: tuple

    def __post_init__(self):
        coords = tuple(int(a) for a in self.coords)
        object.__setattr__(self, "coords", coords)
        for x, y in zip(coords, coords[1:]):
            if x < y:
                raise NotDominant(f"{coords} is not weakly decreasing")

    @property
    def norm(self) -> int:
        """max(|a_1|, |a_n|), the window size of the cocharacter."""
        if not self.coords:
            return 0
        return max(abs(self.coords[0]), abs(self.coords[-1]))

    @property
    def spread(self) -> int:
        """a_1 - a_n, controls all conjugation precision losses."""
        if not self.coords:
            return 0
        return self.coords[0] - self.coords[-1]

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)

    def __add__(self, other: "CartanDatum") -> "CartanDatum":
        return CartanDatum(tuple(x + y for x, y in zip(self.coords, other.coords)))

    def sort_key(self):
        return self.coords

    def __str__(self):
        return "(" + ",".join(str(a) for a in self.coords) + ")"


def zero_tau(n: int) -> CartanDatum:
    return CartanDatum((0,) * n)


def dominant_window(family: str, n: int, bound: int):
    """All dominant cocharacters with norm <= bound (SL: summing to zero)."""
    out = []
    for coords in itertools.product(range(bound, -bound - 1, -1), repeat=n):
        if any(x < y for x, y in zip(coords, coords[1:])):
            continue
        if family == SL and sum(coords) != 0:
            continue
        out.append(CartanDatum(coords))
    return sorted(out, key=lambda t: t.sort_key())


class GroupElement:
    """An invertible n x n matrix over the field model; immutable.

    For the SL family the determinant is required to be exactly 1.
    """

    __slots__ = ("group", "rows", "_det")

    def __init__(self, group: GroupSpec, rows, _det=None):
        self.group = group
        self.rows = tuple(tuple(row) for row in rows)
        assert len(self.rows) == group.n and all(len(r) == group.n for r in self.rows)
        self._det = _det
        d = self.det()
        if d.is_zero():
            raise Singular("matrix has determinant zero")
        if group.family == SL and d != group.model.one():
            raise Singular(f"SL element must have determinant 1, got {d}")

    def det(self) -> FieldElement:
        if self._det is None:
            self._det = _det_rows(self.rows, self.group.model)
        return self._det

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        assert other.group == self.group
        n = self.group.n
        rows = tuple(
            tuple(
                _dot(self.rows[i], tuple(other.rows[k][j] for k in range(n)))
                for j in range(n)
            )
            for i in range(n)
        )
        return GroupElement(self.group, rows, _det=self.det() * other.det())

    def inverse(self) -> "GroupElement":
        inv_rows = _invert_rows(self.rows, self.group.model, self.det())
        return GroupElement(self.group, inv_rows, _det=self.det().inverse())

    def entry(self, i: int, j: int) -> FieldElement:
        return self.rows[i][j]

    # -- membership in the congruence filtration -------------------------------

    def in_k(self) -> bool:
        """Membership in K = G(o): integral entries, unit determinant."""
        if not all(x.is_integral() for row in self.rows for x in row):
            return False
        return self.det().is_unit()

    def in_km(self, m: int) -> bool:
        """Membership in K_m = Ker(G(o) -> G(o/pi^m)); K_0 = K."""
        if m == 0:
            return self.in_k()
        if not self.in_k():
            return False
        one = self.group.model.one()
        for i, row in enumerate(self.rows):
            for j, x in enumerate(row):
                delta = x - one if i == j else x
                if delta.val() < m:
                    return False
        return True

    def min_val(self):
        return min(x.val() for row in self.rows for x in row)

    def __eq__(self, other):
        return (
            isinstance(other, GroupElement)
            and other.group == self.group
            and other.rows == self.rows
        )

    def __hash__(self):
        return hash((self.group, self.rows))

    def __str__(self):
        return "[" + "; ".join(", ".join(str(x) for x in row) for row in self.rows) + "]"

    __repr__ = __str__

    def serialize(self):
        return [[str(x) for x in row] for row in self.rows]


def membership(g: GroupElement, m=None) -> bool:
    """K-membership (m None) or K_m-membership."""
    return g.in_k() if m is None else g.in_km(m)


def _dot(row, col):
    model = row[0].model
    if model.kind == "MixedChar":
        return mixed_dot(model, row, col)
    acc = row[0] * col[0]
    for x, y in zip(row[1:], col[1:]):
        acc = acc + x * y
    return acc


def _det_rows(rows, model: FieldModel):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    acc = model.zero()
    for j in range(n):
        if rows[0][j].is_zero():
            continue
        minor = [
            [rows[i][jj] for jj in range(n) if jj != j] for i in range(1, n)
        ]
        term = rows[0][j] * _det_rows(minor, model)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def _invert_rows(rows, model: FieldModel, det):
    n = len(rows)
    if n == 1:
        return ((det.inverse(),),)
    det_inv = det.inverse()
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [
                [rows[r][c] for c in range(n) if c != j]
                for r in range(n)
                if r != i
            ]
            cof = _det_rows(minor, model)
            out[j][i] = cof * det_inv if (i + j) % 2 == 0 else -cof * det_inv
    return tuple(tuple(r) for r in out)


# ---------------------------------------------------------------------------
# Cartan factorization by Smith normal form over the valuation ring
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CartanFactorization:
    """g = a * n_tau * b with a, b in K and tau dominant."""

    a: GroupElement
    tau: CartanDatum
    b: GroupElement

    def n_tau(self) -> GroupElement:
        return self.a.group.n_of_tau(self.tau)

    def product(self) -> GroupElement:
        return self.a @ self.n_tau() @ self.b


def cartan(g: GroupElement, rng=None) -> CartanFactorization:
    """Smith-normal-form factorization over the valuation ring.

    Pivots on a minimal-valuation entry of the trailing submatrix
    (lexicographically smallest position on ties; ``rng`` randomizes the
    tie-break, used by the witness-independence harness).  All transforms
    are unimodular, so the witnesses land in K; for SL both witnesses are
    repaired to determinant one by a diagonal unit that commutes with n_tau.
    """
    spec = g.group
    model = spec.model
    n = spec.n
    one, zero = model.one(), model.zero()

    M = [list(row) for row in g.rows]
    # invariant: g = A * M * B throughout
    A = [[one if i == j else zero for j in range(n)] for i in range(n)]
    B = [[one if i == j else zero for j in range(n)] for i in range(n)]

    for k in range(n):
        pos = _pick_pivot(M, k, rng)
        pi, pj = pos
        if pi != k:
            M[k], M[pi] = M[pi], M[k]
            for r in range(n):  # A <- A * swap
                A[r][k], A[r][pi] = A[r][pi], A[r][k]
        if pj != k:
            for r in range(n):
                M[r][k], M[r][pj] = M[r][pj], M[r][k]
            B[k], B[pj] = B[pj], B[k]
        pivot_inv = M[k][k].inverse()
        for i in range(k + 1, n):
            if M[i][k].is_zero():
                continue
            f = M[i][k] * pivot_inv  # integral: pivot has minimal valuation
            assert f.is_integral()
            for c in range(k, n):
                M[i][c] = M[i][c] - f * M[k][c]
            for r in range(n):
                A[r][k] = A[r][k] + f * A[r][i]
        for j in range(k + 1, n):
            if M[k][j].is_zero():
                continue
            f = M[k][j] * pivot_inv
            assert f.is_integral()
            for r in range(k, n):
                M[r][j] = M[r][j] - f * M[r][k]
            for c in range(n):
                B[k][c] = B[k][c] + f * B[j][c]

    # normalize the diagonal to exact pi powers
    ds = []
    for k in range(n):
        d = M[k][k].val()
        assert d != float("inf"), "singular input slipped through"
        ds.append(int(d))
        unit = M[k][k] * model.pi_pow(-ds[-1])
        M[k][k] = model.pi_pow(ds[-1])
        for c in range(n):
            B[k][c] = unit * B[k][c]

    # reverse so the exponents are weakly decreasing (dominant)
    perm = list(range(n))[::-1]
    ds = ds[::-1]
    A = [[A[r][perm[c]] for c in range(n)] for r in range(n)]
    B = [B[perm[r]] for r in range(n)]

    tau = CartanDatum(tuple(ds))
    a = GroupElement(_witness_spec(spec), tuple(tuple(r) for r in A))
    b = GroupElement(_witness_spec(spec), tuple(tuple(r) for r in B))

    if spec.family == SL:
        a, b = _repair_sl(spec, a, b)
    else:
        a = GroupElement(spec, a.rows)
        b = GroupElement(spec, b.rows)
    return CartanFactorization(a, tau, b)


def _witness_spec(spec: GroupSpec) -> GroupSpec:
    # SNF transforms live in GL(o) even for an SL input
    return spec if spec.family == GL else GroupSpec(GL, spec.n, spec.model)


def _repair_sl(spec: GroupSpec, a: GroupElement, b: GroupElement):
    """Rescale so both witnesses have determinant exactly one.

    det(a) * det(b) = 1 since det(n_tau) = 1 for SL; multiplying a by
    diag(det(a)^-1, 1, ..) and b by diag(det(a), 1, ..) cancels against
    the diagonal n_tau.
    """
    n = spec.n
    da = a.det()
    da_inv = da.inverse()
    arows = [list(r) for r in a.rows]
    brows = [list(r) for r in b.rows]
    for r in range(n):
        arows[r][0] = arows[r][0] * da_inv
    for c in range(n):
        brows[0][c] = da * brows[0][c]
    return GroupElement(spec, arows), GroupElement(spec, brows)


def _pick_pivot(M, k, rng):
    n = len(M)
    best = None
    candidates = []
    for i in range(k, n):
        for j in range(k, n):
            v = M[i][j].val()
            if best is None or v < best:
                best = v
                candidates = [(i, j)]
            elif v == best:
                candidates.append((i, j))
    assert best is not None and best != float("inf"), "zero submatrix in SNF"
    if rng is not None and len(candidates) > 1:
        return candidates[rng.randrange(len(candidates))]
    return candidates[0]


# ---------------------------------------------------------------------------
# residue matrices and the reduction/lift pair
# ---------------------------------------------------------------------------


class ResidueMatrix:
    """An n x n matrix over a residue ring o/pi^N; immutable, hashable."""

    __slots__ = ("ring", "rows")

    def __init__(self, ring: ResidueRing, rows):
        self.ring = ring
        self.rows = tuple(tuple(row) for row in rows)

    @staticmethod
    def identity(ring: ResidueRing, n: int) -> "ResidueMatrix":
        one, zero = ring.one(), ring.zero()
        return ResidueMatrix(
            ring, tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))
        )

    @property
    def n(self) -> int:
        return len(self.rows)

    def __matmul__(self, other: "ResidueMatrix") -> "ResidueMatrix":
        assert other.ring is self.ring
        n = self.n
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = self.rows[i][0] * other.rows[0][j]
                for k in range(1, n):
                    acc = acc + self.rows[i][k] * other.rows[k][j]
                row.append(acc)
            rows.append(tuple(row))
        return ResidueMatrix(self.ring, tuple(rows))

    def det(self) -> ResidueElement:
        return _res_det(self.rows, self.ring)

    def is_invertible(self) -> bool:
        return self.det().is_unit()

    def inverse(self) -> "ResidueMatrix":
        d = self.det()
        if not d.is_unit():
            raise NonUnitDet("residue matrix determinant is not a unit")
        d_inv = d.inverse()
        n = self.n
        if n == 1:
            return ResidueMatrix(self.ring, ((d_inv * self.ring.one(),),))
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = [
                    [self.rows[r][c] for c in range(n) if c != j]
                    for r in range(n)
                    if r != i
                ]
                cof = _res_det(minor, self.ring)
                val = cof * d_inv
                out[j][i] = val if (i + j) % 2 == 0 else -val
        return ResidueMatrix(self.ring, tuple(tuple(r) for r in out))

    def map_entries(self, func, target_ring: ResidueRing) -> "ResidueMatrix":
        return ResidueMatrix(target_ring, tuple(tuple(func(x) for x in row) for row in self.rows))

    def at_precision(self, N: int) -> "ResidueMatrix":
        target = self.ring.model.residue_ring(N)
        return self.map_entries(lambda x: x.at_precision(N), target)

    def is_one(self) -> bool:
        one, n = self.ring.one(), self.n
        return all(
            self.rows[i][j] == (one if i == j else self.ring.zero())
            for i in range(n)
            for j in range(n)
        )

    def sort_key(self):
        return tuple(x.coords for row in self.rows for x in row)

    def __eq__(self, other):
        return (
            isinstance(other, ResidueMatrix)
            and other.ring is self.ring
            and other.rows == self.rows
        )

    def __hash__(self):
        return hash((id(self.ring), tuple(x.coords for row in self.rows for x in row)))

    def __str__(self):
        return "[" + "; ".join(", ".join(str(x) for x in row) for row in self.rows) + "]"

    __repr__ = __str__

    def serialize(self):
        return [[str(x) for x in row] for row in self.rows]


def _res_det(rows, ring: ResidueRing) -> ResidueElement:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    acc = ring.zero()
    for j in range(n):
        if rows[0][j].is_zero():
            continue
        minor = [[rows[i][jj] for jj in range(n) if jj != j] for i in range(1, n)]
        term = rows[0][j] * _res_det(minor, ring)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def reduce_group(g: GroupElement, N: int) -> ResidueMatrix:
    """The reduction K -> G(o/pi^N), a group homomorphism."""
    if not g.in_k():
        raise NotInK("reduction is defined on K = G(o) only")
    ring = g.group.model.residue_ring(N)
    return ResidueMatrix(ring, tuple(tuple(x.residue(N) for x in row) for row in g.rows))


def lift_group(r: ResidueMatrix, spec: GroupSpec) -> GroupElement:
    """Canonical section of reduce_group, landing in K.

    Entries are lifted coordinate-wise; for SL the first column is rescaled
    by det^-1 (a unit congruent to 1 mod pi^N) so the determinant is exactly
    one while the residue class is unchanged.
    """
    if r.ring.N == 0:
        return spec.identity()
    d = r.det()
    if not d.is_unit():
        raise NonUnitDet("cannot lift: determinant is not a unit")
    rows = [[x.lift() for x in row] for row in r.rows]
    if spec.family == SL:
        if d != r.ring.one():
            raise NonUnitDet("cannot lift to SL: residue determinant is not 1")
        g = GroupElement(GroupSpec(GL, spec.n, spec.model), rows)
        dt = g.det()
        dt_inv = dt.inverse()
        for i in range(spec.n):
            rows[i][0] = rows[i][0] * dt_inv
    return GroupElement(spec, tuple(tuple(row) for row in rows))


# ---------------------------------------------------------------------------
# enumeration of K/K_m and K_m/K_(m+c)
# ---------------------------------------------------------------------------


def _check_budget(count: int, budget: int):
    if count > budget:
        raise BudgetExceeded(f"enumeration of {count} elements exceeds budget {budget}")


def enumerate_residue_matrices(spec: GroupSpec, m: int, budget: int = DEFAULT_BUDGET):
    """Invertible matrices over o/pi^m (det = 1 for SL), sorted canonically."""
    if m == 0:
        ring = spec.model.residue_ring(0)
        return [ResidueMatrix.identity(ring, spec.n)]
    ring = spec.model.residue_ring(m)
    _check_budget(ring.size ** (spec.n**2), budget)
    pool = list(ring.elements())
    n = spec.n
    out = []
    one = ring.one()
    for flat in itertools.product(pool, repeat=n * n):
        mat = ResidueMatrix(ring, tuple(tuple(flat[i * n + j] for j in range(n)) for i in range(n)))
        d = mat.det()
        if spec.family == SL:
            if d == one:
                out.append(mat)
        elif d.is_unit():
            out.append(mat)
    out.sort(key=lambda mm: mm.sort_key())
    return out


def enumerate_residue(spec: GroupSpec, m: int, budget: int = DEFAULT_BUDGET):
    """Coset representatives of K/K_m, lifted canonically into K."""
    return [lift_group(r, spec) for r in enumerate_residue_matrices(spec, m, budget)]


def kernel_count(spec: GroupSpec, m: int, c: int) -> int:
    """|K_m/K_(m+c)| for m >= 1: q^(c n^2) for GL, q^(c (n^2-1)) for SL."""
    q = spec.model.q
    dim = spec.n**2 if spec.family == GL else spec.n**2 - 1
    return q ** (c * dim)


def iter_kernel(spec: GroupSpec, m: int, c: int, budget: int = DEFAULT_BUDGET):
    """Yield exact coset representatives of K_m/K_(m+c), one per class.

    Representatives are I + pi^m * Y with Y running over canonical residue
    lifts; for SL the last free entry of Y is solved so that the determinant
    is congruent to 1 mod pi^(m+c), then corrected to exactly 1.
    """
    if c == 0:
        yield spec.identity()
        return
    if m == 0:
        yield from enumerate_residue(spec, c, budget)
        return
    _check_budget(kernel_count(spec, m, c), budget)
    model = spec.model
    n = spec.n
    ring_c = model.residue_ring(c)
    pool = list(ring_c.elements())
    pim = model.pi_pow(m)
    if spec.family == GL:
        for flat in itertools.product(pool, repeat=n * n):
            yield _kernel_element(spec, pim, [list(flat[i * n : (i + 1) * n]) for i in range(n)])
    else:
        ring_big = model.residue_ring(m + c)
        pim_big = ring_big.reduce(pim)
        one_big = ring_big.one()
        for flat in itertools.product(pool, repeat=n * n - 1):
            y = [[None] * n for _ in range(n)]
            it = iter(flat)
            for i in range(n):
                for j in range(n):
                    if (i, j) != (n - 1, n - 1):
                        y[i][j] = next(it)
            y[n - 1][n - 1] = _solve_last_entry(spec, ring_big, pim_big, one_big, y, ring_c)
            g = _kernel_element(spec, pim, y, sl_fix=True)
            yield g


def _kernel_element(spec: GroupSpec, pim: FieldElement, y_rows, sl_fix=False) -> GroupElement:
    model = spec.model
    n = spec.n
    one, zero = model.one(), model.zero()
    rows = [
        [
            (one if i == j else zero) + pim * y_rows[i][j].lift()
            for j in range(n)
        ]
        for i in range(n)
    ]
    if not sl_fix:
        return GroupElement(spec, tuple(tuple(r) for r in rows))
    g = GroupElement(GroupSpec(GL, n, model), tuple(tuple(r) for r in rows))
    dt = g.det()
    if dt == one:
        return GroupElement(spec, g.rows, _det=one)
    dt_inv = dt.inverse()
    rows = [list(r) for r in g.rows]
    for i in range(n):
        rows[i][0] = rows[i][0] * dt_inv
    return GroupElement(spec, tuple(tuple(r) for r in rows))


def _solve_last_entry(spec, ring_big, pim_big, one_big, y, ring_c):
    """Choose y[n-1][n-1] in o/pi^c making det(I + pi^m Y) = 1 mod pi^(m+c).

    det is affine in the last entry: det = alpha + pi^m * y_nn * C with
    C = 1 + O(pi^m) a unit cofactor, and alpha = 1 + O(pi^m), so
    y_nn = -((alpha - 1)/pi^m) * (C mod pi^c)^-1.
    """
    n = spec.n
    m = ring_big.N - ring_c.N
    zero_c = ring_c.zero()
    a_rows = []
    for i in range(n):
        row = []
        for j in range(n):
            yij = y[i][j] if y[i][j] is not None else zero_c
            base = one_big if i == j else ring_big.zero()
            row.append(base + pim_big * ring_big.reduce(yij.lift()))
        a_rows.append(tuple(row))
    alpha = _res_det(a_rows, ring_big)
    minor = [[a_rows[i][j] for j in range(n - 1)] for i in range(n - 1)]
    cof = _res_det(minor, ring_big) if n > 1 else one_big
    u = (alpha - one_big).shift_down(m)
    return -(u * cof.at_precision(ring_c.N).inverse())


def enumerate_kernel(spec: GroupSpec, m: int, c: int, budget: int = DEFAULT_BUDGET):
    """Materialized list of K_m/K_(m+c) representatives (see iter_kernel)."""
    return list(iter_kernel(spec, m, c, budget))
