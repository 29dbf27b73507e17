"""Transport of Hecke data between the two sides of a close pair.

Elements move by re-factorization: g = a n_tau b with witnesses in K, the
witnesses cross through lambda_N at the working precision, and the image
is a' n'_tau b'.  On basis labels this realizes the bijection
t_(x n_tau y^-1) -> t_(x' n'_tau y'^-1); the verification harness
certifies exact equality of all windowed structure constants, the label
bijection, and the compatibility of stabilizers under the residue
isomorphism.  Windowed modules transport by relabeling their acting
generators, which yields the desk-scale integrality transfer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    IncompatiblePair,
    InsufficientCloseness,
    MixedRings,
    SingularBasis,
)
from .hecke import DoubleCosetLabel, HeckeAlgebra, HeckeElement
from .localfield import ClosePair
from .matgrp import (
    DEFAULT_BUDGET,
    CartanDatum,
    GroupElement,
    GroupSpec,
    ResidueMatrix,
    cartan,
    lift_group,
    reduce_group,
)
from .rings import RationalField


def safety_bound(taus, m: int) -> int:
    """A level n_C with g K_(n_C) g^-1 inside K_m for all g in G_C.

    For C a set of cocharacters the certified bound is m + 2 max |tau|:
    conjugation by a n_tau b changes entry valuations by at most
    2 max |tau|, so the inclusion follows from the valuation inequality.
    The bound is sound, not claimed minimal.
    """
    taus = list(taus)
    if not taus:
        return m
    return m + 2 * max(t.norm for t in taus)


class TransportContext:
    """A matched pair of Hecke algebras plus the working precision.

    N is the precision at which witnesses cross lambda; every transported
    cocharacter tau must satisfy N >= m + 2|tau|, which is exactly the
    certified bound of safety_bound({tau}, m).
    """

    def __init__(self, pair: ClosePair, spec: GroupSpec, spec2: GroupSpec,
                 m: int, N: int | None = None, window: int = 1,
                 budget: int = DEFAULT_BUDGET):
        if spec.family != spec2.family or spec.n != spec2.n:
            raise IncompatiblePair("transport needs the same group on both sides")
        if spec.model != pair.model_f or spec2.model != pair.model_f2:
            raise IncompatiblePair("group specs do not match the close pair models")
        N = pair.N if N is None else N
        if N > pair.N:
            raise InsufficientCloseness(f"working precision {N} exceeds pair level {pair.N}")
        if m < 1:
            raise ValueError("transport level m must be >= 1")
        if N < m:
            raise InsufficientCloseness(f"need N >= m, got N={N}, m={m}")
        self.pair = pair
        self.spec = spec
        self.spec2 = spec2
        self.m = m
        self.N = N
        self.window = window
        self.budget = budget
        self.algebra = HeckeAlgebra(spec, m, budget)
        self.algebra2 = HeckeAlgebra(spec2, m, budget)
        self._label_cache = {}

    def inverse(self) -> "TransportContext":
        return TransportContext(
            self.pair.inverse(), self.spec2, self.spec,
            self.m, self.N, self.window, self.budget,
        )

    @property
    def max_transportable_norm(self) -> int:
        return (self.N - self.m) // 2

    def _require_transportable(self, tau: CartanDatum):
        if self.N < self.m + 2 * tau.norm:
            raise InsufficientCloseness(
                f"transport of tau={tau} needs N >= {self.m + 2 * tau.norm}, have N={self.N}"
            )

    # -- elements -------------------------------------------------------------------

    def map_residue_matrix(self, r: ResidueMatrix, inverse=False) -> ResidueMatrix:
        """Entrywise lambda on a residue matrix (at the matrix's precision)."""
        dst = self.pair.model_f if inverse else self.pair.model_f2
        ring = dst.residue_ring(r.ring.N)
        f = self.pair.apply_inverse if inverse else self.pair.apply
        return r.map_entries(f, ring)

    def transport_witness(self, w: GroupElement) -> GroupElement:
        """lift' . lambda_N . reduce_N on an element of K."""
        r = reduce_group(w, self.N)
        return lift_group(self.map_residue_matrix(r), self.spec2)

    def transport_element(self, g: GroupElement, rng=None) -> GroupElement:
        """Transport along witnesses: a n_tau b -> a' n'_tau b'.

        The double-coset label of the image does not depend on the witness
        choice; that independence is a verified property of the harness,
        not an assumption of this function.  ``rng`` randomizes the SNF
        pivot tie-breaks, deliberately varying the witnesses.
        """
        fac = cartan(g, rng=rng)
        self._require_transportable(fac.tau)
        a2 = self.transport_witness(fac.a)
        b2 = self.transport_witness(fac.b)
        return a2 @ self.spec2.n_of_tau(fac.tau) @ b2

    # -- labels and Hecke elements -----------------------------------------------------

    def transport_label(self, label: DoubleCosetLabel) -> DoubleCosetLabel:
        if label not in self._label_cache:
            g2 = self.transport_element(self.algebra.representative(label))
            self._label_cache[label] = self.algebra2.classify(g2)
        return self._label_cache[label]

    def transport_hecke(self, f: HeckeElement) -> HeckeElement:
        """Coefficient-preserving relabeling along the label bijection."""
        terms = {}
        for label, c in f.terms.items():
            target = self.transport_label(label)
            assert target not in terms, "label transport collided"
            terms[target] = c
        return HeckeElement(f.ring, terms, f.flagged)

    # -- windowed modules ---------------------------------------------------------------

    def transport_module(self, module: "WindowedModule") -> "WindowedModule":
        """Relabel the acting generators; the matrices are carried as-is."""
        gens = tuple(self.transport_label(l) for l in module.generators)
        return WindowedModule(
            ring=module.ring,
            rank=module.rank,
            generators=gens,
            matrices=dict(zip(gens, (module.matrices[l] for l in module.generators))),
        )


@dataclass(frozen=True)
class WindowedModule:
    """A finite-rank module over the windowed Hecke generators.

    One exact rank x rank matrix over the coefficient ring per generator
    label; for lattice checks the ring must be the rational field with its
    designated integral subring.
    """

    ring: object
    rank: int
    generators: tuple
    matrices: dict = field(compare=False)

    def __post_init__(self):
        for label in self.generators:
            mat = self.matrices[label]
            assert len(mat) == self.rank and all(len(row) == self.rank for row in mat)

    def matrix(self, label):
        return self.matrices[label]


def check_lattice_stability(module: WindowedModule, lattice_basis) -> bool:
    """Does the designated basis span a stable integral lattice?

    True iff every generator matrix, rewritten in the given basis, has all
    entries in the integral subring of the coefficient ring.  Raises
    SingularBasis for a non-invertible basis.
    """
    ring = module.ring
    if not isinstance(ring, RationalField):
        raise MixedRings("lattice checks need rational coefficients")
    d = module.rank
    basis = [[Fraction(x) for x in row] for row in lattice_basis]
    if len(basis) != d or any(len(row) != d for row in basis):
        raise SingularBasis("basis has the wrong shape")
    inv = _fraction_inverse(basis)
    if inv is None:
        raise SingularBasis("basis matrix is singular")
    for label in module.generators:
        mat = [[Fraction(x) for x in row] for row in module.matrix(label)]
        conj = _fraction_matmul(_fraction_matmul(inv, mat), basis)
        for row in conj:
            for x in row:
                if not ring.is_integral(x):
                    return False
    return True


def _fraction_matmul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return [
        [sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)]
        for i in range(n)
    ]


def _fraction_inverse(A):
    n = len(A)
    work = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
            for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col] != 0), None)
        if piv is None:
            return None
        work[col], work[piv] = work[piv], work[col]
        inv = 1 / work[col][col]
        work[col] = [x * inv for x in work[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return [row[n:] for row in work]


# ---------------------------------------------------------------------------
# the verification harness
# ---------------------------------------------------------------------------


@dataclass
class TauReport:
    tau: tuple
    orbit_count: int
    orbit_count_2: int
    gamma_size: int
    gamma_size_2: int
    gamma_mapped: bool
    degree: int
    degree_2: int

    def ok(self) -> bool:
        return (
            self.orbit_count == self.orbit_count_2
            and self.gamma_size == self.gamma_size_2
            and self.gamma_mapped
            and self.degree == self.degree_2
        )


@dataclass
class VerificationReport:
    """Outcome of the windowed structure-constant comparison."""

    config: dict
    basis_size: int
    pairs_checked: int
    pairs_equal: int
    counterexamples: list
    tau_reports: list
    labels_injective: bool
    degrees_preserved: bool
    min_sufficient_n_observed: int

    @property
    def success(self) -> bool:
        return (
            self.pairs_checked == self.pairs_equal
            and not self.counterexamples
            and self.labels_injective
            and self.degrees_preserved
            and all(t.ok() for t in self.tau_reports)
        )

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "basis_size": self.basis_size,
            "pairs_checked": self.pairs_checked,
            "pairs_equal": self.pairs_equal,
            "counterexamples": self.counterexamples,
            "tau_tables": [
                {
                    "tau": list(t.tau),
                    "orbit_count": [t.orbit_count, t.orbit_count_2],
                    "gamma_size": [t.gamma_size, t.gamma_size_2],
                    "gamma_mapped": t.gamma_mapped,
                    "degree": [t.degree, t.degree_2],
                }
                for t in self.tau_reports
            ],
            "labels_injective": self.labels_injective,
            "degrees_preserved": self.degrees_preserved,
            "min_sufficient_N_observed": self.min_sufficient_n_observed,
            "success": self.success,
        }


def verify_algebra_map(ctx: TransportContext) -> VerificationReport:
    """Certify the transport on the window: exact structure constants.

    For every ordered pair of basis labels with |tau| <= B the structure
    constants are computed on both sides and compared through the label
    bijection.  Requires N >= m + 4B so that the product supports remain
    transportable; smaller N raises InsufficientCloseness (the guard, not
    a counterexample to the theorem).
    """
    B = ctx.window
    required = ctx.m + 4 * B
    if ctx.N < required:
        raise InsufficientCloseness(
            f"windowed verification at B={B} needs N >= {required}, have N={ctx.N}"
        )
    A, A2 = ctx.algebra, ctx.algebra2

    basis = A.labels_in_window(B)
    transported = {l: ctx.transport_label(l) for l in basis}
    labels_injective = len(set(transported.values())) == len(basis)

    # per-tau structure: orbit counts, stabilizer transport, degrees
    tau_reports = []
    max_norm_touched = max((l.tau.norm for l in basis), default=0)
    for tau in sorted({l.tau for l in basis}, key=lambda t: t.sort_key()):
        tab = A.orbit_table(tau)
        tab2 = A2.orbit_table(tau)
        gamma_image = {
            (ctx.map_residue_matrix(x), ctx.map_residue_matrix(y)) for x, y in tab.gamma
        }
        tau_reports.append(
            TauReport(
                tau=tau.coords,
                orbit_count=tab.orbit_count,
                orbit_count_2=tab2.orbit_count,
                gamma_size=tab.gamma_size,
                gamma_size_2=tab2.gamma_size,
                gamma_mapped=gamma_image == set(tab2.gamma),
                degree=A.degree(tau),
                degree_2=A2.degree(tau),
            )
        )

    degrees_preserved = all(
        A.degree(l) == A2.degree(transported[l]) for l in basis
    )

    pairs_checked = 0
    pairs_equal = 0
    counterexamples = []
    for l1 in basis:
        for l2 in basis:
            sc = A.structure_constants(l1, l2)
            lhs = {}
            for lab, c in sc.items():
                max_norm_touched = max(max_norm_touched, lab.tau.norm)
                lhs[ctx.transport_label(lab)] = c
            rhs = A2.structure_constants(transported[l1], transported[l2])
            pairs_checked += 1
            if lhs == rhs:
                pairs_equal += 1
            else:
                counterexamples.append(
                    {
                        "g": l1.serialize(),
                        "h": l2.serialize(),
                        "lhs_transported": _serialize_constants(lhs),
                        "rhs": _serialize_constants(rhs),
                    }
                )

    report = VerificationReport(
        config={
            "pair": str(ctx.pair),
            "group": f"{ctx.spec.family}{ctx.spec.n}",
            "m": ctx.m,
            "N": ctx.N,
            "window": B,
        },
        basis_size=len(basis),
        pairs_checked=pairs_checked,
        pairs_equal=pairs_equal,
        counterexamples=counterexamples,
        tau_reports=tau_reports,
        labels_injective=labels_injective,
        degrees_preserved=degrees_preserved,
        min_sufficient_n_observed=ctx.m + 2 * max_norm_touched,
    )
    return report


def _serialize_constants(constants) -> list:
    return [
        {"x": lab.serialize(), "c": c}
        for lab, c in sorted(constants.items(), key=lambda kv: kv[0].sort_key())
    ]


def structure_constants_csv(ctx: TransportContext) -> str:
    """Matched windowed structure constants as CSV text."""
    A = ctx.algebra
    lines = ["g,h,x,c,x_transported,c_transported"]
    basis = A.labels_in_window(ctx.window)
    for l1 in basis:
        for l2 in basis:
            sc = A.structure_constants(l1, l2)
            sc2 = ctx.algebra2.structure_constants(
                ctx.transport_label(l1), ctx.transport_label(l2)
            )
            for lab, c in sorted(sc.items(), key=lambda kv: kv[0].sort_key()):
                lab2 = ctx.transport_label(lab)
                lines.append(
                    f'"{l1}","{l2}","{lab}",{c},"{lab2}",{sc2.get(lab2, 0)}'
                )
    return "\n".join(lines) + "\n"
