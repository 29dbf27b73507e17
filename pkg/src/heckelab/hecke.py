"""The level-K_m Hecke algebra of a split matrix group.

Double cosets K_m g K_m are classified by a label (tau, [x], [y]) meaning
g lies in K_m x n_tau y^-1 K_m, with the residue pair ([x], [y]) canonical
(minimal) in its orbit under the stabilizer Gamma_tau of K_m n_tau K_m
inside (K/K_m)^2.  Convolution uses the normalization mu(K_m) = 1, under
which all structure constants are non-negative integers

    t_g * t_h = sum_x c_x t_x,   c_x = #{i : alpha_i^-1 x in K_m h K_m},

where alpha_i runs over the left cosets K_m g K_m = |_| alpha_i K_m.
Coefficients over any supported ring are obtained by base change from Z.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache

from .errors import MixedRings
from .matgrp import (
    DEFAULT_BUDGET,
    CartanDatum,
    GroupElement,
    GroupSpec,
    cartan,
    dominant_window,
    enumerate_residue_matrices,
    iter_kernel,
    kernel_count,
    lift_group,
    reduce_group,
    zero_tau,
    _check_budget,
    _det_rows,
)
from .rings import ZZ


class DoubleCosetLabel:
    """Canonical identifier of a double coset K_m g K_m.

    ``pair = (x, y)`` are residue matrices mod pi^m; the labelled coset is
    that of x~ n_tau y~^-1 for canonical lifts x~, y~.  Labels compare and
    sort by (tau, serialized pair).
    """

    __slots__ = ("tau", "pair")

    def __init__(self, tau: CartanDatum, pair):
        self.tau = tau
        self.pair = tuple(pair)

    def sort_key(self):
        return (self.tau.coords, self.pair[0].sort_key(), self.pair[1].sort_key())

    def __eq__(self, other):
        return (
            isinstance(other, DoubleCosetLabel)
            and other.tau == self.tau
            and other.pair == self.pair
        )

    def __hash__(self):
        return hash((self.tau.coords, self.pair))

    def __str__(self):
        if self.tau.is_zero() and self.pair[0] == self.pair[1]:
            return f"[tau={self.tau}, k={self.pair[0]}]"
        return f"[tau={self.tau}, x={self.pair[0]}, y={self.pair[1]}]"

    __repr__ = __str__

    def serialize(self):
        return {
            "tau": list(self.tau.coords),
            "pair": [self.pair[0].serialize(), self.pair[1].serialize()],
        }


@dataclass(frozen=True)
class OrbitTable:
    """The orbit/stabilizer data of K_m n_tau K_m under (K/K_m)^2.

    ``gamma`` holds the stabilizing pairs as residue-matrix pairs, and
    ``labels`` one canonical representative label per orbit; the counting
    identity |X_tau| * |Gamma_tau| = |K/K_m|^2 always holds.
    """

    tau: CartanDatum
    labels: tuple
    gamma: tuple

    @property
    def orbit_count(self) -> int:
        return len(self.labels)

    @property
    def gamma_size(self) -> int:
        return len(self.gamma)


class HeckeElement:
    """A finitely supported map DoubleCosetLabel -> R, no explicit zeros."""

    __slots__ = ("ring", "terms", "flagged")

    def __init__(self, ring, terms, flagged=()):
        self.ring = ring
        self.terms = {l: c for l, c in terms.items() if not ring.is_zero(c)}
        self.flagged = tuple(flagged)

    def support(self):
        return sorted(self.terms, key=lambda l: l.sort_key())

    def coefficient(self, label):
        return self.terms.get(label, self.ring.zero)

    def __add__(self, other: "HeckeElement") -> "HeckeElement":
        if other.ring != self.ring:
            raise MixedRings(f"{self.ring} vs {other.ring}")
        out = dict(self.terms)
        for l, c in other.terms.items():
            out[l] = self.ring.add(out.get(l, self.ring.zero), c)
        return HeckeElement(self.ring, out)

    def __neg__(self):
        return HeckeElement(self.ring, {l: self.ring.neg(c) for l, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c) -> "HeckeElement":
        return HeckeElement(self.ring, {l: self.ring.mul(c, v) for l, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return (
            isinstance(other, HeckeElement)
            and other.ring == self.ring
            and other.terms == self.terms
        )

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def max_norm(self) -> int:
        """Largest cocharacter norm appearing in the support."""
        return max((l.tau.norm for l in self.terms), default=0)

    def outside_window(self, bound: int):
        return tuple(l for l in self.support() if l.tau.norm > bound)

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(
            f"{self.ring.coeff_str(c)}*t{l}" for l, c in sorted(
                self.terms.items(), key=lambda lc: lc[0].sort_key()
            )
        )

    __repr__ = __str__

    def serialize(self):
        return {
            "ring": self.ring.name,
            "terms": [
                dict(label.serialize(), coeff=self.ring.coeff_str(c))
                for label, c in sorted(self.terms.items(), key=lambda lc: lc[0].sort_key())
            ],
        }


def base_change(f: HeckeElement, target) -> HeckeElement:
    """Map an integral Hecke element into another coefficient ring."""
    if f.ring != ZZ:
        raise MixedRings("base change starts from Z coefficients")
    return HeckeElement(target, {l: target.from_int(c) for l, c in f.terms.items()}, f.flagged)


class HeckeAlgebra:
    """All level-m Hecke operations for one group spec, with caching.

    The heavy objects (residue classes, orbit tables, left-coset systems of
    the n_tau, structure constants of label pairs) are computed once and
    reused; every public operation is otherwise pure.
    """

    def __init__(self, spec: GroupSpec, m: int, budget: int = DEFAULT_BUDGET):
        if m < 0:
            raise ValueError("level m must be >= 0")
        self.spec = spec
        self.m = m
        self.budget = budget
        self._q = None
        self._q_index = None
        self._q_lift = None
        self._q_mul = None
        self._orbit_tables = {}
        self._canonical = {}
        self._ntau_cosets_cache = {}
        self._rep_cache = {}
        self._sc_cache = {}
        self._label_transport_hint = None
        self._pipow_cache = {}
        self._warned_rings = set()

    # -- residue classes K/K_m --------------------------------------------------

    @property
    def residue_classes(self):
        if self._q is None:
            self._q = enumerate_residue_matrices(self.spec, self.m, self.budget)
            self._q_index = {mat: i for i, mat in enumerate(self._q)}
        return self._q

    @property
    def class_index(self):
        self.residue_classes
        return self._q_index

    def class_lift(self, i: int) -> GroupElement:
        if self._q_lift is None:
            self._q_lift = [None] * len(self.residue_classes)
        if self._q_lift[i] is None:
            self._q_lift[i] = lift_group(self.residue_classes[i], self.spec)
        return self._q_lift[i]

    def _mul_index(self):
        if self._q_mul is None:
            q = self.residue_classes
            idx = self._q_index
            self._q_mul = [
                [idx[a @ b] for b in q]
                for a in q
            ]
        return self._q_mul

    def _pipow(self, k: int):
        if k not in self._pipow_cache:
            self._pipow_cache[k] = self.spec.model.pi_pow(k)
        return self._pipow_cache[k]

    # -- double coset equality ----------------------------------------------------

    def dc_equal(self, g: GroupElement, h: GroupElement) -> bool:
        """Exact test of K_m g K_m = K_m h K_m.

        Cartan types must match; equality then reduces to membership of h in
        one of the left cosets of K_m g K_m, which are conjugated translates
        of the cached coset system of n_tau.
        """
        fg = cartan(g)
        fh = cartan(h)
        if fg.tau != fh.tau:
            return False
        u = fg.a.inverse() @ h @ fg.b.inverse()
        # h in K_m a alpha b K_m  <=>  a^-1 h b^-1 in K_m alpha K_m; sweep alphas
        for _, alpha_inv in self._ntau_cosets(fg.tau):
            if (alpha_inv @ u).in_km(self.m):
                return True
        return False

    # -- left cosets ---------------------------------------------------------------

    def left_cosets(self, g: GroupElement):
        """Representatives alpha_i with K_m g K_m = |_| alpha_i K_m."""
        fac = cartan(g)
        return [fac.a @ alpha @ fac.b for alpha, _ in self._ntau_cosets(fac.tau)]

    def degree(self, label_or_tau) -> int:
        """deg t_g = [K_m : K_m meet g K_m g^-1], the left-coset count.

        By normality of K_m in K the degree only depends on tau.
        """
        tau = label_or_tau.tau if isinstance(label_or_tau, DoubleCosetLabel) else label_or_tau
        return len(self._ntau_cosets(tau))

    def _ntau_cosets(self, tau: CartanDatum):
        """Left-coset system of K_m n_tau K_m: list of (alpha, alpha^-1).

        Sweeps k n_tau over representatives of K_m/K_(m+c) with c equal to
        the cocharacter spread a_1 - a_n; the valuation bound
        v(n_tau^-1 (k~^-1 k) n_tau - 1) >= m + c - spread makes this sweep
        both sound and complete.  Dedup keys on row-normalized digits, with
        exact in-bucket certification.  Over the e = 1 mixed model the
        sweep runs on plain integers mod p^(m+c), which is what makes the
        large-spread cells affordable.
        """
        if tau in self._ntau_cosets_cache:
            return self._ntau_cosets_cache[tau]
        spec, m = self.spec, self.m
        if tau.is_zero():
            ident = spec.identity()
            out = [(ident, ident)]
            self._ntau_cosets_cache[tau] = out
            return out
        model = spec.model
        if model.kind == "MixedChar" and model.e == 1 and m >= 1:
            reps = self._ntau_cosets_zp(tau)
        else:
            reps = self._ntau_cosets_generic(tau)
        self._ntau_cosets_cache[tau] = reps
        return reps

    def _ntau_cosets_generic(self, tau: CartanDatum):
        spec, m = self.spec, self.m
        c = tau.spread
        n_tau = spec.n_of_tau(tau)
        reps = []
        buckets = {}
        for k in iter_kernel(spec, m, c, self.budget):
            key = self._coset_key(k, tau)
            bucket = buckets.setdefault(key, [])
            hit = False
            for k_prev_inv in bucket:
                if self._same_ntau_coset(k_prev_inv @ k, tau):
                    hit = True
                    break
            if not hit:
                bucket.append(k.inverse())
                alpha = k @ n_tau
                reps.append((alpha, n_tau.inverse() @ k.inverse()))
        return reps

    def _ntau_cosets_zp(self, tau: CartanDatum):
        """Integer fast path of the sweep for o = Z_(p) (mixed, e = 1).

        Kernel classes, dedup keys and in-bucket tests all run on integer
        matrices mod p^(m+c); only the surviving representatives are lifted
        back to exact group elements.
        """
        spec, m = self.spec, self.m
        p = spec.model.p
        n = spec.n
        a = tau.coords
        c = tau.spread
        _check_budget(kernel_count(spec, m, c), self.budget)
        mod = p ** (m + c)
        pm = p**m
        pc = p**c
        sl = spec.family == "SL"
        reps_int = []
        buckets = {}
        free = n * n - 1 if sl else n * n
        for flat in itertools.product(range(pc), repeat=free):
            k_rows = [[0] * n for _ in range(n)]
            it = iter(flat)
            for i in range(n):
                for j in range(n):
                    if sl and (i, j) == (n - 1, n - 1):
                        continue
                    k_rows[i][j] = ((1 if i == j else 0) + pm * next(it)) % mod
            if sl:
                k_rows[n - 1][n - 1] = self._zp_solve_last(k_rows, p, m, c)
            key = _zp_coset_key(k_rows, a, p, m)
            bucket = buckets.setdefault(key, [])
            hit = False
            for k_prev_inv in bucket:
                z = _int_matmul(k_prev_inv, k_rows, mod)
                if _zp_same_coset(z, a, p, m):
                    hit = True
                    break
            if not hit:
                bucket.append(_int_inverse(k_rows, mod))
                reps_int.append([row[:] for row in k_rows])
        # lift survivors exactly
        n_tau = spec.n_of_tau(tau)
        n_tau_inv = n_tau.inverse()
        out = []
        for k_rows in reps_int:
            k = self._zp_lift(k_rows)
            out.append((k @ n_tau, n_tau_inv @ k.inverse()))
        return out

    def _zp_solve_last(self, k_rows, p, m, c):
        """Complete the last diagonal entry so det = 1 mod p^(m+c)."""
        n = self.spec.n
        mod = p ** (m + c)
        pm = p**m
        pc = p**c
        rows0 = [row[:] for row in k_rows]
        rows0[n - 1][n - 1] = 1  # entry with y_nn = 0
        alpha = _int_det(rows0, mod)
        cof = _int_det([row[: n - 1] for row in rows0[: n - 1]], mod) if n > 1 else 1
        u = ((alpha - 1) // pm) % pc
        y = (-u * pow(cof % pc, -1, pc)) % pc
        return (1 + pm * y) % mod

    def _zp_lift(self, k_rows) -> GroupElement:
        """Exact element from integer residues; SL determinant-corrected."""
        spec = self.spec
        model = spec.model
        rows = [[model.from_int(x) for x in row] for row in k_rows]
        if spec.family != "SL":
            return GroupElement(spec, tuple(tuple(r) for r in rows))
        g = GroupElement(GroupSpec("GL", spec.n, model), tuple(tuple(r) for r in rows))
        dt = g.det()
        if dt == model.one():
            return GroupElement(spec, g.rows, _det=model.one())
        dt_inv = dt.inverse()
        rows = [list(r) for r in g.rows]
        for i in range(spec.n):
            rows[i][0] = rows[i][0] * dt_inv
        return GroupElement(spec, tuple(tuple(r) for r in rows))

    def _coset_key(self, k: GroupElement, tau: CartanDatum):
        """Invariant of the coset (k n_tau) K_m: rows truncated at pi^(rho_i + m).

        Row valuation floors are coset-invariant and so are the m leading
        digits of each entry above its row floor; collisions across distinct
        cosets are possible and resolved exactly inside the bucket.
        """
        m = self.m
        a = tau.coords
        n = self.spec.n
        key = []
        for i in range(n):
            vals = [k.rows[i][j].val() + a[j] for j in range(n)]
            rho = min(vals)
            row_key = [rho]
            for j in range(n):
                entry = k.rows[i][j] * self._pipow(a[j] - rho)
                row_key.append(entry.residue(m).coords if m > 0 else ())
            key.append(tuple(row_key))
        return tuple(key)

    def _same_ntau_coset(self, z: GroupElement, tau: CartanDatum) -> bool:
        """For z in K_m: is n_tau^-1 z n_tau in K_m (conjugate entrywise test)."""
        a = tau.coords
        m = self.m
        one = self.spec.model.one()
        for i in range(self.spec.n):
            for j in range(self.spec.n):
                delta = z.rows[i][j] - one if i == j else z.rows[i][j]
                if delta.val() < m + a[i] - a[j]:
                    return False
        return True

    # -- orbits, stabilizers, classification ----------------------------------------

    def orbit_table(self, tau: CartanDatum) -> OrbitTable:
        if tau not in self._orbit_tables:
            self._build_orbit_table(tau)
        return self._orbit_tables[tau]

    def _build_orbit_table(self, tau: CartanDatum):
        q = self.residue_classes
        idx = self._q_index
        size = len(q)
        gamma_idx = set()
        for x, y in self._stabilizer_witnesses(tau):
            gamma_idx.add((idx[reduce_group(x, self.m)], idx[reduce_group(y, self.m)]))
        gamma_idx = sorted(gamma_idx)
        mul = self._mul_index()
        canonical = {}
        labels = []
        for xi in range(size):
            mrow = mul[xi]
            for yi in range(size):
                if (xi, yi) in canonical:
                    continue
                rep = (xi, yi)
                label = DoubleCosetLabel(tau, (q[xi], q[yi]))
                labels.append(label)
                nrow = mul[yi]
                for s, t in gamma_idx:
                    canonical[(mrow[s], nrow[t])] = rep
        assert len(labels) * len(gamma_idx) == size * size, "orbit-stabilizer mismatch"
        table = OrbitTable(
            tau,
            tuple(labels),
            tuple((q[s], q[t]) for s, t in gamma_idx),
        )
        self._orbit_tables[tau] = table
        self._canonical[tau] = canonical

    def _stabilizer_witnesses(self, tau: CartanDatum):
        """Exact pairs (x, y) in K x K with x n_tau y^-1 in K_m n_tau K_m.

        Every stabilizing pair arises as ([n_tau y n_tau^-1], [y]) for y in
        H_tau = K meet n_tau^-1 K n_tau, so it suffices to enumerate y over
        canonical representatives with entry (i,j) ranging over
        pi^max(a_j - a_i, 0) * (lifts of o/pi^m).
        """
        spec, m = self.spec, self.m
        model = spec.model
        n = spec.n
        if m == 0:
            ident = spec.identity()
            yield (ident, ident)
            return
        a = tau.coords
        ring_m = model.residue_ring(m)
        pool = [w.lift() for w in ring_m.elements()]
        shifts = {}
        entry_values = []
        for i in range(n):
            for j in range(n):
                cshift = max(a[j] - a[i], 0)
                if cshift not in shifts:
                    pic = self._pipow(cshift)
                    shifts[cshift] = [pic * w for w in pool]
                entry_values.append(shifts[cshift])
        one = model.one()
        gl_spec = spec if spec.family == "GL" else GroupSpec("GL", n, model)
        for combo in itertools.product(*entry_values):
            rows = [list(combo[i * n : (i + 1) * n]) for i in range(n)]
            det = _det_rows(rows, model)
            if det.val() != 0:
                continue
            if spec.family == "SL":
                if det.residue(m) != ring_m.one():
                    continue
                det_inv = det.inverse()
                for i in range(n):
                    rows[i][0] = rows[i][0] * det_inv
            y = GroupElement(spec, tuple(tuple(r) for r in rows))
            x_rows = tuple(
                tuple(y.rows[i][j] * self._pipow(a[i] - a[j]) for j in range(n))
                for i in range(n)
            )
            x = GroupElement(spec if spec.family == "SL" else gl_spec, x_rows)
            yield (x, y)

    def classify(self, g: GroupElement) -> DoubleCosetLabel:
        """The canonical label of K_m g K_m; classify(g) == classify(h) iff
        dc_equal(g, h)."""
        fac = cartan(g)
        x = reduce_group(fac.a, self.m)
        y = reduce_group(fac.b, self.m).inverse()
        self.orbit_table(fac.tau)
        idx = self._q_index
        ci, cj = self._canonical[fac.tau][(idx[x], idx[y])]
        q = self.residue_classes
        return DoubleCosetLabel(fac.tau, (q[ci], q[cj]))

    def representative(self, label: DoubleCosetLabel) -> GroupElement:
        """The canonical element x~ n_tau y~^-1 of a label."""
        if label not in self._rep_cache:
            xi = self.class_index[label.pair[0]]
            yi = self.class_index[label.pair[1]]
            n_tau = self.spec.n_of_tau(label.tau)
            self._rep_cache[label] = (
                self.class_lift(xi) @ n_tau @ self.class_lift(yi).inverse()
            )
        return self._rep_cache[label]

    def label_of_tau(self, tau: CartanDatum) -> DoubleCosetLabel:
        return self.classify(self.spec.n_of_tau(tau))

    def labels_in_window(self, bound: int):
        """All basis labels with cocharacter norm <= bound, sorted."""
        out = []
        for tau in dominant_window(self.spec.family, self.spec.n, bound):
            out.extend(self.orbit_table(tau).labels)
        return sorted(out, key=lambda l: l.sort_key())

    # -- Hecke elements -----------------------------------------------------------

    def _check_ring(self, ring):
        rc = ring.residue_char
        if rc is not None and rc == self.spec.model.p and ring not in self._warned_rings:
            self._warned_rings.add(ring)
            warnings.warn(
                f"coefficient characteristic {rc} equals the residue characteristic; "
                "the pro-order of K_m is not invertible in this ring",
                stacklevel=3,
            )

    def t(self, g: GroupElement, ring=ZZ) -> HeckeElement:
        """The characteristic function of K_m g K_m."""
        self._check_ring(ring)
        return HeckeElement(ring, {self.classify(g): ring.one})

    def t_of_label(self, label: DoubleCosetLabel, ring=ZZ) -> HeckeElement:
        self._check_ring(ring)
        return HeckeElement(ring, {label: ring.one})

    def unit(self, ring=ZZ) -> HeckeElement:
        return self.t(self.spec.identity(), ring)

    def structure_constants(self, l1: DoubleCosetLabel, l2: DoubleCosetLabel):
        """Integer constants c_x with t_(l1) * t_(l2) = sum c_x t_x.

        The support is covered by the pairwise products alpha_i beta_j of
        the two left-coset systems (every point of the product set lies in
        some alpha_i beta_j K_m); each constant is then the membership
        count c_x = #{i : alpha_i^-1 x in K_m h K_m}.
        """
        key = (l1, l2)
        if key in self._sc_cache:
            return self._sc_cache[key]
        g_cosets = self._label_cosets(l1)
        h_cosets = self._label_cosets(l2)
        h_inv = [beta.inverse() for beta in h_cosets]
        support = {}
        for alpha in g_cosets:
            for beta in h_cosets:
                cand = alpha @ beta
                lab = self.classify(cand)
                support.setdefault(lab, cand)
        g_inv = [alpha.inverse() for alpha in g_cosets]
        out = {}
        for lab, x in sorted(support.items(), key=lambda kv: kv[0].sort_key()):
            count = 0
            for alpha_inv in g_inv:
                u = alpha_inv @ x
                for beta_inv in h_inv:
                    if (beta_inv @ u).in_km(self.m):
                        count += 1
                        break
            assert count > 0
            out[lab] = count
        self._sc_cache[key] = out
        return out

    def structure_constants_by_tally(self, l1: DoubleCosetLabel, l2: DoubleCosetLabel):
        """Independent route: classify all alpha_i beta_j and divide each
        label tally by its degree (counting-measure conservation).  Used as
        a cross-check oracle against structure_constants."""
        tally = {}
        for alpha in self._label_cosets(l1):
            for beta in self._label_cosets(l2):
                lab = self.classify(alpha @ beta)
                tally[lab] = tally.get(lab, 0) + 1
        out = {}
        for lab, cnt in tally.items():
            deg = self.degree(lab)
            assert cnt % deg == 0, "tally not divisible by degree"
            out[lab] = cnt // deg
        return out

    def _label_cosets(self, label: DoubleCosetLabel):
        xi = self.class_index[label.pair[0]]
        yi = self.class_index[label.pair[1]]
        x_lift = self.class_lift(xi)
        y_inv = self.class_lift(yi).inverse()
        return [x_lift @ alpha @ y_inv for alpha, _ in self._ntau_cosets(label.tau)]

    def convolve(self, f1: HeckeElement, f2: HeckeElement, window=None) -> HeckeElement:
        """Convolution product; integral structure constants mapped into R.

        When ``window`` is given, support labels outside the window are kept
        but reported in ``flagged`` on the result, so harnesses can restrict
        to certified-safe combinations.
        """
        if f1.ring != f2.ring:
            raise MixedRings(f"{f1.ring} vs {f2.ring}")
        ring = f1.ring
        self._check_ring(ring)
        acc = {}
        for l1, c1 in f1.terms.items():
            for l2, c2 in f2.terms.items():
                cc = ring.mul(c1, c2)
                if ring.is_zero(cc):
                    continue
                for lab, n in self.structure_constants(l1, l2).items():
                    add = ring.mul(cc, ring.from_int(n))
                    acc[lab] = ring.add(acc.get(lab, ring.zero), add)
        flagged = ()
        if window is not None:
            flagged = tuple(
                l for l in sorted(acc, key=lambda l: l.sort_key())
                if l.tau.norm > window and not ring.is_zero(acc[l])
            )
        return HeckeElement(ring, acc, flagged)

    # -- generators ------------------------------------------------------------------

    def generator_cocharacters(self, bound: int):
        """The semigroup generators Sigma of the dominant cone, plus 0.

        GL_n: the fundamental coweights (1,..,1,0,..,0) together with
        (-1,..,-1), the inverse of the central one (the dominant monoid of
        GL has units, so exclusion arguments do not apply).  SL_n: the
        monoid is positively graded, so the indecomposable window elements
        form the Hilbert basis; summands of a dominant sum stay inside the
        window of the sum, which makes the bounded search complete.
        """
        n = self.spec.n
        if self.spec.family == "GL":
            gens = [CartanDatum((1,) * i + (0,) * (n - i)) for i in range(1, n + 1)]
            gens.append(CartanDatum((-1,) * n))
            return [zero_tau(n)] + [t for t in gens if t.norm <= bound]
        nonzero = [t for t in dominant_window("SL", n, bound) if not t.is_zero()]
        sums = set()
        for t1 in nonzero:
            for t2 in nonzero:
                sums.add(tuple(x + y for x, y in zip(t1.coords, t2.coords)))
        return [zero_tau(n)] + [t for t in nonzero if t.coords not in sums]

    def generators(self, bound: int, ring=ZZ):
        """Generating set {t_(n_tau) : tau in Sigma} union {t_k : k in K/K_m}."""
        self._check_ring(ring)
        seen = {}
        for tau in self.generator_cocharacters(bound):
            lab = self.label_of_tau(tau)
            seen[lab] = self.t_of_label(lab, ring)
        for i in range(len(self.residue_classes)):
            lab = self.classify(self.class_lift(i))
            if lab not in seen:
                seen[lab] = self.t_of_label(lab, ring)
        return [seen[l] for l in sorted(seen, key=lambda l: l.sort_key())]


# -- integer matrix helpers for the Z_(p) fast path --------------------------------


def _int_matmul(A, B, mod):
    n = len(A)
    return [
        [sum(A[i][k] * B[k][j] for k in range(n)) % mod for j in range(n)]
        for i in range(n)
    ]


def _int_det(rows, mod):
    n = len(rows)
    if n == 1:
        return rows[0][0] % mod
    if n == 2:
        return (rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]) % mod
    acc = 0
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [[rows[i][jj] for jj in range(n) if jj != j] for i in range(1, n)]
        term = rows[0][j] * _int_det(minor, mod)
        acc = acc - term if j % 2 else acc + term
    return acc % mod


def _int_inverse(A, mod):
    n = len(A)
    det_inv = pow(_int_det(A, mod), -1, mod)
    if n == 1:
        return [[det_inv % mod]]
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[A[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = _int_det(minor, mod)
            val = (cof * det_inv) % mod
            out[j][i] = val if (i + j) % 2 == 0 else (-val) % mod
    return out


def _vp_int_capped(x, p, cap):
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


def _zp_coset_key(k_rows, a, p, m):
    """Rowwise coset-invariant key of (k n_tau) K_m in integer coordinates."""
    n = len(k_rows)
    cap = 10 * (m + (a[0] - a[-1]) + 1)  # larger than any relevant valuation
    pm = p**m
    key = []
    for i in range(n):
        vals = [_vp_int_capped(k_rows[i][j], p, cap) + a[j] for j in range(n)]
        rho = min(vals)
        row_key = [rho]
        for j in range(n):
            s = rho - a[j]
            x = k_rows[i][j]
            digit = (x * p ** (-s)) % pm if s <= 0 else (x // p**s) % pm
            row_key.append(digit)
        key.append(tuple(row_key))
    return tuple(key)


def _zp_same_coset(z, a, p, m):
    """Is n_tau^-1 z n_tau = 1 mod pi^m, for z in K_m given mod p^(m+spread)."""
    n = len(z)
    for i in range(n):
        for j in range(n):
            t = m + a[i] - a[j]
            if t <= 0:
                continue
            delta = z[i][j] - (1 if i == j else 0)
            if delta % p**t != 0:
                return False
    return True


@lru_cache(maxsize=None)
def get_algebra(spec: GroupSpec, m: int, budget: int = DEFAULT_BUDGET) -> HeckeAlgebra:
    return HeckeAlgebra(spec, m, budget)


# -- free-function forms of the operation contracts ------------------------------


def dc_equal(g: GroupElement, h: GroupElement, m: int, budget: int = DEFAULT_BUDGET) -> bool:
    return get_algebra(g.group, m, budget).dc_equal(g, h)


def left_cosets(g: GroupElement, m: int, budget: int = DEFAULT_BUDGET):
    return get_algebra(g.group, m, budget).left_cosets(g)


def classify(g: GroupElement, m: int, budget: int = DEFAULT_BUDGET) -> DoubleCosetLabel:
    return get_algebra(g.group, m, budget).classify(g)


def orbit_table(tau: CartanDatum, spec: GroupSpec, m: int, budget: int = DEFAULT_BUDGET):
    return get_algebra(spec, m, budget).orbit_table(tau)


def convolve(f1, f2, algebra: HeckeAlgebra, window=None):
    return algebra.convolve(f1, f2, window)


def generators(algebra: HeckeAlgebra, bound: int, ring=ZZ):
    return algebra.generators(bound, ring)


# -- reference implementations (slow, used as oracles in the test suite) ----------


def structure_constants_csv(algebra: HeckeAlgebra, bound: int) -> str:
    """All windowed structure constants as CSV (g-label, h-label, x-label, c)."""
    lines = ["g,h,x,c"]
    basis = algebra.labels_in_window(bound)
    for l1 in basis:
        for l2 in basis:
            sc = algebra.structure_constants(l1, l2)
            for lab, c in sorted(sc.items(), key=lambda kv: kv[0].sort_key()):
                lines.append(f'"{l1}","{l2}","{lab}",{c}')
    return "\n".join(lines) + "\n"


def dc_equal_kernel_sweep(g: GroupElement, h: GroupElement, m: int,
                          budget: int = DEFAULT_BUDGET) -> bool:
    """Literal bounded-kernel search: exists k in K_m/K_(m+2|tau|) with
    h^-1 k g in K_m.  Reference oracle for dc_equal."""
    fg = cartan(g)
    fh = cartan(h)
    if fg.tau != fh.tau:
        return False
    c = 2 * fg.tau.norm
    h_inv = h.inverse()
    for k in iter_kernel(g.group, m, c, budget):
        if (h_inv @ k @ g).in_km(m):
            return True
    return False


def left_cosets_kernel_sweep(g: GroupElement, m: int, budget: int = DEFAULT_BUDGET):
    """Literal sweep of k g over K_m/K_(m+2|tau|) with pairwise dedup.
    Reference oracle for left_cosets."""
    fac = cartan(g)
    c = 2 * fac.tau.norm
    reps = []
    for k in iter_kernel(g.group, m, c, budget):
        cand = k @ g
        if not any((r.inverse() @ cand).in_km(m) for r in reps):
            reps.append(cand)
    return reps


def gamma_by_sweep(spec: GroupSpec, tau: CartanDatum, m: int,
                   budget: int = DEFAULT_BUDGET):
    """Gamma_tau computed directly from its definition via dc_equal.
    Reference oracle for the stabilizer in orbit_table."""
    algebra = get_algebra(spec, m, budget)
    n_tau = spec.n_of_tau(tau)
    out = []
    q = algebra.residue_classes
    for i, xm in enumerate(q):
        x = algebra.class_lift(i)
        for j in range(len(q)):
            y = algebra.class_lift(j)
            if algebra.dc_equal(x @ n_tau @ y.inverse(), n_tau):
                out.append((xm, q[j]))
    return out
