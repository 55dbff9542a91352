"""Exact constant-coefficient exterior algebra on a flat polarized complex torus.

Forms are stored against the ordered basis dz_I ^ dzbar_J with I, J strictly
increasing index tuples; every sign in the module is derived from that single
ordering convention.  All arithmetic is exact (Gaussian rationals), which is
what makes the Lefschetz / bilinear-relation / norm-identity checks usable as
zero-tolerance oracles.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, Tuple

from .exact import I as IMAG
from .exact import ONE, QQi, ZERO, det_exact, inv_exact, lstsq_exact_unique

IndexPair = Tuple[Tuple[int, ...], Tuple[int, ...]]


class DegreeError(ValueError):
    pass


def _merge_sign(left: Tuple[int, ...], right: Tuple[int, ...]):
    """Sign of sorting the concatenation of two increasing disjoint tuples.

    Returns (sign, merged) or (0, ()) when the tuples intersect.
    """
    if set(left) & set(right):
        return 0, ()
    inversions = 0
    for x in left:
        inversions += sum(1 for y in right if y < x)
    merged = tuple(sorted(left + right))
    return (-1) ** inversions, merged


class ConstantForm:
    """A (p,q)-form with constant Gaussian-rational coefficients on C^n."""

    __slots__ = ("n", "p", "q", "coeffs")

    def __init__(self, n: int, p: int, q: int, coeffs: Dict[IndexPair, QQi] | None = None):
        if not (0 <= p <= n and 0 <= q <= n):
            raise DegreeError(f"bidegree ({p},{q}) out of range for n={n}")
        self.n = n
        self.p = p
        self.q = q
        clean: Dict[IndexPair, QQi] = {}
        for (i_idx, j_idx), c in (coeffs or {}).items():
            if len(i_idx) != p or len(j_idx) != q:
                raise ValueError("coefficient key arity does not match bidegree")
            if tuple(sorted(set(i_idx))) != tuple(i_idx) or tuple(sorted(set(j_idx))) != tuple(j_idx):
                raise ValueError("index tuples must be strictly increasing")
            if c:
                clean[(tuple(i_idx), tuple(j_idx))] = c
        self.coeffs = clean

    # -- basic algebra -------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "ConstantForm") -> "ConstantForm":
        if (self.n, self.p, self.q) != (other.n, other.p, other.q):
            raise DegreeError("can only add forms of identical bidegree")
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, ZERO) + c
        return ConstantForm(self.n, self.p, self.q, out)

    def __sub__(self, other: "ConstantForm") -> "ConstantForm":
        return self + other.scale(QQi.of(-1))

    def scale(self, c: QQi | int | Fraction) -> "ConstantForm":
        if not isinstance(c, QQi):
            c = QQi.of(c)
        return ConstantForm(self.n, self.p, self.q,
                            {k: v * c for k, v in self.coeffs.items()})

    def conj(self) -> "ConstantForm":
        sign = (-1) ** (self.p * self.q)
        out: Dict[IndexPair, QQi] = {}
        for (i_idx, j_idx), c in self.coeffs.items():
            out[(j_idx, i_idx)] = c.conj() * sign
        return ConstantForm(self.n, self.q, self.p, out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConstantForm):
            return NotImplemented
        return (self.n, self.p, self.q) == (other.n, other.p, other.q) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        if self.is_zero():
            return f"ConstantForm(n={self.n}, ({self.p},{self.q}), 0)"
        parts = [f"{c!r}*dz{list(i)}dzbar{list(j)}" for (i, j), c in sorted(self.coeffs.items())]
        return f"ConstantForm(n={self.n}, ({self.p},{self.q}), " + " + ".join(parts) + ")"


def zero_form(n: int, p: int, q: int) -> ConstantForm:
    return ConstantForm(n, p, q, {})


def unit_form(n: int) -> ConstantForm:
    return ConstantForm(n, 0, 0, {((), ()): ONE})


def basis_form(n: int, i_idx: Iterable[int], j_idx: Iterable[int], coeff: QQi = ONE) -> ConstantForm:
    i_t, j_t = tuple(i_idx), tuple(j_idx)
    return ConstantForm(n, len(i_t), len(j_t), {(i_t, j_t): coeff})


def wedge(a: ConstantForm, b: ConstantForm) -> ConstantForm:
    if a.n != b.n:
        raise ValueError("forms live on tori of different dimension")
    n = a.n
    p, q = a.p + b.p, a.q + b.q
    if p + q > 2 * n:
        raise DegreeError("degree exceeds 2n")
    if p > n or q > n:
        # more than n holomorphic (or antiholomorphic) factors always repeat
        return zero_form(n, min(p, n), min(q, n))
    out: Dict[IndexPair, QQi] = {}
    for (i1, j1), c1 in a.coeffs.items():
        for (i2, j2), c2 in b.coeffs.items():
            s_i, mi = _merge_sign(i1, i2)
            if s_i == 0:
                continue
            s_j, mj = _merge_sign(j1, j2)
            if s_j == 0:
                continue
            # moving the |i2| holomorphic factors of b left past the |j1|
            # antiholomorphic factors of a
            sign = s_i * s_j * ((-1) ** (len(j1) * len(i2)))
            key = (mi, mj)
            out[key] = out.get(key, ZERO) + c1 * c2 * sign
    return ConstantForm(n, p, q, out)


class KahlerModel:
    """Flat torus of complex dimension n with a constant polarization form.

    ``top_integral`` is the exact value assigned to the canonically ordered
    orientation form dz_1^...^dz_n^dzbar_1^...^dzbar_n; it is fixed so the
    standard form omega = i * sum dz_j ^ dzbar_j has integral(omega^n / n!) = 1.
    """

    def __init__(self, n: int, kahler_form: ConstantForm):
        if kahler_form.n != n or (kahler_form.p, kahler_form.q) != (1, 1):
            raise ValueError("kahler_form must be a (1,1)-form on the same torus")
        self.n = n
        self.kahler_form = kahler_form
        self.top_integral = ((-IMAG) ** n) * ((-1) ** (n * (n - 1) // 2))
        self._herm = self._coefficient_matrix()
        self._check_positive()
        self._herm_inv = inv_exact(self._herm)
        self._decomp_cache: dict = {}
        self._volume = None

    def _coefficient_matrix(self) -> list[list[QQi]]:
        h = [[ZERO for _ in range(self.n)] for _ in range(self.n)]
        for (i_idx, j_idx), c in self.kahler_form.coeffs.items():
            h[i_idx[0]][j_idx[0]] = c / IMAG
        return h

    def _check_positive(self) -> None:
        h = self._herm
        for i in range(self.n):
            for j in range(self.n):
                if h[i][j].conj() != h[j][i]:
                    raise ValueError("kahler form coefficient matrix is not Hermitian")
        for k in range(1, self.n + 1):
            minor = det_exact([row[:k] for row in h[:k]])
            if not minor.is_real() or minor.re <= 0:
                raise ValueError("kahler form is not positive definite")

    def volume(self) -> QQi:
        """Exact total volume integral(omega^n / n!)."""
        if self._volume is None:
            top = unit_form(self.n)
            for _ in range(self.n):
                top = wedge(top, self.kahler_form)
            self._volume = integral(top, self) / math.factorial(self.n)
        return self._volume


def standard_kahler(n: int) -> KahlerModel:
    coeffs = {(((j,), (j,))): IMAG for j in range(n)}
    return KahlerModel(n, ConstantForm(n, 1, 1, coeffs))


def integral(form: ConstantForm, model: KahlerModel) -> QQi:
    """Exact integral over the torus; zero unless the form has top bidegree."""
    n = model.n
    if (form.p, form.q) != (n, n):
        return ZERO
    key = (tuple(range(n)), tuple(range(n)))
    return form.coeffs.get(key, ZERO) * model.top_integral


def lefschetz_L(a: ConstantForm, model: KahlerModel) -> ConstantForm:
    return wedge(a, model.kahler_form)


def lefschetz_power(a: ConstantForm, model: KahlerModel, k: int) -> ConstantForm:
    out = a
    for _ in range(k):
        if out.p + 1 > model.n or out.q + 1 > model.n:
            return zero_form(model.n, min(out.p + 1, model.n), min(out.q + 1, model.n))
        out = lefschetz_L(out, model)
    return out


def is_primitive(a: ConstantForm, model: KahlerModel) -> bool:
    """Primitivity: L^(n-k+1) annihilates a, for k = total degree."""
    k = a.p + a.q
    power = model.n - k + 1
    if power <= 0:
        return a.is_zero()
    probe = a
    for _ in range(power):
        if probe.p + 1 > model.n or probe.q + 1 > model.n:
            return True
        probe = lefschetz_L(probe, model)
    return probe.is_zero()


def polarization_Q(a: ConstantForm, b: ConstantForm, model: KahlerModel) -> QQi:
    """Q(a,b) = integral of a ^ b ^ omega^(n-k) for total degree k <= n."""
    ka, kb = a.p + a.q, b.p + b.q
    if ka != kb:
        raise DegreeError("polarization form needs equal total degrees")
    if ka > model.n:
        raise DegreeError("polarization form defined for total degree <= n")
    prod = wedge(a, b)
    for _ in range(model.n - ka):
        prod = wedge(prod, model.kahler_form)
    return integral(prod, model)


def hodge_sign(p: int, q: int) -> QQi:
    """Sign/phase making the polarization pairing positive on primitive (p,q).

    Single convention table for the whole package: i^(p-q) * (-1)^(k(k-1)/2),
    k = p + q.  Validated by exact positivity tests on the torus models.
    """
    k = p + q
    return (IMAG ** ((p - q) % 4)) * ((-1) ** (k * (k - 1) // 2))


def hodge_inner(a: ConstantForm, b: ConstantForm, model: KahlerModel) -> QQi:
    if (a.p, a.q) != (b.p, b.q):
        raise DegreeError("inner product needs equal bidegrees")
    if not (is_primitive(a, model) and is_primitive(b, model)):
        raise ValueError("inner product defined on primitive forms")
    return hodge_sign(a.p, a.q) * polarization_Q(a, b.conj(), model)


def _basis_keys(n: int, p: int, q: int) -> list[IndexPair]:
    return [(i, j) for i in combinations(range(n), p) for j in combinations(range(n), q)]


def _form_to_vector(a: ConstantForm, keys: list[IndexPair]) -> list[QQi]:
    return [a.coeffs.get(k, ZERO) for k in keys]


class PrimitiveDecomposition:
    """a = sum_j L^j phi_j with each phi_j primitive of bidegree (p-j, q-j)."""

    def __init__(self, components: list[ConstantForm]):
        self.components = components

    def reconstruct(self, model: KahlerModel) -> ConstantForm:
        total = None
        for j, phi in enumerate(self.components):
            term = lefschetz_power(phi, model, j)
            total = term if total is None else total + term
        return total


def lefschetz_decompose(a: ConstantForm, model: KahlerModel,
                        extend_hard_lefschetz: bool = False) -> PrimitiveDecomposition:
    """Exact Lefschetz decomposition, solved as one stacked linear system.

    The unknowns are the coefficients of the primitive pieces; the equations
    are exact reconstruction plus the primitivity kernel conditions.  The
    minimum contract is total degree <= n; degrees above n are available
    behind the ``extend_hard_lefschetz`` flag.
    """
    n, p, q = model.n, a.p, a.q
    k = p + q
    if k > n and not extend_hard_lefschetz:
        raise DegreeError("total degree above n requires extend_hard_lefschetz=True")
    if k > 2 * n:
        raise DegreeError("degree exceeds 2n")
    r = min(p, q)
    # L^j is injective on primitive (p-j, q-j) forms only for j >= k - n
    j_min = max(0, k - n)
    target_keys = _basis_keys(n, p, q)
    cache_key = (p, q)
    if cache_key not in model._decomp_cache:
        col_slices = []          # (j, component basis keys, column offset)
        lift_cols: list[list[QQi]] = []
        prim_cols: list[list[QQi]] = []
        block_sizes = []         # (number of primitivity rows, block width)
        offset = 0
        for j in range(j_min, r + 1):
            comp_keys = _basis_keys(n, p - j, q - j)
            col_slices.append((j, comp_keys, offset))
            prim_power = n - (k - 2 * j) + 1
            prim_p, prim_q = p - j + prim_power, q - j + prim_power
            prim_keys = _basis_keys(n, prim_p, prim_q) if (prim_p <= n and prim_q <= n) else []
            for key in comp_keys:
                e = basis_form(n, key[0], key[1])
                lift_cols.append(_form_to_vector(lefschetz_power(e, model, j), target_keys))
                if prim_keys:
                    prim_cols.append(_form_to_vector(lefschetz_power(e, model, prim_power), prim_keys))
                else:
                    prim_cols.append([])
            block_sizes.append((len(prim_keys), len(comp_keys)))
            offset += len(comp_keys)
        ncols = offset
        rows = [[lift_cols[c][ri] for c in range(ncols)] for ri in range(len(target_keys))]
        # primitivity constraints are block diagonal per component j
        col0 = 0
        for (nprim, ncomp) in block_sizes:
            for ri in range(nprim):
                row = [ZERO] * ncols
                for c in range(ncomp):
                    row[col0 + c] = prim_cols[col0 + c][ri]
                rows.append(row)
            col0 += ncomp
        model._decomp_cache[cache_key] = (rows, col_slices, len(target_keys))
    rows, col_slices, n_target = model._decomp_cache[cache_key]
    rhs = _form_to_vector(a, target_keys) + [ZERO] * (len(rows) - n_target)
    try:
        sol = lstsq_exact_unique(rows, rhs)
    except ValueError as exc:
        raise ValueError("model not polarized") from exc
    comps = []
    for j in range(0, min(p, q) + 1):
        match = next(((jj, keys, off) for (jj, keys, off) in col_slices if jj == j), None)
        if match is None:
            comps.append(zero_form(n, p - j, q - j))
            continue
        _, keys, off = match
        coeffs = {key: sol[off + idx] for idx, key in enumerate(keys) if sol[off + idx]}
        comps.append(ConstantForm(n, p - j, q - j, coeffs))
    return PrimitiveDecomposition(comps)


def pointwise_inner(a: ConstantForm, b: ConstantForm, model: KahlerModel) -> QQi:
    """Pointwise Hermitian inner product of constant forms in the flat metric."""
    if (a.p, a.q) != (b.p, b.q):
        raise DegreeError("pointwise inner product needs equal bidegrees")
    ginv = model._herm_inv
    out = ZERO

    def sub_det(rows: Tuple[int, ...], cols: Tuple[int, ...]) -> QQi:
        # entry (r,c) is <dz_rows[r], dz_cols[c]> = (H^-1)[cols[c]][rows[r]]
        m = [[ginv[cv][rv] for cv in cols] for rv in rows]
        return det_exact(m) if m else ONE

    for (i1, j1), c1 in a.coeffs.items():
        for (i2, j2), c2 in b.coeffs.items():
            hol = sub_det(i1, i2)
            if not hol:
                continue
            antihol = sub_det(j1, j2).conj()
            if not antihol:
                continue
            out = out + c1 * c2.conj() * hol * antihol
    return out


def norm_identity_residual(phi: ConstantForm, model: KahlerModel) -> QQi:
    """Residual of the flat-metric norm identity for the polarization pairing.

    Both sides are computed exactly; the residual is identically zero.  The
    left side is the sign-table pairing of phi with itself, the right side the
    alternating factorial-weighted sum of primitive-component L2 norms.
    """
    n, p, q = model.n, phi.p, phi.q
    if p < q or p + q > n:
        raise DegreeError("bidegree out of range")
    k = p + q
    lhs = hodge_sign(p, q) * polarization_Q(phi, phi.conj(), model)
    decomp = lefschetz_decompose(phi, model)
    vol = model.volume()
    rhs = ZERO
    for j, comp in enumerate(decomp.components):
        norm_sq = pointwise_inner(comp, comp, model)
        weight = math.factorial(n - k + 2 * j)
        rhs = rhs + QQi.of((-1) ** j * weight) * norm_sq * vol
    return lhs - rhs
