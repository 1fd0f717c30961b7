"""Floquet matrix assembly, characteristic polynomials, and dispersion roots.

For each quasimomentum theta the vertex conditions reduce to a finite linear
system M(eta, theta) u = 0 with

    M(eta, theta) = A(theta) - eta * diag(T_1, ..., T_n),

where A is Hermitian, T_i are the per-vertex diagonal scales (3 for a bare
degree-3 vertex, 3 + t0^2 with an inter-layer edge, 3 + 2 t0^2 with two), and
eta = d(lambda)/2 is the Hill-discriminant variable.  A value eta belongs to
the dispersion surface iff det M = 0; it maps back to physical spectrum only
when |eta| <= 1 (+ tolerance).

Two independent routes to the roots are provided and never mixed:

* ``char_poly`` expands det(A - eta D) symbolically in eta by cofactor
  expansion over polynomial-valued entries (no eigensolver involved);
* ``numeric_roots`` diagonalizes D^{-1/2} A D^{-1/2} (no polynomial involved).

``closed_form_roots`` implements the per-variant analytic root families and
verifies every value against the characteristic polynomial at runtime.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import EngineError, NoClosedFormError, VariantError
from .lattice import (
    ADMISSIBILITY_TOL,
    StackConfig,
    StackVariant,
    structure_function,
)

RESIDUAL_TOL = 1e-9      # |p(root)| / |leading coefficient| gate
_DIAGONAL_TOL = 1e-12    # |Im F| bound for diagonal-slice closed forms
_PAIR_TOL = 1e-12        # |alpha_a + alpha_b| bound for the constrained forms


# ============================================================
#  Data records
# ============================================================

@dataclass(frozen=True)
class FloquetMatrix:
    """One assembled vertex-condition system at a fixed quasimomentum."""

    dim: int
    diag_scale: np.ndarray        # (dim,) positive diagonal scales T_i
    affine: np.ndarray            # (dim, dim) Hermitian A(theta)
    config: StackConfig
    theta: tuple[float, float]

    def at(self, eta: float) -> np.ndarray:
        """M(eta) = A - eta * diag(T)."""
        return self.affine - eta * np.diag(self.diag_scale)


@dataclass(frozen=True)
class DispersionRoots:
    """eta roots at one quasimomentum, ascending, with branch bookkeeping."""

    values: np.ndarray                       # sorted ascending
    branch_labels: tuple[str, ...] = ()      # empty for numeric-only roots
    admissible: np.ndarray = field(default_factory=lambda: np.array([], bool))


def _make_roots(values, labels=()):
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    values = values[order]
    if labels:
        labels = tuple(labels[i] for i in order)
    admissible = np.abs(values) <= 1.0 + ADMISSIBILITY_TOL
    return DispersionRoots(values=values, branch_labels=tuple(labels),
                           admissible=admissible)


# ============================================================
#  Assembly
# ============================================================

def _hermitian_guard(a: np.ndarray) -> np.ndarray:
    dev = np.max(np.abs(a - a.conj().T))
    scale = max(1.0, float(np.max(np.abs(a))))
    if dev > 1e-13 * scale:
        raise EngineError(f"assembled matrix is not Hermitian (deviation {dev:g})")
    return a


def assemble(config: StackConfig, theta1: float, theta2: float) -> FloquetMatrix:
    """Build the Floquet matrix of a non-magnetic stack at theta.

    Sublattice order is (a1, b1, a2, b2, ...) layer by layer.  For the hetero
    bilayer and the trilayers, ``alpha_a``/``alpha_b`` always decorate the
    two-species layer(s) and ``alpha_c`` the plain layer's vertices.
    """
    v = config.variant
    if v is StackVariant.MAGNETIC_MONOLAYER:
        raise VariantError(
            "magnetic monolayer is assembled by the magnetic module, not here"
        )
    F = complex(structure_function(theta1, theta2))
    Fc = np.conj(F)
    aa = config.vertex.alpha_a
    ab = config.vertex.alpha_b
    ac = config.vertex.alpha_c

    if v is StackVariant.MONOLAYER:
        affine = np.array([[-aa, Fc], [F, -ab]], dtype=complex)
        scale = np.array([3.0, 3.0])
    elif v is StackVariant.BILAYER_AA:
        c = config.coupling.t0 ** 2
        T = 3.0 + c
        affine = np.array([
            [-aa, Fc, c, 0.0],
            [F, -ab, 0.0, c],
            [c, 0.0, -aa, Fc],
            [0.0, c, F, -ab],
        ], dtype=complex)
        scale = np.full(4, T)
    elif v is StackVariant.BILAYER_AA_TWO_PARAM:
        ca = config.coupling.t_a ** 2
        cb = config.coupling.t_b ** 2
        affine = np.array([
            [-aa, Fc, ca, 0.0],
            [F, -ab, 0.0, cb],
            [ca, 0.0, -aa, Fc],
            [0.0, cb, F, -ab],
        ], dtype=complex)
        scale = np.array([3.0 + ca, 3.0 + cb, 3.0 + ca, 3.0 + cb])
    elif v is StackVariant.BILAYER_AA_PRIME:
        c = config.coupling.t0 ** 2
        T = 3.0 + c
        affine = np.array([
            [-aa, Fc, 0.0, c],
            [F, -ab, c, 0.0],
            [0.0, c, -aa, Fc],
            [c, 0.0, F, -ab],
        ], dtype=complex)
        scale = np.full(4, T)
    elif v is StackVariant.HETERO_BILAYER:
        c = config.coupling.t0 ** 2
        T = 3.0 + c
        affine = np.array([
            [-aa, Fc, 0.0, c],
            [F, -ab, c, 0.0],
            [0.0, c, -ac, Fc],
            [c, 0.0, F, -ac],
        ], dtype=complex)
        scale = np.full(4, T)
    elif v in (StackVariant.TRILAYER_HBN_G_HBN, StackVariant.TRILAYER_G_HBN_G):
        c = config.coupling.t0 ** 2
        T1 = 3.0 + c
        T2 = 3.0 + 2.0 * c
        if v is StackVariant.TRILAYER_HBN_G_HBN:
            oa, ob = aa, ab      # outer decorated layers
            ma, mb = ac, ac      # plain middle layer
        else:
            oa, ob = ac, ac      # plain outer layers
            ma, mb = aa, ab      # decorated middle layer
        affine = np.array([
            [-oa, Fc, 0.0, c, 0.0, 0.0],
            [F, -ob, c, 0.0, 0.0, 0.0],
            [0.0, c, -ma, Fc, 0.0, c],
            [c, 0.0, F, -mb, c, 0.0],
            [0.0, 0.0, 0.0, c, -oa, Fc],
            [0.0, 0.0, c, 0.0, F, -ob],
        ], dtype=complex)
        scale = np.array([T1, T1, T2, T2, T1, T1])
    else:
        raise VariantError(f"unknown stack variant {v!r}")

    return FloquetMatrix(dim=len(scale), diag_scale=scale,
                         affine=_hermitian_guard(affine), config=config,
                         theta=(float(theta1), float(theta2)))


# ============================================================
#  Characteristic polynomial (cofactor route)
# ============================================================

def char_poly(fm: FloquetMatrix) -> np.ndarray:
    """Ascending real coefficients of det(A - eta D), degree = dim.

    Computed by Laplace expansion with polynomial-valued entries (degree <= 1
    each); the leading coefficient is prod(T_i) up to the sign (-1)^dim, which
    is +1 for the even dimensions that occur here.
    """
    n = fm.dim
    entries = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                entries[i][j] = np.array(
                    [fm.affine[i, i], -fm.diag_scale[i]], dtype=complex)
            else:
                entries[i][j] = np.array([fm.affine[i, j]], dtype=complex)

    def minor_det(rows: tuple[int, ...], cols: tuple[int, ...]) -> np.ndarray:
        if len(rows) == 1:
            return entries[rows[0]][cols[0]]
        r = rows[0]
        total = np.zeros(1, dtype=complex)
        for k, cidx in enumerate(cols):
            e = entries[r][cidx]
            if len(e) == 1 and e[0] == 0.0:
                continue
            sub = minor_det(rows[1:], cols[:k] + cols[k + 1:])
            term = np.convolve(e, sub)
            if k % 2 == 1:
                term = -term
            if len(term) > len(total):
                term[: len(total)] += total
                total = term
            else:
                total[: len(term)] += term
        return total

    coeffs = minor_det(tuple(range(n)), tuple(range(n)))
    coeffs = np.pad(coeffs, (0, n + 1 - len(coeffs)))
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    if np.max(np.abs(coeffs.imag)) > 1e-12 * scale:
        raise EngineError("characteristic polynomial has a non-real coefficient")
    return coeffs.real


# ============================================================
#  Numeric roots (eigenvalue route)
# ============================================================

def numeric_roots(fm: FloquetMatrix) -> DispersionRoots:
    """Solve det(A - eta D) = 0 via the Hermitian eigenproblem of D^{-1/2} A D^{-1/2}."""
    dinv = 1.0 / np.sqrt(fm.diag_scale)
    sym = fm.affine * np.outer(dinv, dinv)
    values = np.linalg.eigvalsh(sym)
    return _make_roots(values)


def match_branches(closed: DispersionRoots, numeric: DispersionRoots) -> tuple[str, ...]:
    """Label numeric roots by the nearest closed-form value's branch label."""
    if not closed.branch_labels:
        return ()
    labels = []
    for v in numeric.values:
        idx = int(np.argmin(np.abs(closed.values - v)))
        labels.append(closed.branch_labels[idx])
    return tuple(labels)


# ============================================================
#  Closed-form root families
# ============================================================

def _quadratic_roots(A: float, B: float, C: float) -> tuple[float, float]:
    """Real roots of A x^2 + B x + C, ascending."""
    disc = B * B - 4.0 * A * C
    if disc < 0.0:
        if disc > -1e-14 * max(B * B, abs(4.0 * A * C), 1.0):
            disc = 0.0
        else:
            raise EngineError("closed-form quadratic has complex roots")
    s = np.sqrt(disc)
    return ((-B - s) / (2.0 * A), (-B + s) / (2.0 * A))


def _require_diagonal(F: complex) -> float:
    if abs(F.imag) > _DIAGONAL_TOL:
        raise NoClosedFormError(
            "closed forms for this variant hold on the diagonal slice only "
            f"(Im F = {F.imag:g})"
        )
    return F.real


def _require_opposite_pair(aa: float, ab: float, ac: float) -> None:
    if abs(aa + ab) > _PAIR_TOL or abs(ac) > _PAIR_TOL:
        raise NoClosedFormError(
            "closed forms for this variant require alpha_b = -alpha_a and "
            f"alpha_c = 0 (got alpha_a={aa!r}, alpha_b={ab!r}, alpha_c={ac!r})"
        )


def closed_form_roots(config: StackConfig, theta1: float, theta2: float) -> DispersionRoots:
    """Analytic eta roots with branch labels, residual-checked.

    Raises ``NoClosedFormError`` when the variant/parameter combination has no
    analytic root family (hetero bilayer and trilayers need the diagonal slice
    with alpha_b = -alpha_a and alpha_c = 0).
    """
    v = config.variant
    F = complex(structure_function(theta1, theta2))
    fsq = abs(F) ** 2
    aa = config.vertex.alpha_a
    ab = config.vertex.alpha_b
    ac = config.vertex.alpha_c
    pairs: list[tuple[float, str]] = []

    if v is StackVariant.MONOLAYER:
        disc = np.sqrt((aa - ab) ** 2 + 4.0 * fsq)
        pairs = [((-(aa + ab) - disc) / 6.0, "u-"),
                 ((-(aa + ab) + disc) / 6.0, "u+")]
    elif v is StackVariant.BILAYER_AA:
        c = config.coupling.t0 ** 2
        T = 3.0 + c
        disc = np.sqrt((aa - ab) ** 2 + 4.0 * fsq)
        for s, stag in ((1.0, "s+"), (-1.0, "s-")):
            for u, utag in ((1.0, "u+"), (-1.0, "u-")):
                pairs.append(((-(aa + ab) + 2.0 * s * c + u * disc) / (2.0 * T),
                              stag + utag))
    elif v is StackVariant.BILAYER_AA_TWO_PARAM:
        ca = config.coupling.t_a ** 2
        cb = config.coupling.t_b ** 2
        Ta, Tb = 3.0 + ca, 3.0 + cb
        for s, stag in ((1.0, "s+"), (-1.0, "s-")):
            lo, hi = _quadratic_roots(
                Ta * Tb,
                (aa - s * ca) * Tb + (ab - s * cb) * Ta,
                (aa - s * ca) * (ab - s * cb) - fsq,
            )
            pairs += [(lo, stag + "u-"), (hi, stag + "u+")]
    elif v is StackVariant.BILAYER_AA_PRIME:
        c = config.coupling.t0 ** 2
        T = 3.0 + c
        for s, stag in ((1.0, "s+"), (-1.0, "s-")):
            shifted = abs(F + s * c) ** 2
            disc = np.sqrt((aa - ab) ** 2 + 4.0 * shifted)
            pairs += [((-(aa + ab) - disc) / (2.0 * T), stag + "u-"),
                      ((-(aa + ab) + disc) / (2.0 * T), stag + "u+")]
    elif v is StackVariant.HETERO_BILAYER:
        f = _require_diagonal(F)
        _require_opposite_pair(aa, ab, ac)
        c = config.coupling.t0 ** 2
        T = 3.0 + c
        F2 = f * f
        a2 = aa * aa
        inner = np.sqrt(16.0 * c * c * F2 + 4.0 * a2 * c * c + a2 * a2)
        r_out = np.sqrt((2.0 * F2 + 2.0 * c * c + a2 + inner) / 2.0) / T
        r_in = np.sqrt(max(0.0, (2.0 * F2 + 2.0 * c * c + a2 - inner) / 2.0)) / T
        pairs = [(-r_out, "out-"), (-r_in, "in-"), (r_in, "in+"), (r_out, "out+")]
    elif v in (StackVariant.TRILAYER_HBN_G_HBN, StackVariant.TRILAYER_G_HBN_G):
        f = _require_diagonal(F)
        _require_opposite_pair(aa, ab, ac)
        c = config.coupling.t0 ** 2
        T1, T2 = 3.0 + c, 3.0 + 2.0 * c
        F2 = f * f
        a2 = aa * aa
        if v is StackVariant.TRILAYER_HBN_G_HBN:
            p2 = np.sqrt(a2 + F2) / T1
            mid = a2 * T2 * T2
        else:
            p2 = abs(f) / T1
            mid = a2 * T1 * T1
        pairs = [(-p2, "p2-"), (p2, "p2+")]
        A = T1 * T1 * T2 * T2
        B = -(F2 * (T1 * T1 + T2 * T2) + mid + 4.0 * c * c * T1 * T2)
        C = (F2 - 2.0 * c * c) ** 2 + a2 * F2
        e2_in, e2_out = _quadratic_roots(A, B, C)
        r_in = np.sqrt(max(0.0, e2_in))
        r_out = np.sqrt(max(0.0, e2_out))
        pairs += [(-r_out, "pn_out-"), (-r_in, "pn_in-"),
                  (r_in, "pn_in+"), (r_out, "pn_out+")]
    elif v is StackVariant.MAGNETIC_MONOLAYER:
        raise VariantError(
            "magnetic monolayer roots come from the magnetic module, not here"
        )
    else:
        raise VariantError(f"unknown stack variant {v!r}")

    roots = _make_roots([p[0] for p in pairs], [p[1] for p in pairs])
    _check_residuals(assemble(config, theta1, theta2), roots.values)
    return roots


def _check_residuals(fm: FloquetMatrix, values: np.ndarray) -> None:
    coeffs = char_poly(fm)
    lead = abs(coeffs[-1])
    residuals = np.abs(npoly.polyval(values, coeffs)) / lead
    worst = float(np.max(residuals)) if len(residuals) else 0.0
    if worst >= RESIDUAL_TOL:
        raise EngineError(
            f"closed-form root failed the residual gate: |p(r)|/lead = {worst:g}"
        )
