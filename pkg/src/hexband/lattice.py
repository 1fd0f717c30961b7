"""Lattice-level model description: stack variants, parameters, quasimomentum.

A unit cell of the hexagonal lattice carries two vertices per layer (the a/b
sublattices).  Vertex coupling constants alpha are the Robin data divided by
the slope normalization of the edge eigenbasis; the inter-layer coupling t0
(or the pair t_a, t_b) enters quadratically.  The structure function

    F(theta) = 1 + exp(i theta1) + exp(i theta2)

collects the three in-cell/neighbor-cell hops of one sublattice; |F|^2 spans
[0, 9] with zeros exactly at +-(2pi/3, -2pi/3) and maximum at (0, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import GridError, InputError, VariantError

ADMISSIBILITY_TOL = 1e-12  # |eta| <= 1 + tol counts as spectrally admissible


# ============================================================
#  Stack variants
# ============================================================

class StackVariant(Enum):
    """Supported layer stackings."""

    MONOLAYER = "monolayer"
    BILAYER_AA = "bilayer_aa"
    BILAYER_AA_TWO_PARAM = "bilayer_aa_two_param"
    BILAYER_AA_PRIME = "bilayer_aa_prime"
    HETERO_BILAYER = "hetero_bilayer"
    TRILAYER_HBN_G_HBN = "trilayer_hbn_g_hbn"
    TRILAYER_G_HBN_G = "trilayer_g_hbn_g"
    MAGNETIC_MONOLAYER = "magnetic_monolayer"


_TWO_LAYER = {
    StackVariant.BILAYER_AA,
    StackVariant.BILAYER_AA_TWO_PARAM,
    StackVariant.BILAYER_AA_PRIME,
    StackVariant.HETERO_BILAYER,
}
_THREE_LAYER = {StackVariant.TRILAYER_HBN_G_HBN, StackVariant.TRILAYER_G_HBN_G}


# ============================================================
#  Parameter records
# ============================================================

@dataclass(frozen=True)
class Quasimomentum:
    """A point theta = (theta1, theta2) of the Brillouin torus [-pi, pi]^2."""

    theta1: float
    theta2: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.theta1, self.theta2)


@dataclass(frozen=True)
class VertexParams:
    """Robin vertex constants per sublattice (alpha_c for a third species)."""

    alpha_a: float = 0.0
    alpha_b: float = 0.0
    alpha_c: float = 0.0


@dataclass(frozen=True)
class CouplingParams:
    """Inter-layer coupling strengths.

    ``t0`` is the single coupling used by most variants, constrained to (0, 1].
    The two-parameter bilayer uses ``t_a``/``t_b`` instead (same constraint).
    """

    t0: float | None = None
    t_a: float | None = None
    t_b: float | None = None

    def __post_init__(self) -> None:
        for name, value in (("t0", self.t0), ("t_a", self.t_a), ("t_b", self.t_b)):
            if value is None:
                continue
            if not (0.0 < value <= 1.0):
                raise InputError(
                    f"coupling {name}={value!r} outside the open-closed range (0, 1]"
                )


@dataclass(frozen=True)
class FluxSpec:
    """Rational magnetic flux p/q per hexagon (in units of 2 pi).

    Stored gcd-reduced.  ``p`` must be positive; the Robin magnetic lattice
    supports q in {1, 2}, while the discrete normalized operator accepts any q.
    """

    p: int
    q: int

    def __post_init__(self) -> None:
        if not (isinstance(self.p, int) and isinstance(self.q, int)):
            raise InputError("flux p and q must be integers")
        if self.p <= 0 or self.q <= 0:
            raise InputError(f"flux p/q = {self.p}/{self.q} must be positive")
        g = math.gcd(self.p, self.q)
        if g != 1:
            object.__setattr__(self, "p", self.p // g)
            object.__setattr__(self, "q", self.q // g)

    @property
    def phase(self) -> float:
        """Per-row Peierls phase 2 pi p / q."""
        return 2.0 * math.pi * self.p / self.q


@dataclass(frozen=True)
class StackConfig:
    """Full description of one periodic structure."""

    variant: StackVariant
    vertex: VertexParams = field(default_factory=VertexParams)
    coupling: CouplingParams | None = None
    flux: FluxSpec | None = None

    def __post_init__(self) -> None:
        v = self.variant
        if v is StackVariant.MONOLAYER:
            if self.coupling is not None:
                raise InputError("monolayer takes no inter-layer coupling")
        elif v in _TWO_LAYER or v in _THREE_LAYER:
            if self.coupling is None:
                raise InputError(f"{v.value} requires coupling parameters")
            if v is StackVariant.BILAYER_AA_TWO_PARAM:
                if self.coupling.t_a is None or self.coupling.t_b is None:
                    raise InputError("two-parameter bilayer requires t_a and t_b")
            elif self.coupling.t0 is None:
                raise InputError(f"{v.value} requires t0")
        if v is StackVariant.MAGNETIC_MONOLAYER:
            if self.flux is None:
                raise InputError("magnetic monolayer requires a flux specification")
            if self.flux.q not in (1, 2):
                raise InputError(
                    f"Robin magnetic lattice supports q in {{1, 2}}, got q={self.flux.q}"
                )
        elif self.flux is not None:
            raise InputError(f"{v.value} does not take a flux specification")

    @property
    def dim(self) -> int:
        """Number of dispersion branches (vertices per period cell)."""
        v = self.variant
        if v is StackVariant.MONOLAYER:
            return 2
        if v in _TWO_LAYER:
            return 4
        if v in _THREE_LAYER:
            return 6
        if v is StackVariant.MAGNETIC_MONOLAYER:
            assert self.flux is not None
            return 2 * self.flux.q
        raise VariantError(f"unknown variant {v!r}")


# ============================================================
#  Structure function and sampling grids
# ============================================================

def structure_function(theta1, theta2):
    """F(theta) = 1 + exp(i theta1) + exp(i theta2) (vectorized)."""
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    return 1.0 + np.exp(1j * t1) + np.exp(1j * t2)


def structure_function_squared(theta1, theta2):
    """|F|^2 via the product identity 1 + 8 cos((t1-t2)/2) cos(t1/2) cos(t2/2)."""
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    return 1.0 + 8.0 * np.cos((t1 - t2) / 2.0) * np.cos(t1 / 2.0) * np.cos(t2 / 2.0)


def diagonal_slice(n: int) -> np.ndarray:
    """n equally spaced theta1 values on [-pi, pi] (inclusive) for theta2 = -theta1.

    On this slice the structure function is real: F = 1 + 2 cos(theta1).
    """
    if not isinstance(n, int) or n < 2:
        raise GridError(f"diagonal slice needs an integer n >= 2, got {n!r}")
    return np.linspace(-np.pi, np.pi, n)


def full_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Meshgrid (indexing='ij') of an inclusive n x n grid over [-pi, pi]^2."""
    if not isinstance(n, int) or n < 2:
        raise GridError(f"full grid needs an integer n >= 2, got {n!r}")
    axis = np.linspace(-np.pi, np.pi, n)
    return np.meshgrid(axis, axis, indexing="ij")
