"""Galerkin system for ``a_j(u, v) = int u'v' + j int uv`` over the Faber-Schauder space H_m.

The form is affine in ``j``: ``a_j = S + j M`` with ``S`` the stiffness and ``M`` the mass
matrix of ``[g_3, ..., g_{m+2}]``. Both are cached per ``(m, normalization)`` in
:mod:`vicollage.state` so parameter sweeps reuse them.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import state
from .basis import Normalization, decompose, h10_basis
from .config import FLUX_TOL
from .errors import DomainError, SolverError
from .pwpoly import PiecewisePoly, derivative, integrate, l2_inner, polynomial

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProblemSpec:
    """Data of ``-u'' + j u = f`` on (0, 1) with ``u(0) = alpha``, ``u(1) = beta``."""

    alpha: float
    beta: float
    j: float
    f: PiecewisePoly

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "j"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.j <= 0:
            raise DomainError(f"j must be > 0 for a coercive form, got {self.j}")

    @property
    def lift(self) -> PiecewisePoly:
        """Affine lift ``alpha + (beta - alpha) x`` carrying the boundary data."""
        return polynomial((self.alpha, self.beta - self.alpha))


def _check_dim(m: int) -> None:
    if m < 1:
        raise DomainError(f"subspace dimension must be >= 1, got {m}")


def overlapping_pairs(m: int) -> Iterator[tuple[int, int]]:
    """Index pairs ``i <= k`` (0-based) whose basis supports overlap with positive measure.

    Hierarchical supports are nested or disjoint, so the partners of ``i`` are its
    descendants: at ``depth`` levels below, a contiguous run of ``2**depth`` indices.
    """
    for i in range(m):
        idx = decompose(i + 2)
        depth = 0
        while True:
            first = (1 << (idx.level + depth)) + (idx.offset << depth) - 1
            if first >= m:
                break
            for k in range(first, min(first + (1 << depth), m)):
                yield i, k
            depth += 1


def _build(m: int, norm: str) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``S`` and ``M`` from the hat geometry.

    Haar functions are orthogonal, so ``S`` is diagonal with ``c**2 * w``. A hat of width ``w``
    has peak ``c * w / 2``; on a strictly finer support the coarser hat is linear, so the
    product integrates to its value at the finer midpoint times the finer hat's area.
    """
    norm_ = Normalization(norm)
    idx = [decompose(i + 2) for i in range(m)]
    width = [Fraction(1, 2**d.level) for d in idx]
    scale = [norm_.scale(d.level) for d in idx]
    squared = [1 if norm_ is Normalization.FLAT else 2**d.level for d in idx]
    stiff = np.zeros((m, m))
    mass = np.zeros((m, m))
    for i, k in overlapping_pairs(m):
        if i == k:
            stiff[i, i] = float(squared[i] * width[i])
            mass[i, i] = float(squared[i] * width[i] ** 3 / 12)
            continue
        height = width[i] / 2 - abs(idx[k].midpoint - idx[i].midpoint)
        area = width[k] ** 2 / 4
        mass[i, k] = mass[k, i] = float(height * area) * scale[i] * scale[k]
    logger.debug("assembled stiffness and mass for m=%d (%s)", m, norm)
    return stiff, mass


def operators(m: int, norm: Normalization = Normalization.FLAT) -> tuple[np.ndarray, np.ndarray]:
    _check_dim(m)
    return state.cached_operators(m, Normalization(norm).value, _build)


def stiffness(m: int, norm: Normalization = Normalization.FLAT) -> np.ndarray:
    return operators(m, norm)[0]


def mass(m: int, norm: Normalization = Normalization.FLAT) -> np.ndarray:
    return operators(m, norm)[1]


def system(m: int, j: float, norm: Normalization = Normalization.FLAT) -> np.ndarray:
    """``S + j M``, the matrix of ``a_j`` on H_m."""
    if not j > 0:
        raise DomainError(f"j must be > 0, got {j}")
    stiff, mass_ = operators(m, norm)
    return stiff + j * mass_


def h1_gram(n: int, norm: Normalization = Normalization.FLAT) -> np.ndarray:
    """Gram matrix of the H1 inner product on ``[g_3, ..., g_{n+2}]``."""
    stiff, mass_ = operators(n, norm)
    return stiff + mass_


def scaling(m: int, norm: Normalization = Normalization.FLAT) -> np.ndarray:
    """Diagonal of ``D`` with ``g^norm = D g^FLAT`` basis-function by basis-function."""
    _check_dim(m)
    norm = Normalization(norm)
    return np.array([norm.scale(decompose(i + 2).level) for i in range(m)])


def boundary_flux(m: int, norm: Normalization = Normalization.FLAT) -> np.ndarray:
    """``int g'_{i+2}`` for each basis function; zero for Haar wavelets."""
    return np.array([integrate(derivative(g)) for g in h10_basis(m, norm)])


def load(spec: ProblemSpec, m: int, norm: Normalization = Normalization.FLAT) -> np.ndarray:
    """Right-hand side ``x*(g) - a_j(u_0, g)`` after lifting the boundary data."""
    basis = h10_basis(m, norm)
    flux = boundary_flux(m, norm)
    worst = float(np.max(np.abs(flux)))
    if worst > FLUX_TOL:
        raise SolverError(f"boundary flux term int g' does not vanish (max {worst:.3e})")
    lift = spec.lift
    slope = spec.beta - spec.alpha
    return np.array(
        [
            l2_inner(spec.f, g) - slope * flux[i] - spec.j * l2_inner(lift, g)
            for i, g in enumerate(basis)
        ]
    )
