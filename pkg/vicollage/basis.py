"""Haar system on L2(0, 1) and its integrated Faber-Schauder system.

Indexing follows the usual Haar convention: ``h_1 = 1`` and, for ``k >= 2``,
``k = 2**n + q + 1`` with level ``n`` and offset ``0 <= q < 2**n``. The Faber-Schauder
functions are ``g_1 = 1``, ``g_2 = x`` and ``g_k(x) = int_0^x h_{k-1}`` for ``k >= 3``;
``{g_{k+2}}`` spans H1_0(0, 1) level by level.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .pwpoly import PiecewisePoly, ZERO, constant, piecewise_linear, polynomial

SQRT2 = math.sqrt(2.0)


class Normalization(str, Enum):
    """Amplitude convention of the Haar functions.

    ``FLAT`` wavelets take the values +-1, ``L2`` wavelets take +-2**(n/2) so that they
    have unit L2 norm.
    """

    FLAT = "flat"
    L2 = "l2"

    def scale(self, level: int) -> float:
        if self is Normalization.FLAT:
            return 1.0
        return math.ldexp(SQRT2 if level % 2 else 1.0, level // 2)


@dataclass(frozen=True)
class HaarIndex:
    k: int
    level: int
    offset: int

    @property
    def support(self) -> tuple[Fraction, Fraction]:
        width = Fraction(1, 2**self.level)
        return self.offset * width, (self.offset + 1) * width

    @property
    def midpoint(self) -> Fraction:
        lo, hi = self.support
        return (lo + hi) / 2


def decompose(k: int) -> HaarIndex:
    """Split a Haar index ``k >= 2`` into level and offset."""
    if k < 2:
        raise DomainError(f"Haar index must be >= 2 to have a level, got {k}")
    level = (k - 1).bit_length() - 1
    return HaarIndex(k=k, level=level, offset=k - 1 - 2**level)


def basis_level(i: int) -> int:
    """Level of the ``i``-th H1_0 basis function ``g_{i+2}`` (1-based ``i``)."""
    return decompose(i + 1).level


def _embed(
    lo: Fraction, hi: Fraction, inner: Sequence[Fraction], pieces: Sequence[tuple[float, ...]]
) -> PiecewisePoly:
    """Extend pieces living on ``[lo, hi]`` by zero to the whole of [0, 1]."""
    bps = list(inner)
    out = list(pieces)
    if lo > 0:
        bps.insert(0, Fraction(0))
        out.insert(0, ZERO)
    if hi < 1:
        bps.append(Fraction(1))
        out.append(ZERO)
    return PiecewisePoly(tuple(bps), tuple(out))


@lru_cache(maxsize=None)
def haar(k: int, norm: Normalization = Normalization.FLAT) -> PiecewisePoly:
    if k < 1:
        raise DomainError(f"Haar index must be >= 1, got {k}")
    if k == 1:
        return constant(1.0)
    idx = decompose(k)
    c = Normalization(norm).scale(idx.level)
    lo, hi = idx.support
    return _embed(lo, hi, (lo, idx.midpoint, hi), ((c,), (-c,)))


@lru_cache(maxsize=None)
def schauder_g(k: int, norm: Normalization = Normalization.FLAT) -> PiecewisePoly:
    if k < 1:
        raise DomainError(f"Faber-Schauder index must be >= 1, got {k}")
    if k == 1:
        return constant(1.0)
    if k == 2:
        return polynomial((0.0, 1.0))
    idx = decompose(k - 1)
    c = Normalization(norm).scale(idx.level)
    lo, hi = idx.support
    half = float(idx.midpoint - lo)
    # rises with slope c to the peak c * half at the midpoint, then falls back to 0
    return _embed(lo, hi, (lo, idx.midpoint, hi), ((0.0, c), (c * half, -c)))


def h10_basis(m: int, norm: Normalization = Normalization.FLAT) -> list[PiecewisePoly]:
    """``[g_3, ..., g_{m+2}]``, a basis of the subspace H_m of H1_0(0, 1)."""
    if m < 1:
        raise DomainError(f"subspace dimension must be >= 1, got {m}")
    norm = Normalization(norm)
    return [schauder_g(k + 2, norm) for k in range(1, m + 1)]


def dyadic_nodes(level: int) -> list[Fraction]:
    return [Fraction(i, 2**level) for i in range(2**level + 1)]


def nodal_interpolant(func: Callable[[float], float], level: int) -> PiecewisePoly:
    """Piecewise-linear interpolant of ``func`` on the uniform grid of step ``2**-level``."""
    nodes = dyadic_nodes(level)
    return piecewise_linear(nodes, [float(func(float(x))) for x in nodes])


def hierarchical_coefficients(
    values: Sequence[float], level: int, norm: Normalization = Normalization.FLAT
) -> np.ndarray:
    """Coefficients on ``h10_basis(2**level - 1)`` of the nodal vector ``values``.

    ``values`` holds the ``2**level + 1`` grid values and must vanish at both ends. Each
    coefficient is the hierarchical surplus at the hat's midpoint divided by its peak.
    """
    size = 2**level
    if len(values) != size + 1:
        raise DomainError(f"expected {size + 1} nodal values, got {len(values)}")
    if values[0] != 0.0 or values[-1] != 0.0:
        raise DomainError("nodal values must vanish at 0 and 1")
    norm = Normalization(norm)
    out = np.empty(size - 1)
    for i in range(1, size):
        idx = decompose(i + 1)
        lo = idx.support[0]
        stride = size >> idx.level
        left = int(lo * size)
        surplus = values[left + stride // 2] - 0.5 * (values[left] + values[left + stride])
        peak = norm.scale(idx.level) * float(idx.midpoint - lo)
        out[i - 1] = surplus / peak
    return out
