"""Piecewise polynomials on [0, 1] with dyadic breakpoints.

Every integral in vicollage goes through this module: products, derivatives and definite
integrals are computed piece by piece from the coefficients, never by quadrature.

A :class:`PiecewisePoly` stores each piece in the *local* variable ``t = x - b_i`` of its
interval ``[b_i, b_{i+1})``. Integrals over a piece are then ``F(b_{i+1} - b_i)`` with
``F(0) = 0``, which avoids cancellation on the short intervals of fine dyadic levels.
Breakpoints are :class:`fractions.Fraction` values with power-of-two denominators, so the
common refinement of two grids never suffers from rounding mismatches.
"""

from __future__ import annotations

import bisect
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import pairwise

import numpy as np
from numpy.polynomial import Polynomial, polynomial as P

from .config import INPUT_DEGREE, MAX_DEGREE
from .errors import DegreeOverflowError, DomainError

Coeffs = tuple[float, ...]
ZERO: Coeffs = (0.0,)


def dyadic(value: int | float | Fraction | str) -> Fraction:
    """Return ``value`` as an exact dyadic rational, rejecting anything else."""
    try:
        frac = Fraction(value)
    except (TypeError, ValueError, OverflowError) as exc:
        raise DomainError(f"breakpoint {value!r} is not a finite number") from exc
    den = frac.denominator
    if den & (den - 1):
        raise DomainError(f"breakpoint {value!r} is not a dyadic rational")
    return frac


def _trim(coeffs: Iterable[float] | np.ndarray) -> Coeffs:
    arr = np.asarray(coeffs, dtype=float).ravel()
    if arr.size == 0:
        return ZERO
    return tuple(float(c) for c in P.polytrim(arr, tol=0))


def _degree(coeffs: Coeffs) -> int:
    return len(coeffs) - 1


def _shift(coeffs: Coeffs, delta: float) -> Coeffs:
    """Coefficients of ``t -> p(t + delta)``."""
    if delta == 0.0 or len(coeffs) == 1:
        return coeffs
    return _trim(Polynomial(coeffs)(Polynomial([delta, 1.0])).coef)


@dataclass(frozen=True)
class PiecewisePoly:
    """A real function on [0, 1] given by breakpoints and per-interval polynomials.

    Intervals are half-open ``[b_i, b_{i+1})`` except the last, which is closed at 1.
    """

    breakpoints: tuple[Fraction, ...]
    pieces: tuple[Coeffs, ...]

    def __post_init__(self) -> None:
        bps = tuple(dyadic(b) for b in self.breakpoints)
        if len(bps) < 2 or bps[0] != 0 or bps[-1] != 1:
            raise DomainError("breakpoints must start at 0 and end at 1")
        if any(left >= right for left, right in pairwise(bps)):
            raise DomainError("breakpoints must be strictly increasing")
        if len(self.pieces) != len(bps) - 1:
            raise DomainError(
                f"{len(bps) - 1} intervals but {len(self.pieces)} polynomial pieces"
            )
        pieces = tuple(_trim(c) for c in self.pieces)
        for coeffs in pieces:
            if _degree(coeffs) > MAX_DEGREE:
                raise DegreeOverflowError(_degree(coeffs), MAX_DEGREE)
            if not all(np.isfinite(coeffs)):
                raise DomainError("polynomial coefficients must be finite")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", pieces)

    @cached_property
    def knots(self) -> np.ndarray:
        """Breakpoints as floats (exact for dyadic rationals)."""
        return np.array([float(b) for b in self.breakpoints])

    @property
    def degree(self) -> int:
        return max(_degree(c) for c in self.pieces)

    @cached_property
    def _span(self) -> tuple[Fraction, Fraction] | None:
        nonzero = [i for i, c in enumerate(self.pieces) if c != ZERO]
        if not nonzero:
            return None
        return self.breakpoints[nonzero[0]], self.breakpoints[nonzero[-1] + 1]

    def support(self) -> tuple[Fraction, Fraction] | None:
        """Smallest interval outside which the function vanishes, ``None`` if it is zero."""
        return self._span

    def is_zero(self) -> bool:
        return self._span is None

    def __call__(self, x: float | np.ndarray) -> float | np.ndarray:
        xs = np.asarray(x, dtype=float)
        flat = np.atleast_1d(xs).ravel()
        if np.any(np.isnan(flat)) or np.any((flat < 0.0) | (flat > 1.0)):
            raise DomainError(f"evaluation point outside [0, 1]: {x!r}")
        idx = np.searchsorted(self.knots, flat, side="right") - 1
        idx = np.minimum(idx, len(self.pieces) - 1)
        local = flat - self.knots[idx]
        out = np.empty_like(local)
        for i in np.unique(idx):
            mask = idx == i
            out[mask] = P.polyval(local[mask], self.pieces[i])
        if xs.ndim == 0:
            return float(out[0])
        return out.reshape(xs.shape)

    def __add__(self, other: PiecewisePoly) -> PiecewisePoly:
        return add(self, other)

    def __sub__(self, other: PiecewisePoly) -> PiecewisePoly:
        return subtract(self, other)

    def __neg__(self) -> PiecewisePoly:
        return negate(self)

    def __mul__(self, other: PiecewisePoly | float) -> PiecewisePoly:
        if isinstance(other, PiecewisePoly):
            return multiply(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__


# ---- constructors ----


def zero() -> PiecewisePoly:
    return PiecewisePoly((Fraction(0), Fraction(1)), (ZERO,))


def constant(value: float) -> PiecewisePoly:
    return PiecewisePoly((Fraction(0), Fraction(1)), ((float(value),),))


def polynomial(coeffs: Sequence[float]) -> PiecewisePoly:
    """Single-piece polynomial from ascending coefficients (an input, so degree <= INPUT_DEGREE)."""
    trimmed = _trim(coeffs)
    if _degree(trimmed) > INPUT_DEGREE:
        raise DegreeOverflowError(_degree(trimmed), INPUT_DEGREE)
    return PiecewisePoly((Fraction(0), Fraction(1)), (trimmed,))


def from_global(
    breakpoints: Sequence[int | float | Fraction], pieces: Sequence[Sequence[float]]
) -> PiecewisePoly:
    """Build from pieces written in the global variable ``x`` rather than ``x - b_i``."""
    bps = tuple(dyadic(b) for b in breakpoints)
    if len(pieces) != len(bps) - 1:
        raise DomainError(f"{len(bps) - 1} intervals but {len(pieces)} polynomial pieces")
    local = tuple(_shift(_trim(c), float(left)) for left, c in zip(bps, pieces))
    return PiecewisePoly(bps, local)


def piecewise_linear(
    nodes: Sequence[int | float | Fraction], values: Sequence[float]
) -> PiecewisePoly:
    """Continuous piecewise-linear function through ``(nodes[i], values[i])``."""
    bps = tuple(dyadic(b) for b in nodes)
    if len(values) != len(bps):
        raise DomainError(f"{len(bps)} nodes but {len(values)} values")
    pieces = [
        (float(v0), (float(v1) - float(v0)) / float(right - left))
        for (left, right), (v0, v1) in zip(pairwise(bps), pairwise(values))
    ]
    return _compact(bps, [_trim(c) for c in pieces])


# ---- grid helpers ----


def _merge(*polys: PiecewisePoly) -> tuple[Fraction, ...]:
    grid: set[Fraction] = set()
    for p in polys:
        grid.update(p.breakpoints)
    return tuple(sorted(grid))


def _locate(p: PiecewisePoly, grid: Sequence[Fraction]) -> list[tuple[Coeffs, Fraction]]:
    """For each interval of ``grid`` (a refinement of ``p``), the piece of ``p`` and its offset."""
    out = []
    i = 0
    for left in grid[:-1]:
        while p.breakpoints[i + 1] <= left:
            i += 1
        out.append((p.pieces[i], left - p.breakpoints[i]))
    return out


def _compact(breakpoints: Sequence[Fraction], pieces: Sequence[Coeffs]) -> PiecewisePoly:
    """Merge runs of adjacent zero pieces."""
    bps = [breakpoints[0]]
    out: list[Coeffs] = []
    for right, coeffs in zip(breakpoints[1:], pieces):
        if out and coeffs == ZERO and out[-1] == ZERO:
            bps[-1] = right
            continue
        out.append(coeffs)
        bps.append(right)
    return PiecewisePoly(tuple(bps), tuple(out))


def refine(p: PiecewisePoly, breakpoints: Iterable[int | float | Fraction]) -> PiecewisePoly:
    """The same function of ``p`` carried on the common refinement with ``breakpoints``."""
    extra = {dyadic(b) for b in breakpoints}
    if any(b < 0 or b > 1 for b in extra):
        raise DomainError("refinement breakpoints must lie in [0, 1]")
    grid = tuple(sorted(extra.union(p.breakpoints)))
    pieces = tuple(_shift(c, float(offset)) for c, offset in _locate(p, grid))
    return PiecewisePoly(grid, pieces)


# ---- arithmetic ----


def scale(p: PiecewisePoly, factor: float) -> PiecewisePoly:
    if factor == 0.0:
        return zero()
    return PiecewisePoly(p.breakpoints, tuple(_trim(np.multiply(factor, c)) for c in p.pieces))


def negate(p: PiecewisePoly) -> PiecewisePoly:
    return scale(p, -1.0)


def combine(terms: Iterable[tuple[float, PiecewisePoly]]) -> PiecewisePoly:
    """Linear combination ``sum(a * p for a, p in terms)`` on one common refinement."""
    terms = [(float(a), p) for a, p in terms if a != 0.0 and not p.is_zero()]
    if not terms:
        return zero()
    grid = _merge(*(p for _, p in terms))
    knots = [float(b) for b in grid]
    acc: list[np.ndarray] = [np.zeros(1) for _ in range(len(grid) - 1)]
    for factor, p in terms:
        for (left, right), coeffs in zip(pairwise(p.breakpoints), p.pieces):
            if coeffs == ZERO:
                continue
            start = bisect.bisect_left(knots, float(left))
            stop = bisect.bisect_left(knots, float(right))
            for idx in range(start, stop):
                local = _shift(coeffs, knots[idx] - float(left))
                acc[idx] = P.polyadd(acc[idx], np.multiply(factor, local))
    return _compact(grid, [_trim(c) for c in acc])


def add(p: PiecewisePoly, q: PiecewisePoly) -> PiecewisePoly:
    return combine([(1.0, p), (1.0, q)])


def subtract(p: PiecewisePoly, q: PiecewisePoly) -> PiecewisePoly:
    return combine([(1.0, p), (-1.0, q)])


def multiply(p: PiecewisePoly, q: PiecewisePoly) -> PiecewisePoly:
    """Pointwise product; raises :class:`DegreeOverflowError` past ``MAX_DEGREE``."""
    sp, sq = p.support(), q.support()
    if sp is None or sq is None or max(sp[0], sq[0]) >= min(sp[1], sq[1]):
        return zero()
    grid = _merge(p, q)
    pieces: list[Coeffs] = []
    for (a, da), (b, db) in zip(_locate(p, grid), _locate(q, grid)):
        if a == ZERO or b == ZERO:
            pieces.append(ZERO)
            continue
        prod = _trim(P.polymul(_shift(a, float(da)), _shift(b, float(db))))
        if _degree(prod) > MAX_DEGREE:
            raise DegreeOverflowError(_degree(prod), MAX_DEGREE)
        pieces.append(prod)
    return _compact(grid, pieces)


def derivative(p: PiecewisePoly) -> PiecewisePoly:
    """Piecewise derivative (the weak derivative when ``p`` is continuous)."""
    return _compact(p.breakpoints, [_trim(P.polyder(np.asarray(c))) for c in p.pieces])


# ---- integrals ----


def evaluate(p: PiecewisePoly, x: float | np.ndarray) -> float | np.ndarray:
    return p(x)


def integrate(p: PiecewisePoly) -> float:
    """Exact integral over [0, 1]; piece contributions are summed left to right."""
    total = 0.0
    for (left, right), coeffs in zip(pairwise(p.breakpoints), p.pieces):
        if coeffs == ZERO:
            continue
        total += float(P.polyval(float(right - left), P.polyint(np.asarray(coeffs))))
    return total


def l2_inner(p: PiecewisePoly, q: PiecewisePoly) -> float:
    return integrate(multiply(p, q))


def h1semi_inner(p: PiecewisePoly, q: PiecewisePoly) -> float:
    return integrate(multiply(derivative(p), derivative(q)))


def h1_inner(p: PiecewisePoly, q: PiecewisePoly) -> float:
    return l2_inner(p, q) + h1semi_inner(p, q)
