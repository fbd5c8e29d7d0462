"""Collage-based parameter recovery for ``-u'' + j u = f``.

Given a target ``y`` with the right boundary values, the distance from ``y`` to the unknown
solution ``x_j`` is bounded by the residual functional ``a_j(y, .) - x*`` restricted to
H1_0, divided by the coercivity constant of ``a_j``. Minimizing that residual over ``j``
replaces the expensive problem of solving for ``x_j`` at every ``j``.

Residuals are affine in ``j``: ``r_k(j) = s_k + j t_k`` with
``s_k = int y' g'_{k+2} - int f g_{k+2}`` and ``t_k = int y g_{k+2}``.
"""

from __future__ import annotations

import logging
import math
import operator
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import Executor
from dataclasses import dataclass
from enum import Enum
from functools import reduce

import numpy as np

from .assembly import ProblemSpec, h1_gram
from .basis import Normalization, h10_basis
from .config import DEFAULT_J_RANGE, DEFAULT_REFERENCE_M, DEFAULT_TOL, GRID_POINTS
from .errors import DomainError
from .galerkin import CholeskyFactor, cholesky_factor, norms_of, solve_direct
from .pwpoly import PiecewisePoly, derivative, integrate, l2_inner, multiply, subtract

logger = logging.getLogger(__name__)

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
MAX_GOLDEN_STEPS = 500


class ObjectiveKind(str, Enum):
    ABS_SUM = "abs_sum"
    DUAL_NORM = "dual_norm"
    DISTANCE = "distance"


def ordered_sum(values: Iterable[float]) -> float:
    """Plain left-to-right float sum (``sum`` may compensate on newer Pythons)."""
    return reduce(operator.add, values, 0.0)


@dataclass(frozen=True)
class ResidualAffine:
    s: tuple[float, ...]
    t: tuple[float, ...]

    def __post_init__(self) -> None:
        s = tuple(float(v) for v in self.s)
        t = tuple(float(v) for v in self.t)
        if len(s) != len(t) or not s:
            raise DomainError(f"s and t must be non-empty and equal length ({len(s)}, {len(t)})")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)

    @property
    def n(self) -> int:
        return len(self.s)

    @property
    def A(self) -> float:
        return ordered_sum(self.s)

    @property
    def B(self) -> float:
        return ordered_sum(self.t)

    def at(self, j: float) -> np.ndarray:
        return np.asarray(self.s) + j * np.asarray(self.t)

    def head(self, n: int) -> ResidualAffine:
        """Residuals against the first ``n`` test functions only."""
        if not 1 <= n <= self.n:
            raise DomainError(f"cannot take {n} of {self.n} residuals")
        return ResidualAffine(self.s[:n], self.t[:n])


@dataclass(frozen=True)
class InverseResult:
    j_star: float
    objective_value: float
    objective_kind: ObjectiveKind
    n: int
    m: int | None
    norm: Normalization
    j_range: tuple[float, float]


def _check_range(j_lo: float, j_hi: float) -> None:
    if not j_lo < j_hi:
        raise DomainError(f"empty parameter range [{j_lo}, {j_hi}]")


def coercivity(j: float) -> float:
    """Lower bound ``min(1, j)`` of the coercivity constant of ``a_j`` in the H1 norm."""
    if not j > 0:
        raise DomainError(f"j must be > 0, got {j}")
    return min(1.0, j)


def residuals(
    y: PiecewisePoly, f: PiecewisePoly, n: int, norm: Normalization = Normalization.FLAT
) -> ResidualAffine:
    """Split ``a_j(y, g_{k+2}) - int f g_{k+2}``, ``k = 1..n``, into ``s_k + j t_k``."""
    slope = derivative(y)
    s, t = [], []
    for g in h10_basis(n, norm):
        s.append(integrate(multiply(slope, derivative(g))) - l2_inner(f, g))
        t.append(l2_inner(y, g))
    return ResidualAffine(tuple(s), tuple(t))


def objective_abs_sum(r: ResidualAffine, j: float) -> float:
    return abs(r.A + j * r.B)


def _factor(gram: np.ndarray | CholeskyFactor, n: int) -> CholeskyFactor:
    factor = gram if isinstance(gram, CholeskyFactor) else cholesky_factor(gram)
    if factor.size != n:
        raise DomainError(f"Gram matrix of size {factor.size} for {n} residuals")
    return factor


def objective_dual_norm(r: ResidualAffine, gram: np.ndarray | CholeskyFactor, j: float) -> float:
    """``sqrt(r(j)^T G^-1 r(j))``, the dual norm of the residual on the test space."""
    factor = _factor(gram, r.n)
    v = r.at(j)
    return math.sqrt(max(float(v @ factor.solve(v)), 0.0))


def collage_bound_from_residuals(
    r: ResidualAffine, gram: np.ndarray | CholeskyFactor, j: float
) -> float:
    return objective_dual_norm(r, gram, j) / coercivity(j)


def collage_bound(
    y: PiecewisePoly, spec: ProblemSpec, n: int, norm: Normalization = Normalization.FLAT
) -> float:
    """Computable upper estimate of ``||y - x_j||_H1`` from the residual of ``y``."""
    r = residuals(y, spec.f, n, norm)
    return collage_bound_from_residuals(r, h1_gram(n, norm), spec.j)


def collage_sweep(
    y: PiecewisePoly, spec: ProblemSpec, ns: Sequence[int], norm: Normalization = Normalization.FLAT
) -> list[float]:
    """Dual residual norms at ``spec.j`` over nested test spaces of sizes ``ns``."""
    top = max(ns)
    r = residuals(y, spec.f, top, norm)
    gram = h1_gram(top, norm)
    return [objective_dual_norm(r.head(n), gram[:n, :n], spec.j) for n in ns]


def golden_section(
    obj: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float]:
    """Shrink ``[a, b]`` around a minimizer of ``obj`` until ``b - a <= tol``.

    Ties keep the left part so constant stretches resolve toward smaller arguments.
    """
    c = b - (b - a) * INVPHI
    d = a + (b - a) * INVPHI
    fc, fd = obj(c), obj(d)
    for _ in range(MAX_GOLDEN_STEPS):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * INVPHI
            fc = obj(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * INVPHI
            fd = obj(d)
    return a, b


def minimize_scalar(
    obj: Callable[[float], float],
    j_lo: float,
    j_hi: float,
    tol: float = DEFAULT_TOL,
    *,
    grid_points: int = GRID_POINTS,
    executor: Executor | None = None,
) -> tuple[float, float]:
    """Grid scan to bracket the best cell, then golden-section refinement to width ``tol``.

    Grid values may be computed on ``executor``; the bracket is chosen from the values in
    grid order, so the result does not depend on completion order.
    """
    _check_range(j_lo, j_hi)
    if not tol > 0:
        raise DomainError(f"tolerance must be > 0, got {tol}")
    grid = np.linspace(j_lo, j_hi, grid_points)
    points = [float(j) for j in grid]
    values = list(executor.map(obj, points)) if executor else [obj(j) for j in points]
    best = int(np.argmin(values))
    a = points[max(best - 1, 0)]
    b = points[min(best + 1, len(points) - 1)]
    a, b = golden_section(obj, a, b, tol)
    j_ref = 0.5 * (a + b)
    v_ref = obj(j_ref)
    logger.debug("bracket [%g, %g] -> j=%.12g value=%.6e", a, b, j_ref, v_ref)
    if values[best] < v_ref or (values[best] == v_ref and points[best] < j_ref):
        return points[best], float(values[best])
    return j_ref, float(v_ref)


def _clamp(j: float, j_lo: float, j_hi: float) -> float:
    clamped = min(max(j, j_lo), j_hi)
    if clamped != j:
        logger.warning("unconstrained minimizer %.6g clamped to [%g, %g]", j, j_lo, j_hi)
    return clamped


def minimize_closed_form_abs_sum(
    r: ResidualAffine, j_lo: float, j_hi: float
) -> tuple[float, float]:
    """Minimize ``|A + jB|`` on ``[j_lo, j_hi]`` exactly."""
    _check_range(j_lo, j_hi)
    A, B = r.A, r.B
    if B == 0.0:
        return j_lo, abs(A)
    j = _clamp(-A / B, j_lo, j_hi)
    return j, abs(A + j * B)


def minimize_closed_form_dual_norm(
    r: ResidualAffine, gram: np.ndarray | CholeskyFactor, j_lo: float, j_hi: float
) -> tuple[float, float]:
    """Minimize the dual norm exactly: it is the square root of a quadratic in ``j``."""
    _check_range(j_lo, j_hi)
    factor = _factor(gram, r.n)
    s, t = np.asarray(r.s), np.asarray(r.t)
    w = factor.solve(t)
    tt = float(t @ w)
    if tt <= 0.0:
        j = j_lo
    else:
        j = _clamp(-float(s @ w) / tt, j_lo, j_hi)
    return j, objective_dual_norm(r, factor, j)


def distance_objective(
    y: PiecewisePoly,
    f: PiecewisePoly,
    reference_m: int = DEFAULT_REFERENCE_M,
    norm: Normalization = Normalization.FLAT,
) -> Callable[[float], float]:
    """``j -> ||y - x_j||_H1`` with ``x_j`` approximated by the Galerkin solution on H_reference_m.

    Boundary data are read off the target, which must lie in the affine constraint set.
    """
    alpha, beta = float(y(0.0)), float(y(1.0))

    def obj(j: float) -> float:
        sol = solve_direct(ProblemSpec(alpha, beta, j, f), reference_m, norm)
        return norms_of(subtract(y, sol.as_pwpoly)).h1

    return obj


def recover_parameter(
    y: PiecewisePoly,
    f: PiecewisePoly,
    n: int,
    j_range: tuple[float, float] = DEFAULT_J_RANGE,
    objective_kind: ObjectiveKind = ObjectiveKind.ABS_SUM,
    norm: Normalization = Normalization.FLAT,
    *,
    tol: float = DEFAULT_TOL,
    m: int | None = None,
    reference_m: int = DEFAULT_REFERENCE_M,
    executor: Executor | None = None,
) -> InverseResult:
    """Estimate the ``j`` whose solution is closest to the target ``y``.

    ``m`` only records the resolution of the target in the result.
    """
    if n < 1:
        raise DomainError(f"number of test functions must be >= 1, got {n}")
    j_lo, j_hi = (float(v) for v in j_range)
    _check_range(j_lo, j_hi)
    kind = ObjectiveKind(objective_kind)
    norm = Normalization(norm)
    if kind is ObjectiveKind.ABS_SUM:
        j_star, value = minimize_closed_form_abs_sum(residuals(y, f, n, norm), j_lo, j_hi)
    elif kind is ObjectiveKind.DUAL_NORM:
        r = residuals(y, f, n, norm)
        factor = cholesky_factor(h1_gram(n, norm))
        j_star, value = minimize_scalar(
            lambda j: objective_dual_norm(r, factor, j), j_lo, j_hi, tol, executor=executor
        )
    else:
        j_star, value = minimize_scalar(
            distance_objective(y, f, reference_m, norm), j_lo, j_hi, tol, executor=executor
        )
    return InverseResult(
        j_star=j_star,
        objective_value=value,
        objective_kind=kind,
        n=n,
        m=m,
        norm=norm,
        j_range=(j_lo, j_hi),
    )
