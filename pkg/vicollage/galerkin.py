"""Direct Galerkin solver on H_m and exact error norms."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_solve, lapack

from .assembly import ProblemSpec, load, system
from .basis import Normalization, h10_basis, nodal_interpolant
from .config import RESIDUAL_TOL
from .errors import DomainError, FactorizationError, SolverError
from .pwpoly import (
    PiecewisePoly,
    combine,
    derivative,
    h1semi_inner,
    l2_inner,
    scale,
    subtract,
)

logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class CholeskyFactor:
    """Upper Cholesky factor of an SPD matrix, reusable across right-hand sides."""

    upper: np.ndarray

    @property
    def size(self) -> int:
        return int(self.upper.shape[0])

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve((self.upper, False), np.asarray(rhs, dtype=float))


def cholesky_factor(a: np.ndarray) -> CholeskyFactor:
    matrix = np.asarray(a, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise DomainError(f"expected a non-empty square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DomainError("matrix has non-finite entries")
    upper, info = lapack.dpotrf(matrix, lower=False, clean=True)
    if info > 0:
        raise FactorizationError(int(info), matrix.shape[0])
    if info < 0:
        raise DomainError(f"dpotrf rejected argument {-info}")
    return CholeskyFactor(upper)


def cholesky_solve(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return cholesky_factor(a).solve(rhs)


class ErrorNorms(NamedTuple):
    l2: float
    h1semi: float
    h1: float


@dataclass(frozen=True)
class GalerkinSolution:
    spec: ProblemSpec
    m: int
    norm: Normalization
    coeffs: tuple[float, ...]
    as_pwpoly: PiecewisePoly
    relative_residual: float

    def __call__(self, x: float | np.ndarray) -> float | np.ndarray:
        return self.as_pwpoly(x)


def solve_direct(
    spec: ProblemSpec, m: int, norm: Normalization = Normalization.FLAT
) -> GalerkinSolution:
    """Solve ``(S + jM) c = b`` and return ``u_m = u_0 + sum c_k g_{k+2}``."""
    norm = Normalization(norm)
    matrix = system(m, spec.j, norm)
    rhs = load(spec, m, norm)
    coeffs = cholesky_solve(matrix, rhs)
    scale_ = np.linalg.norm(matrix, np.inf) * np.linalg.norm(coeffs, np.inf) + np.linalg.norm(
        rhs, np.inf
    )
    residual = float(np.linalg.norm(matrix @ coeffs - rhs, np.inf))
    relative = residual / scale_ if scale_ > 0 else residual
    if relative > RESIDUAL_TOL:
        raise SolverError(f"Galerkin residual {relative:.3e} exceeds {RESIDUAL_TOL:.0e} (m={m})")
    basis = h10_basis(m, norm)
    u_m = combine([(1.0, spec.lift), *zip(coeffs.tolist(), basis)])
    logger.debug("solved m=%d j=%g (%s), residual %.2e", m, spec.j, norm.value, relative)
    return GalerkinSolution(
        spec=spec,
        m=m,
        norm=norm,
        coeffs=tuple(coeffs.tolist()),
        as_pwpoly=u_m,
        relative_residual=relative,
    )


def norms_of(e: PiecewisePoly) -> ErrorNorms:
    l2 = math.sqrt(max(l2_inner(e, e), 0.0))
    semi = math.sqrt(max(h1semi_inner(e, e), 0.0))
    return ErrorNorms(l2, semi, math.sqrt(l2 * l2 + semi * semi))


def error_norms(sol: GalerkinSolution, exact: PiecewisePoly) -> ErrorNorms:
    """L2, H1-seminorm and H1 norms of ``exact - u_m``, integrated exactly."""
    u_m = sol.as_pwpoly
    for x in (0.0, 1.0):
        gap = abs(exact(x) - u_m(x))
        if gap > BOUNDARY_TOL:
            logger.warning("exact solution differs from u_m at x=%g by %.3e", x, gap)
    return norms_of(subtract(exact, u_m))


def manufacture(u_exact: PiecewisePoly, j: float) -> ProblemSpec:
    """Problem whose solution is ``u_exact``: ``f = -u'' + j u`` with matching boundary data."""
    if not j > 0:
        raise DomainError(f"j must be > 0, got {j}")
    f = subtract(scale(u_exact, j), derivative(derivative(u_exact)))
    return ProblemSpec(alpha=u_exact(0.0), beta=u_exact(1.0), j=j, f=f)


def interpolation_error(u: PiecewisePoly, level: int) -> ErrorNorms:
    """Error norms of the nodal interpolant of ``u`` on the grid of step ``2**-level``."""
    return norms_of(subtract(u, nodal_interpolant(u, level)))
