"""Build constants and run defaults."""

import math

PROJECT_NAME = "vicollage"

# Polynomial degree caps: inputs (f, exact solutions) and internal products.
INPUT_DEGREE = 4
MAX_DEGREE = 2 * INPUT_DEGREE

# Scalar minimizer
GRID_POINTS = 129
DEFAULT_TOL = 1e-10

# Linear solves
RESIDUAL_TOL = 1e-12
# int g' over a hat; exactly zero in dyadic arithmetic
FLUX_TOL = 1e-14

# Sweep worker pool
THREADS_ENV = "VICOLLAGE_THREADS"
DEFAULT_THREADS = 4

# Reference problem: -u'' + sqrt(2) u = -2 + sqrt(2)(x^2 - 2x - 3), u(0) = -3, u(1) = -4
REFERENCE_ALPHA = -3.0
REFERENCE_BETA = -4.0
REFERENCE_J = math.sqrt(2.0)
REFERENCE_EXACT_COEFFS = (-3.0, -2.0, 1.0)
REFERENCE_F_COEFFS = (-2.0 - 3.0 * REFERENCE_J, -2.0 * REFERENCE_J, REFERENCE_J)

DEFAULT_J_RANGE = (1.0, 4.0)
DEFAULT_NORMALIZATION = "flat"  # flat|l2
DEFAULT_OBJECTIVE = "abs_sum"  # abs_sum|dual_norm|distance
DEFAULT_TARGET = "galerkin"  # galerkin|exact
DEFAULT_SAMPLES = 33
DEFAULT_REFERENCE_M = 127

TABLE1_M = (3, 7, 15, 31, 63)
TABLE2_M = (3, 7, 15, 31)
TABLE2_N = (31,)
BOUND_N = 1023

DEFAULTS = {
    "alpha": REFERENCE_ALPHA,
    "beta": REFERENCE_BETA,
    "j_true": REFERENCE_J,
    "f_coeffs": REFERENCE_F_COEFFS,
    "exact_coeffs": REFERENCE_EXACT_COEFFS,
    "j_lo": DEFAULT_J_RANGE[0],
    "j_hi": DEFAULT_J_RANGE[1],
    "objective": DEFAULT_OBJECTIVE,
    "normalization": DEFAULT_NORMALIZATION,
    "tol": DEFAULT_TOL,
    "target": DEFAULT_TARGET,
    "samples": DEFAULT_SAMPLES,
    "reference_m": DEFAULT_REFERENCE_M,
}
