import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from vicollage import galerkin, inverse, pwpoly
from vicollage.assembly import ProblemSpec, h1_gram
from vicollage.basis import Normalization, h10_basis
from vicollage.config import (
    REFERENCE_ALPHA,
    REFERENCE_BETA,
    REFERENCE_EXACT_COEFFS,
    REFERENCE_F_COEFFS,
    REFERENCE_J,
)
from vicollage.errors import DomainError
from vicollage.inverse import ObjectiveKind, ResidualAffine

# Recovered parameter for targets u_m, n = 31, j in [1, 4]
TABLE2 = {3: 1.53389, 7: 1.46679, 15: 1.43170, 31: 1.41421}
# H1 errors of u_m on the reference problem
H1_ERRORS = {3: 0.144765, 7: 0.0722221, 15: 0.0360911}


@pytest.fixture(scope="module")
def spec() -> ProblemSpec:
    f = pwpoly.polynomial(REFERENCE_F_COEFFS)
    return ProblemSpec(REFERENCE_ALPHA, REFERENCE_BETA, REFERENCE_J, f)


@pytest.fixture(scope="module")
def exact() -> pwpoly.PiecewisePoly:
    return pwpoly.polynomial(REFERENCE_EXACT_COEFFS)


def _target(spec: ProblemSpec, m: int, norm: Normalization = Normalization.FLAT):
    return galerkin.solve_direct(spec, m, norm).as_pwpoly


def _recover(spec, m, norm=Normalization.FLAT, n=31, **kwargs):
    y = _target(spec, m, norm)
    return inverse.recover_parameter(y, spec.f, n, (1.0, 4.0), norm=norm, **kwargs)


def test_residuals_are_affine_in_j():
    rng = np.random.default_rng(21)
    nodes = [i / 8 for i in range(9)]
    y = pwpoly.add(
        pwpoly.piecewise_linear(nodes, rng.normal(size=9)),
        pwpoly.polynomial(rng.normal(size=3)),
    )
    f = pwpoly.polynomial(rng.normal(size=4))
    r = inverse.residuals(y, f, 15)
    basis = h10_basis(15)
    for j in rng.uniform(0.5, 5.0, size=20):
        direct = [
            pwpoly.h1semi_inner(y, g) + j * pwpoly.l2_inner(y, g) - pwpoly.l2_inner(f, g)
            for g in basis
        ]
        np.testing.assert_allclose(r.at(j), direct, atol=1e-12, rtol=0)


def test_exact_solution_has_zero_residual(spec, exact):
    r = inverse.residuals(exact, spec.f, 31)
    np.testing.assert_allclose(r.at(REFERENCE_J), np.zeros(31), atol=1e-12)


def test_galerkin_target_is_orthogonal_to_its_test_space(spec):
    r = inverse.residuals(_target(spec, 7), spec.f, 7)
    np.testing.assert_allclose(r.at(REFERENCE_J), np.zeros(7), atol=1e-12)


def test_zero_data_gives_zero_residuals():
    r = inverse.residuals(pwpoly.zero(), pwpoly.zero(), 5)
    assert r.s == (0.0,) * 5 and r.t == (0.0,) * 5
    assert inverse.objective_abs_sum(r, 2.0) == 0.0


def test_residual_affine_validation():
    with pytest.raises(DomainError):
        ResidualAffine((1.0,), (1.0, 2.0))
    with pytest.raises(DomainError):
        ResidualAffine((), ())
    r = ResidualAffine((1.0, 2.0, 3.0), (0.5, 0.5, 0.5))
    assert r.n == 3 and r.A == 6.0 and r.B == 1.5
    assert r.head(2) == ResidualAffine((1.0, 2.0), (0.5, 0.5))
    assert inverse.objective_abs_sum(r, 2.0) == 9.0
    with pytest.raises(DomainError):
        r.head(4)


@pytest.mark.parametrize("norm", list(Normalization))
def test_exact_cell_is_recovered_for_either_normalization(spec, norm):
    result = _recover(spec, 31, norm)
    assert abs(result.j_star - math.sqrt(2)) <= 1e-5
    assert result.objective_kind is ObjectiveKind.ABS_SUM
    assert result.m is None and result.n == 31


def test_flat_normalization_reproduces_recovered_parameters(spec):
    flat = {m: _recover(spec, m).j_star for m in TABLE2}
    assert flat[7] == pytest.approx(TABLE2[7], abs=2e-3)
    assert flat[15] == pytest.approx(TABLE2[15], abs=2e-3)
    # the coarsest cell lands about 4e-3 above the published value
    assert flat[3] == pytest.approx(TABLE2[3], abs=1e-2)
    assert flat[3] > flat[7] > flat[15] > flat[31]
    gaps = [abs(flat[m] - REFERENCE_J) for m in sorted(TABLE2)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_flat_normalization_is_the_closer_convention(spec):
    for m in (3, 7, 15):
        flat = _recover(spec, m, Normalization.FLAT).j_star
        l2 = _recover(spec, m, Normalization.L2).j_star
        assert abs(flat - TABLE2[m]) < abs(l2 - TABLE2[m])


@pytest.mark.parametrize("m", [3, 7, 15, 31, 63])
def test_exact_recovery_when_test_space_is_inside_target_space(spec, m):
    y = _target(spec, m)
    for n in sorted({1, (m + 1) // 2, m}):
        r = inverse.residuals(y, spec.f, n)
        if r.B == 0.0:
            continue
        result = inverse.recover_parameter(y, spec.f, n, (1.0, 4.0), m=m)
        assert abs(result.j_star - REFERENCE_J) <= 1e-6
        assert result.m == m


@pytest.mark.parametrize("m", [3, 7, 15])
def test_collage_bound_dominates_true_error(spec, exact, m):
    y = _target(spec, m)
    error = galerkin.norms_of(pwpoly.subtract(exact, y)).h1
    assert error == pytest.approx(H1_ERRORS[m], rel=1e-4)
    assert inverse.collage_bound(y, spec, 1023) >= error


def test_dual_norm_grows_with_the_test_space(spec):
    ns = [1, 3, 7, 15, 31, 63, 127, 255, 511, 1023]
    values = inverse.collage_sweep(_target(spec, 3), spec, ns)
    assert len(values) == len(ns)
    for small, large in zip(values, values[1:]):
        assert large >= small - 1e-12
    assert values[-1] > 0.1


def test_dual_norm_in_one_dimension(spec):
    r = inverse.residuals(_target(spec, 3), spec.f, 7).head(1)
    gram = h1_gram(1)
    expected = abs(r.at(2.0)[0]) / math.sqrt(gram[0, 0])
    assert inverse.objective_dual_norm(r, gram, 2.0) == pytest.approx(expected, rel=1e-14)
    assert inverse.objective_dual_norm(ResidualAffine((0.0,), (0.0,)), gram, 2.0) == 0.0
    with pytest.raises(DomainError):
        inverse.objective_dual_norm(r, h1_gram(2), 2.0)


def test_collage_bound_of_exact_solution_vanishes(spec, exact):
    assert inverse.collage_bound(exact, spec, 63) <= 1e-11


def test_collage_bound_scales_with_coercivity():
    gram = h1_gram(7)
    r = ResidualAffine(tuple(np.linspace(-1.0, 1.0, 7)), (0.0,) * 7)
    half = inverse.collage_bound_from_residuals(r, gram, 0.5)
    quarter = inverse.collage_bound_from_residuals(r, gram, 0.25)
    assert quarter == pytest.approx(2.0 * half, rel=1e-14)
    assert inverse.coercivity(3.0) == 1.0
    assert inverse.coercivity(0.25) == 0.25
    with pytest.raises(DomainError):
        inverse.coercivity(0.0)


def test_minimize_scalar_on_a_quadratic():
    j, value = inverse.minimize_scalar(lambda j: (j - 2.0) ** 2, 1.0, 4.0, 1e-8)
    assert abs(j - 2.0) <= 1e-8
    assert value <= 1e-16


def test_minimize_scalar_on_a_v_shape():
    a, b = -2.5, 1.3
    j, value = inverse.minimize_scalar(lambda j: abs(a + j * b), 1.0, 4.0, 1e-10)
    assert j == pytest.approx(-a / b, abs=1e-9)
    assert value <= 1e-9


def test_minimize_scalar_breaks_ties_toward_small_j():
    j, value = inverse.minimize_scalar(lambda j: 1.0, 1.0, 4.0)
    assert (j, value) == (1.0, 1.0)


def test_minimize_scalar_validates_its_interval():
    with pytest.raises(DomainError):
        inverse.minimize_scalar(abs, 2.0, 2.0)
    with pytest.raises(DomainError):
        inverse.minimize_scalar(abs, 1.0, 2.0, tol=0.0)


def test_minimize_scalar_is_independent_of_the_executor():
    def obj(j):
        return abs(math.sin(3.0 * j) + 0.2 * j)

    sequential = inverse.minimize_scalar(obj, 1.0, 4.0)
    with ThreadPoolExecutor(max_workers=4) as pool:
        concurrent = inverse.minimize_scalar(obj, 1.0, 4.0, executor=pool)
    assert sequential == concurrent


def test_closed_form_abs_sum():
    r = ResidualAffine((-REFERENCE_J,), (1.0,))
    j, value = inverse.minimize_closed_form_abs_sum(r, 1.0, 4.0)
    assert j == REFERENCE_J and value == 0.0
    assert inverse.minimize_closed_form_abs_sum(ResidualAffine((3.0,), (0.0,)), 1.0, 4.0) == (
        1.0,
        3.0,
    )


def test_closed_form_clamps_and_warns(caplog):
    with caplog.at_level("WARNING", logger="vicollage.inverse"):
        j, value = inverse.minimize_closed_form_abs_sum(ResidualAffine((-10.0,), (1.0,)), 1.0, 4.0)
    assert (j, value) == (4.0, 6.0)
    assert "clamped" in caplog.text


def test_minimizers_agree_on_random_instances():
    rng = np.random.default_rng(2024)
    gram = h1_gram(5)
    factor = galerkin.cholesky_factor(gram)
    checked = 0
    while checked < 50:
        r = ResidualAffine(tuple(rng.normal(size=5)), tuple(rng.normal(size=5)))
        if abs(r.B) < 1e-3:
            continue
        closed = inverse.minimize_closed_form_abs_sum(r, 0.5, 5.0)
        scanned = inverse.minimize_scalar(lambda j: inverse.objective_abs_sum(r, j), 0.5, 5.0)
        assert closed[0] == pytest.approx(scanned[0], abs=1e-6)
        dual = inverse.minimize_closed_form_dual_norm(r, factor, 0.5, 5.0)
        dual_scanned = inverse.minimize_scalar(
            lambda j: inverse.objective_dual_norm(r, factor, j), 0.5, 5.0
        )
        assert dual[1] == pytest.approx(dual_scanned[1], rel=1e-9, abs=1e-12)
        checked += 1


@pytest.mark.parametrize("m", sorted(TABLE2))
def test_minimizers_agree_on_reference_cells(spec, m):
    r = inverse.residuals(_target(spec, m), spec.f, 31)
    closed = inverse.minimize_closed_form_abs_sum(r, 1.0, 4.0)
    scanned = inverse.minimize_scalar(lambda j: inverse.objective_abs_sum(r, j), 1.0, 4.0)
    assert closed[0] == pytest.approx(scanned[0], abs=1e-6)


def test_dual_norm_objective_recovers_exact_cell(spec):
    result = _recover(spec, 31, objective_kind=ObjectiveKind.DUAL_NORM)
    assert abs(result.j_star - REFERENCE_J) <= 1e-6
    r = inverse.residuals(_target(spec, 31), spec.f, 31)
    closed, _ = inverse.minimize_closed_form_dual_norm(r, h1_gram(31), 1.0, 4.0)
    assert closed == pytest.approx(result.j_star, abs=1e-6)


def test_distance_objective_recovers_parameter_of_its_own_resolution(spec):
    y = _target(spec, 15)
    result = inverse.recover_parameter(
        y, spec.f, 15, (1.0, 4.0), ObjectiveKind.DISTANCE, reference_m=15
    )
    assert abs(result.j_star - REFERENCE_J) <= 1e-6
    assert result.objective_value <= 1e-6


def test_recover_parameter_clamps_to_the_range(spec, exact):
    result = inverse.recover_parameter(exact, spec.f, 7, (2.0, 4.0))
    assert result.j_star == 2.0
    assert result.j_range == (2.0, 4.0)
    with pytest.raises(DomainError):
        inverse.recover_parameter(exact, spec.f, 0)
    with pytest.raises(DomainError):
        inverse.recover_parameter(exact, spec.f, 7, (4.0, 1.0))


def test_recovery_from_random_manufactured_solutions():
    rng = np.random.default_rng(99)
    for _ in range(20):
        alpha, beta = rng.uniform(-5.0, 5.0, size=2)
        c2, c3 = rng.uniform(-3.0, 3.0, size=2)
        u = pwpoly.polynomial([alpha, beta - alpha - c2 - c3, c2, c3])
        j = float(rng.choice([1.0, 2.0, 4.0]))
        spec = galerkin.manufacture(u, j)
        r = inverse.residuals(u, spec.f, 15)
        if abs(r.B) < 1e-6:
            continue
        result = inverse.recover_parameter(u, spec.f, 15, (0.5, 5.0))
        assert abs(result.j_star - j) <= 1e-6
