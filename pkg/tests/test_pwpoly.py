from fractions import Fraction

import numpy as np
import pytest

from vicollage import pwpoly
from vicollage.errors import DegreeOverflowError, DomainError
from vicollage.pwpoly import PiecewisePoly


def test_dyadic_accepts_binary_fractions_only():
    assert pwpoly.dyadic("3/8") == Fraction(3, 8)
    assert pwpoly.dyadic(0.75) == Fraction(3, 4)
    with pytest.raises(DomainError):
        pwpoly.dyadic("1/3")
    with pytest.raises(DomainError):
        pwpoly.dyadic(float("nan"))


@pytest.mark.parametrize(
    "breakpoints, pieces",
    [
        ((Fraction(1, 4), Fraction(1)), ((1.0,),)),
        ((Fraction(0), Fraction(3, 4)), ((1.0,),)),
        ((Fraction(0), Fraction(1, 2), Fraction(1)), ((1.0,),)),
        ((Fraction(0), Fraction(1, 2), Fraction(1, 2), Fraction(1)), ((1.0,), (2.0,), (3.0,))),
    ],
)
def test_invalid_layouts_are_rejected(breakpoints, pieces):
    with pytest.raises(DomainError):
        PiecewisePoly(breakpoints, pieces)


def test_piece_degree_is_capped():
    with pytest.raises(DegreeOverflowError):
        pwpoly.polynomial([0, 0, 0, 0, 0, 1])
    quartic = pwpoly.polynomial([0, 0, 0, 0, 1])
    octic = pwpoly.multiply(quartic, quartic)
    assert octic.degree == 8
    with pytest.raises(DegreeOverflowError) as info:
        pwpoly.multiply(octic, pwpoly.polynomial([0, 1]))
    assert info.value.degree == 9


def test_evaluation_is_vectorized_and_closed_at_one():
    p = pwpoly.from_global([0, Fraction(1, 2), 1], [[1, 2], [0, 0, 4]])
    assert p(0.25) == pytest.approx(1.5)
    assert p(0.75) == pytest.approx(2.25)
    assert p(1.0) == pytest.approx(4.0)
    xs = np.array([[0.0, 0.25], [0.75, 1.0]])
    assert p(xs).shape == (2, 2)
    np.testing.assert_allclose(p(xs), [[1.0, 1.5], [2.25, 4.0]])


@pytest.mark.parametrize("x", [-1e-12, 1.0 + 1e-12, float("nan")])
def test_evaluation_outside_unit_interval_fails(x):
    with pytest.raises(DomainError):
        pwpoly.polynomial([1.0])(x)


def test_integrate_is_exact_on_pieces():
    assert pwpoly.integrate(pwpoly.polynomial([1, 2, 3])) == pytest.approx(3.0, abs=1e-15)
    # x on [0, 1/2), 1 - x on [1/2, 1]
    tent = pwpoly.piecewise_linear([0, Fraction(1, 2), 1], [0.0, 0.5, 0.0])
    assert pwpoly.integrate(tent) == pytest.approx(0.125, abs=1e-16)
    assert pwpoly.l2_inner(tent, tent) == pytest.approx(1 / 12, abs=1e-16)
    assert pwpoly.h1semi_inner(tent, tent) == pytest.approx(1.0, abs=1e-16)
    assert pwpoly.h1_inner(tent, tent) == pytest.approx(1.0 + 1 / 12, abs=1e-15)


def test_support_and_zero_detection():
    hat = pwpoly.piecewise_linear(
        [0, Fraction(1, 4), Fraction(3, 8), Fraction(1, 2), 1], [0.0, 0.0, 1.0, 0.0, 0.0]
    )
    assert hat.support() == (Fraction(1, 4), Fraction(1, 2))
    assert pwpoly.zero().support() is None
    assert pwpoly.subtract(hat, hat).is_zero()
    assert (hat - hat).breakpoints == (Fraction(0), Fraction(1))


def test_products_of_disjoint_supports_vanish():
    left = pwpoly.piecewise_linear([0, Fraction(1, 4), Fraction(1, 2), 1], [0, 1, 0, 0])
    right = pwpoly.piecewise_linear([0, Fraction(1, 2), Fraction(3, 4), 1], [0, 0, 1, 0])
    assert pwpoly.multiply(left, right).is_zero()
    assert pwpoly.l2_inner(left, right) == 0.0


def test_refine_keeps_the_function():
    p = pwpoly.from_global([0, Fraction(1, 2), 1], [[1, -2, 3], [0.5, 0, 1]])
    fine = pwpoly.refine(p, [Fraction(1, 8), Fraction(3, 4)])
    assert len(fine.breakpoints) == 5
    xs = np.linspace(0.0, 1.0, 65)
    np.testing.assert_allclose(fine(xs), p(xs), atol=1e-14)


def test_combine_matches_pointwise_sum():
    rng = np.random.default_rng(7)
    nodes = [Fraction(i, 8) for i in range(9)]
    funcs = [pwpoly.piecewise_linear(nodes, rng.normal(size=9)) for _ in range(4)]
    weights = rng.normal(size=4)
    total = pwpoly.combine(zip(weights, funcs))
    xs = np.linspace(0.0, 1.0, 101)
    expected = sum(w * f(xs) for w, f in zip(weights, funcs))
    np.testing.assert_allclose(total(xs), expected, atol=1e-13)
    np.testing.assert_allclose((2.0 * funcs[0])(xs), 2.0 * funcs[0](xs))
    np.testing.assert_allclose((-funcs[1])(xs), -funcs[1](xs))


def test_derivative_compacts_zero_pieces():
    flat = pwpoly.piecewise_linear([0, Fraction(1, 2), 1], [1.0, 1.0, 1.0])
    assert pwpoly.derivative(flat).breakpoints == (Fraction(0), Fraction(1))
    cubic = pwpoly.polynomial([1, 0, 0, 2])
    assert pwpoly.derivative(cubic)(0.5) == pytest.approx(1.5)


def test_scale_by_zero_is_zero():
    assert pwpoly.scale(pwpoly.polynomial([1, 2]), 0.0).is_zero()


def _random_piecewise(rng: np.random.Generator, level: int, bound: float) -> PiecewisePoly:
    """Cubic pieces, in local coordinates, on the uniform grid of step ``2**-level``."""
    breakpoints = tuple(Fraction(i, 2**level) for i in range(2**level + 1))
    pieces = tuple(
        tuple(float(c) for c in rng.uniform(-bound, bound, size=4)) for _ in range(2**level)
    )
    return PiecewisePoly(breakpoints, pieces)


def test_integrate_is_linear():
    rng = np.random.default_rng(11)
    for _ in range(25):
        p, q = _random_piecewise(rng, 3, 10.0), _random_piecewise(rng, 4, 10.0)
        a, b = rng.uniform(-1, 1, size=2)
        lhs = pwpoly.integrate(pwpoly.combine([(a, p), (b, q)]))
        rhs = a * pwpoly.integrate(p) + b * pwpoly.integrate(q)
        assert lhs == pytest.approx(rhs, abs=1e-14)


def test_integral_of_derivative_is_the_increment():
    rng = np.random.default_rng(12)
    nodes = [Fraction(i, 16) for i in range(17)]
    for _ in range(10):
        kink = pwpoly.piecewise_linear(nodes, rng.uniform(-1, 1, size=17))
        p = pwpoly.add(kink, pwpoly.polynomial(rng.uniform(-1, 1, size=4)))
        increment = float(p(1.0)) - float(p(0.0))
        assert pwpoly.integrate(pwpoly.derivative(p)) == pytest.approx(increment, abs=1e-13)


def test_multiply_commutes_and_matches_pointwise_product():
    rng = np.random.default_rng(13)
    xs = rng.uniform(0.0, 1.0, size=100)
    for _ in range(5):
        p, q = _random_piecewise(rng, 2, 1.0), _random_piecewise(rng, 3, 1.0)
        pq, qp = pwpoly.multiply(p, q), pwpoly.multiply(q, p)
        assert pq.breakpoints == qp.breakpoints
        np.testing.assert_allclose(pq(xs), qp(xs), atol=1e-13, rtol=0)
        np.testing.assert_allclose(pq(xs), p(xs) * q(xs), atol=1e-13, rtol=0)
