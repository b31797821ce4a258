import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from intermap_lab import (Branch, CircleParams, IntervalParams, MapSpec, deriv_circle,
                          deriv_interval, eval_circle, eval_interval, evaluate, invert_branch,
                          iterate_orbit, lyapunov_estimate, periodic_points)
from intermap_lab.errors import DomainError, ParameterError

CIRCLE2 = MapSpec.circle(2.0)
HEMMER = MapSpec.hemmer()
gammas = st.floats(1.05, 6.0)
kappas = st.floats(0.05, 0.95)
points = st.floats(-1.0, 1.0, allow_nan=False)


# ------------------------------------------------------------- parameters

def test_gamma_must_exceed_one():
    with pytest.raises(ParameterError, match="gamma must be > 1"):
        CircleParams(1.0)
    with pytest.raises(ParameterError):
        IntervalParams(0.5, 0.9)


def test_kappa_range():
    for k in (0.0, 1.0, -0.2):
        with pytest.raises(ParameterError):
            IntervalParams(k, 2.0)


def test_interval_derived_constants_hemmer():
    p = IntervalParams(0.5, 2.0)
    assert p.a == pytest.approx(0.25)
    assert p.b == pytest.approx(2.0)
    assert p.y0 == 0.0


@given(kappas, gammas)
def test_interval_constants_ranges(k, g):
    p = IntervalParams(k, g)
    assert 0 < p.a < 1 and p.b > 1
    assert p.b == pytest.approx(p.a ** -k)


def test_solver_tol_bounds():
    with pytest.raises(ParameterError):
        MapSpec.circle(2.0, solver_tol=1e-9)
    with pytest.raises(ParameterError):
        MapSpec.circle(2.0, solver_tol=1e-16)


# ------------------------------------------------------------ circle values

@pytest.mark.parametrize("x, y", [(0.25, 0.0), (1.0, 1.0), (0.5625, 0.5)])
def test_circle_gamma2_values(x, y):
    assert eval_circle(CircleParams(2.0), x) == pytest.approx(y, abs=1e-14)


def test_circle_gamma3_knot():
    assert eval_circle(CircleParams(3.0), 1 / 6) == pytest.approx(0.0, abs=1e-14)


def test_circle_closed_form_gamma2():
    x = np.random.default_rng(0).uniform(0, 1, 10**5)
    assert np.max(np.abs(eval_circle(CIRCLE2, x) - (2 * np.sqrt(x) - 1))) <= 1e-12


def test_hemmer_closed_form():
    x = np.random.default_rng(1).uniform(-1, 1, 10**5)
    assert np.max(np.abs(eval_interval(HEMMER, x) - (1 - 2 * np.sqrt(np.abs(x))))) <= 1e-12


def test_cusp_side_by_signed_zero():
    assert eval_circle(CIRCLE2, 0.0) == -1.0
    assert eval_circle(CIRCLE2, -0.0) == 1.0
    assert eval_interval(HEMMER, 0.0) == 1.0


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_circle(CIRCLE2, 1.5)
    with pytest.raises(DomainError):
        eval_interval(HEMMER, -1.01)
    with pytest.raises(DomainError):
        deriv_circle(CIRCLE2, 0.0)


@settings(max_examples=60, deadline=None)
@given(gammas, st.lists(points, min_size=1, max_size=30))
def test_circle_odd_symmetry(g, xs):
    spec = MapSpec.circle(g)
    x = np.array([v for v in xs if v != 0.0] or [0.3])
    assert np.array_equal(evaluate(spec, -x), -evaluate(spec, x))


@settings(max_examples=60, deadline=None)
@given(kappas, gammas, st.lists(points, min_size=1, max_size=30))
def test_interval_even_symmetry(k, g, xs):
    spec = MapSpec.interval(k, g)
    x = np.array(xs)
    assert np.array_equal(evaluate(spec, -x), evaluate(spec, x))


def test_symmetry_bulk():
    x = np.random.default_rng(2).uniform(-1, 1, 10**5)
    assert np.array_equal(evaluate(MapSpec.circle(2.7), -x), -evaluate(MapSpec.circle(2.7), x))
    s = MapSpec.interval(0.7, 2.0)
    assert np.array_equal(evaluate(s, -x), evaluate(s, x))


@pytest.mark.parametrize("x, y", [(0.25, 0.0), (-1.0, -1.0), (1.0, -1.0)])
def test_hemmer_values(x, y):
    assert eval_interval(HEMMER, x) == pytest.approx(y, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(gammas, st.floats(1e-3, 1.0))
def test_circle_implicit_equations(g, x):
    y = eval_circle(MapSpec.circle(g), x)
    if x <= 1 / (2 * g):
        assert x == pytest.approx((1 + y) ** g / (2 * g), rel=1e-10, abs=1e-14)
    else:
        assert x == pytest.approx(y + (1 - y) ** g / (2 * g), abs=1e-13)


# ------------------------------------------------------------ derivatives

def test_circle_derivatives_gamma2():
    assert deriv_circle(CIRCLE2, 0.25) == pytest.approx(2.0)
    assert deriv_circle(CIRCLE2, 1.0) == pytest.approx(1.0)
    assert deriv_circle(CIRCLE2, 0.25, 2) == pytest.approx(-4.0)


def test_interval_derivatives_hemmer():
    assert deriv_interval(HEMMER, 0.25) == pytest.approx(-2.0)
    assert deriv_interval(HEMMER, -0.25) == pytest.approx(2.0)
    assert deriv_interval(HEMMER, -1.0) == pytest.approx(1.0)


def test_derivative_symmetries():
    x = np.random.default_rng(3).uniform(0.01, 1, 1000)
    s = MapSpec.circle(2.5)
    assert np.allclose(deriv_circle(s, -x), deriv_circle(s, x), rtol=1e-12)
    assert np.allclose(deriv_circle(s, -x, 2), -deriv_circle(s, x, 2), rtol=1e-12)


@pytest.mark.parametrize("spec", [MapSpec.circle(1.5), MapSpec.circle(3.0),
                                  MapSpec.interval(0.3, 2.5), MapSpec.interval(0.8, 1.5)])
def test_expansion(spec):
    x = np.linspace(-1, 1, 20001)
    x = x[(x != 0) & (np.abs(x) != 1)]
    fn = deriv_circle if spec.kind == "circle" else deriv_interval
    d = np.abs(fn(spec, x))
    assert np.all(d > 1.0)


@pytest.mark.parametrize("spec", [MapSpec.circle(2.3), MapSpec.interval(0.6, 1.8)])
def test_derivative_matches_finite_difference(spec):
    x = np.array([-0.83, -0.41, -0.07, 0.12, 0.55, 0.91])
    h = 1e-6
    fd = (evaluate(spec, x + h) - evaluate(spec, x - h)) / (2 * h)
    fn = deriv_circle if spec.kind == "circle" else deriv_interval
    assert np.allclose(fn(spec, x), fd, rtol=1e-6)
    fd2 = (fn(spec, x + h) - fn(spec, x - h)) / (2 * h)
    assert np.allclose(fn(spec, x, 2), fd2, rtol=1e-5)


@pytest.mark.parametrize("g", [1.5, 2.0, 3.0])
def test_cusp_local_behaviour(g):
    spec = MapSpec.circle(g)
    for x in (1e-4, 1e-6, 1e-8):
        ratio = (eval_circle(spec, x) + 1) / x ** (1 / g)
        assert ratio == pytest.approx((2 * g) ** (1 / g), rel=0.01)


# --------------------------------------------------------------- inverses

def test_inverse_examples():
    assert invert_branch(CIRCLE2, Branch.RIGHT, 0.0) == pytest.approx(0.25)
    assert invert_branch(CIRCLE2, Branch.LEFT, 0.0) == pytest.approx(-0.25)
    assert invert_branch(HEMMER, Branch.LEFT, -0.25) == pytest.approx(-25 / 64)


@pytest.mark.parametrize("spec", [MapSpec.circle(1.3), MapSpec.circle(2.0), MapSpec.circle(4.0),
                                  MapSpec.hemmer(), MapSpec.interval(0.8, 2.2)])
@pytest.mark.parametrize("branch", [Branch.LEFT, Branch.RIGHT])
def test_round_trip(spec, branch):
    y = np.random.default_rng(4).uniform(-1, 1, 10**5)
    x = invert_branch(spec, branch, y)
    assert np.max(np.abs(evaluate(spec, x) - y)) <= 10 * spec.solver_tol + 1e-15


def test_inverse_domain():
    with pytest.raises(DomainError):
        invert_branch(CIRCLE2, "left", 1.2)


# ---------------------------------------------------------------- orbits

def test_orbit_examples():
    assert iterate_orbit(CIRCLE2, 0.5625, 1).final == pytest.approx(0.5)
    assert iterate_orbit(MapSpec.circle(3.1), 0.3, 0).final == 0.3
    assert iterate_orbit(CIRCLE2, 0.12, 2).final == pytest.approx(-0.108476, abs=1e-6)


def test_orbit_points_in_range():
    o = iterate_orbit(MapSpec.interval(0.7, 2.0), 0.3, 5000, store=True)
    assert o.points.size == 5001
    assert np.all(np.abs(o.points) <= 1.0)
    assert not np.any(o.points == 0.0)


def test_lebesgue_invariance_chi_square():
    x = np.random.default_rng(5).uniform(-1, 1, 10**6)
    y = evaluate(MapSpec.circle(2.5), x)
    counts, _ = np.histogram(y, bins=50, range=(-1, 1))
    assert stats.chisquare(counts).pvalue > 0.01


def test_lyapunov_requires_steps():
    with pytest.raises(ValueError):
        lyapunov_estimate(CIRCLE2, 1, 0, 0)


def test_lyapunov_small_run():
    est = lyapunov_estimate(CIRCLE2, 200, 2000, seed=1)
    assert math.isfinite(est.value) and est.stderr > 0
    assert est.value == pytest.approx(0.5, abs=0.1)


@pytest.mark.parametrize("spec, count", [(CIRCLE2, 104), (HEMMER, 105)])
def test_periodic_point_count(spec, count):
    # Fix(T^k) has 2^k - 1 points on the circle and 2^k for S; Moebius
    # inversion over k <= 6, minus the neutral point, gives the counts
    p = periodic_points(spec, 6)
    assert p.size == count
    y, err = p.copy(), np.full(p.size, np.inf)
    for _ in range(6):
        y = evaluate(spec, y)
        err = np.minimum(err, np.abs(y - p))
    assert err.max() <= 1e-10


def test_circle_period_two_orbit():
    # T(-q) = q and T(q) = -q for q = (sqrt 2 - 1)^2
    q = 3 - 2 * math.sqrt(2)
    p = periodic_points(CIRCLE2, 2)
    assert p == pytest.approx([-q, q], abs=1e-12)
