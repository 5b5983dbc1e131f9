import math

import numpy as np
import pytest

from hypcircle.checks import BoundednessCheck, TrendCheck
from hypcircle.circle_average import k_theta
from hypcircle.errors import ObservableError, SamplingError, SpectralError
from hypcircle.observables import (FOUR_PI, ConstantObservable, ModelEigenfunction, Mollifier, SpectralParams,
                                  TangentialDerivative)
from hypcircle.sl2 import THETA, diagonal, exp_lie, iwasawa_coords
from hypcircle.stats import (DeviationScaling, EmpiricalLaw, consecutive_distances, coupling_bound, decay_rate,
                             deviation_law, fit_decay, levy_prokhorov, nocl_representation,
                             shrinking_arc_average, theta_scaling)


def law(values):
    return EmpiricalLaw(samples=np.asarray(values, dtype=float))


def test_empirical_law_sorts_and_summarises():
    L = law([3.0, -1.0, 2.0, 0.0])
    np.testing.assert_array_equal(L.samples, [-1.0, 0.0, 2.0, 3.0])
    assert len(L) == 4
    assert L.max_abs == 3.0
    assert L.mean == 1.0
    assert L.quantile(0.5) == 1.0


@pytest.mark.parametrize("values", [[1.0], [0.0, math.nan], [math.inf, 1.0]])
def test_empirical_law_rejects_bad_samples(values):
    with pytest.raises(SamplingError):
        law(values)


def test_fit_decay_recovers_exponent():
    ts = np.arange(1.0, 8.0)
    fit = fit_decay(ts, 3.0 * np.exp(-0.5 * ts))
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert not fit.degenerate


def test_fit_decay_drops_points_below_floor():
    ts = np.array([1.0, 2.0, 3.0, 4.0])
    fit = fit_decay(ts, [1e-1, 1e-2, 1e-12, 1e-13], floor=1e-9)
    assert fit.dropped == [3.0, 4.0]
    assert fit.slope == pytest.approx(-math.log(10.0))
    assert fit_decay(ts, [1e-1, 1e-12, 1e-12, 1e-12], floor=1e-9).degenerate


def test_lp_distance_between_point_masses():
    assert levy_prokhorov(law([0.0, 0.0]), law([0.3, 0.3])) == pytest.approx(0.3, abs=1e-12)
    assert levy_prokhorov(law([0.0, 0.0]), law([5.0, 5.0])) == 1.0


def test_lp_distance_from_a_mass_deficit():
    assert levy_prokhorov(law([0.0] * 4), law([0.0, 0.0, 0.0, 5.0])) == pytest.approx(0.25, abs=1e-12)


def test_lp_distance_of_identical_laws_is_zero(rng):
    x = rng.normal(size=50)
    assert levy_prokhorov(law(x), law(x.copy())) == 0.0


def test_lp_distance_is_a_metric(rng):
    a, b, c = (law(rng.normal(loc, 1.0, 60)) for loc in (0.0, 0.2, 0.5))
    ab = levy_prokhorov(a, b)
    assert ab == pytest.approx(levy_prokhorov(b, a), abs=1e-9)
    assert levy_prokhorov(a, c) <= ab + levy_prokhorov(b, c) + 1e-9
    assert 0.0 < ab <= 1.0


def test_lp_distances_of_a_shrinking_family_decrease():
    base = np.array([-0.8, -0.2, 0.3, 0.9])
    laws = [law(base * s) for s in (1.0, 0.5, 0.25)]
    distances = consecutive_distances(laws)
    assert len(distances) == 2
    assert distances[1] < distances[0]
    assert TrendCheck("LP distance decreases").run(distances).passed
    assert not TrendCheck("LP distance decreases").run(consecutive_distances(laws[::-1])).passed
    assert consecutive_distances(laws[:1]) == []


def test_coupling_bound_dominates_lp_distance(rng):
    x = rng.normal(size=80)
    x_prime = x + rng.normal(scale=0.05, size=80)
    x_prime[:5] += 3.0
    assert coupling_bound(x, x_prime) >= levy_prokhorov(law(x), law(x_prime)) - 1e-9
    assert coupling_bound([0.0] * 4, [0.0, 0.0, 0.0, 5.0]) == pytest.approx(0.25)
    assert coupling_bound(x, x) == 0.0
    with pytest.raises(SamplingError):
        coupling_bound([], [])


def test_deviation_scaling_factors():
    assert DeviationScaling.SUPERQUARTER.factor(4.0) == pytest.approx(math.exp(2.0))
    assert DeviationScaling.QUARTER.factor(4.0) == pytest.approx(math.exp(2.0) / 4.0)
    assert DeviationScaling.SUBQUARTER.factor(4.0, nu_f=0.5) == pytest.approx(math.exp(1.0))
    with pytest.raises(SpectralError):
        DeviationScaling.SUBQUARTER.factor(4.0)


def test_decay_rate_of_full_circle_averages(base_point):
    fit = decay_rate(ModelEigenfunction(0.5), base_point, FOUR_PI, [4.0, 5.0, 6.0, 7.0, 8.0], tol=1e-11,
                     reference=0.0)
    assert -0.3 < fit.slope < -0.2


def test_decay_rate_needs_an_increasing_grid(base_point):
    with pytest.raises(SpectralError):
        decay_rate(ModelEigenfunction(0.5), base_point, math.pi, [3.0, 2.0])


def test_decay_rate_of_a_constant_is_degenerate(base_point):
    fit = decay_rate(ConstantObservable(1.0), base_point, math.pi, [1.0, 2.0, 3.0])
    assert fit.degenerate


def test_shrinking_arcs_are_additive(base_point):
    f = ModelEigenfunction(0.5, 1)
    whole = shrinking_arc_average(f, base_point, lambda t: 0.5, lambda t: 3.5, 2.0, tol=1e-11).value
    left = shrinking_arc_average(f, base_point, lambda t: 0.5, lambda t: 1.5, 2.0, tol=1e-11).value
    right = k_theta(f, base_point @ exp_lie(THETA, 1.5), 2.0, 2.0, tol=1e-11).value
    assert 3.0 * whole == pytest.approx(left + 2.0 * right, abs=1e-9)


@pytest.mark.parametrize("lo,hi", [(1.0, 1.0), (-0.1, 1.0), (1.0, FOUR_PI + 1.0), (1.0, 1.0 + 1e-8)])
def test_shrinking_arc_window_is_checked(base_point, lo, hi):
    with pytest.raises(SpectralError):
        shrinking_arc_average(ModelEigenfunction(0.5), base_point, lambda t: lo, lambda t: hi, 1.0)


def test_deviation_law_needs_an_invariant_observable(group_237):
    with pytest.raises(ObservableError):
        deviation_law(ModelEigenfunction(0.5), math.pi, 2.0, 8, seed=1, G=group_237)
    with pytest.raises(ObservableError):
        deviation_law(ConstantObservable(1.0), math.pi, 2.0, 8, seed=1)


def test_deviation_law_is_reproducible(small_bump):
    first = deviation_law(small_bump, math.pi, 1.0, 24, seed=5, tol=1e-6)
    again = deviation_law(small_bump, math.pi, 1.0, 24, seed=5, tol=1e-6, workers=2)
    np.testing.assert_array_equal(first.samples, again.samples)
    assert len(first) == 24
    assert first.seed == 5


def test_constant_deviation_law_is_a_point_mass(group_237):
    L = deviation_law(ConstantObservable(2.0), math.pi, 2.0, 8, seed=1, G=group_237)
    assert L.max_abs < 1e-12


def test_geodesic_difference_for_constants(base_point):
    lhs, rhs = nocl_representation(ConstantObservable(3.0), base_point, math.pi, 3.0)
    assert abs(lhs) < 1e-12
    assert abs(rhs) < 1e-12
    with pytest.raises(ObservableError):
        nocl_representation(ModelEigenfunction(0.5), base_point, math.pi, 3.0)


@pytest.mark.slow
def test_theta_scaling_of_a_constant(group_237, base_point):
    params = SpectralParams.from_nu(1.0)
    scaling = theta_scaling(ConstantObservable(1.0), base_point, params, [math.pi, FOUR_PI], group=group_237)
    assert scaling.thetas == [math.pi, FOUR_PI]
    np.testing.assert_allclose(scaling.D_minus, [1.0, 1.0], atol=1e-6)
    np.testing.assert_allclose(scaling.scaled(), [math.pi, FOUR_PI], rtol=1e-5)


@pytest.mark.slow
def test_theta_scaling_of_a_model_eigenfunction():
    p = iwasawa_coords(0.0, 1.0, 7.0 * math.pi / 4.0)
    params = SpectralParams.from_nu(0.5)
    thetas = [math.pi, 2.0 * math.pi, FOUR_PI]
    scaling = theta_scaling(ModelEigenfunction(0.5), p, params, thetas, tol=1e-6)
    C = math.sqrt(math.pi) * math.gamma(0.25) / math.gamma(0.75)
    np.testing.assert_allclose(np.abs(scaling.D_minus), [2.0 * C / math.pi, C / math.pi, C / math.pi], rtol=2e-2)
    assert BoundednessCheck("theta |D+-|", 3.0).run(scaling.scaled()).passed


@pytest.fixture(scope="module")
def tangent_observable(group_237):
    return TangentialDerivative(Mollifier(group_237, 0.5), 1.0)


@pytest.mark.slow
def test_full_circle_representation_vanishes(tangent_observable, base_point):
    lhs = []
    for T in (2.0, 4.0, 6.0, 8.0):
        left, right = nocl_representation(tangent_observable, base_point, FOUR_PI, T, tol=1e-7, fiber_nodes=16)
        assert abs(right) < 1e-6
        lhs.append(abs(left))
    assert max(lhs) < 1e-2


@pytest.mark.slow
@pytest.mark.parametrize("T", [2.0, 4.0, 6.0, 8.0])
def test_half_circle_representation_is_bounded(tangent_observable, base_point, T):
    psi = tangent_observable.base
    start = psi.evaluate(base_point @ diagonal(T))
    end = psi.evaluate(base_point @ exp_lie(THETA, math.pi) @ diagonal(T))
    expected = -2.0 / (math.pi * -math.expm1(-2.0 * T)) * (end - start)
    left, right = nocl_representation(tangent_observable, base_point, math.pi, T, tol=1e-7, fiber_nodes=16)
    assert right == pytest.approx(0.0, abs=1e-5)
    assert left == pytest.approx(expected, abs=1e-3)
    assert abs(left - right) <= 8.0 * psi.normalization
