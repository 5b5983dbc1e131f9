import math

import numpy as np
import pytest

from hypcircle.errors import ObservableError, SpectralError
from hypcircle.fuchsian import sample_quotient_array
from hypcircle.observables import (FOUR_PI, ConstantObservable, FiberAverage, GammaBump, ModelEigenfunction,
                                   Mollifier, Observable, RightTranslate, SpectralCase, SpectralParams,
                                   TangentialDerivative, bump_mass, c1_norm_proxy, finite_difference, nu_from_mu,
                                   unfolded_average)
from hypcircle.sl2 import THETA, U, V, X, Y, exp_lie, iwasawa_coords, rotation


class OpaqueObservable(Observable):
    """Hides analytic derivatives so the finite-difference defaults are used."""

    def __init__(self, inner):
        self.inner = inner

    def evaluate_many(self, gs):
        return self.inner.evaluate_many(gs)


@pytest.mark.parametrize("nu,mu,case", [
    (0.5, 0.1875, SpectralCase.BELOW_QUARTER),
    (2j, 1.25, SpectralCase.ABOVE_QUARTER),
    (0.0, 0.25, SpectralCase.QUARTER),
    (1.0, 0.0, SpectralCase.ZERO),
    (1.5, -0.3125, SpectralCase.NEGATIVE),
])
def test_spectral_params_cases(nu, mu, case):
    params = SpectralParams.from_nu(nu)
    assert params.mu == pytest.approx(mu, abs=1e-15)
    assert params.case == case
    assert SpectralParams.from_mu(mu).nu == pytest.approx(complex(nu), abs=1e-12)


def test_nu_from_mu_picks_the_right_half_line():
    assert nu_from_mu(1.25) == pytest.approx(2j)
    assert nu_from_mu(0.1875) == pytest.approx(0.5)


@pytest.mark.parametrize("kwargs", [
    dict(mu=0.1875, nu=-0.5),
    dict(mu=0.1875, nu=0.5 + 0.1j),
    dict(mu=0.2, nu=0.5),
    dict(mu=0.1875, nu=0.5, theta=0.0),
    dict(mu=0.1875, nu=0.5, theta=FOUR_PI + 0.1),
])
def test_spectral_params_validation(kwargs):
    with pytest.raises(SpectralError):
        SpectralParams(**kwargs)


def test_with_theta_keeps_spectral_data():
    params = SpectralParams.from_nu(2j, n=1).with_theta(math.pi)
    assert params.theta == math.pi
    assert params.n == 1
    assert params.case == SpectralCase.ABOVE_QUARTER


def test_weight_zero_eigenfunction_is_a_power_of_height(random_elements):
    gs = random_elements(50)
    f = ModelEigenfunction(0.5)
    height = 1.0 / (gs[:, 1, 0] ** 2 + gs[:, 1, 1] ** 2)
    np.testing.assert_allclose(f.evaluate_many(gs), height ** 0.75, rtol=1e-13)


@pytest.mark.parametrize("nu,n", [(0.5, 0), (0.3, 2), (2j, 0), (1.5j, -1), (0.0, 1)])
def test_casimir_eigenvalue(random_elements, nu, n):
    gs = random_elements(40)
    f = ModelEigenfunction(nu, n)
    values = f.evaluate_many(gs)
    np.testing.assert_allclose(f.casimir_many(gs), f.params.mu * values, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("n", [0, 1, -2, 3])
def test_theta_weight(random_elements, n):
    gs = random_elements(40)
    f = ModelEigenfunction(0.4, n)
    np.testing.assert_allclose(f.lie_derivative_many(THETA, gs), 0.5j * n * f.evaluate_many(gs),
                               rtol=1e-10, atol=1e-13)


@pytest.mark.parametrize("W", [X, U, V, THETA, Y])
def test_analytic_derivatives_match_finite_differences(random_elements, W):
    gs = random_elements(20, x_scale=1.0, y_range=(0.5, 2.0))
    f = ModelEigenfunction(1.2j, 1)
    np.testing.assert_allclose(f.lie_derivative_many(W, gs), finite_difference(f, W, gs), rtol=1e-7, atol=1e-9)
    opaque = OpaqueObservable(f)
    np.testing.assert_allclose(opaque.lie_derivative_many(W, gs), f.lie_derivative_many(W, gs),
                               rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(opaque.second_lie_derivative_many(W, U, gs), f.second_lie_derivative_many(W, U, gs),
                               rtol=1e-5, atol=1e-6)


def test_finite_difference_casimir(random_elements):
    gs = random_elements(10, x_scale=1.0, y_range=(0.5, 2.0))
    f = ModelEigenfunction(0.5)
    np.testing.assert_allclose(OpaqueObservable(f).casimir_many(gs), f.params.mu * f.evaluate_many(gs),
                               rtol=1e-5, atol=1e-6)


def test_finite_difference_order_is_checked(base_point):
    with pytest.raises(ObservableError):
        finite_difference(ModelEigenfunction(0.5), X, base_point, order=3)


def test_right_translate(random_elements):
    gs = random_elements(20)
    k = iwasawa_coords(0.3, 1.4, 0.9)
    f = ModelEigenfunction(0.6, 1)
    translated = RightTranslate(f, k)
    np.testing.assert_allclose(translated.evaluate_many(gs), f.evaluate_many(gs @ k.array), rtol=1e-13)
    np.testing.assert_allclose(translated.lie_derivative_many(U, gs), finite_difference(translated, U, gs),
                               rtol=1e-7, atol=1e-9)


def test_fiber_average_projects_to_weight_zero(random_elements):
    gs = random_elements(20)
    np.testing.assert_allclose(FiberAverage(ModelEigenfunction(0.5, 2), nodes=64).evaluate_many(gs), 0.0,
                               atol=1e-12)
    f = ModelEigenfunction(0.5)
    np.testing.assert_allclose(FiberAverage(f, nodes=16).evaluate_many(gs), f.evaluate_many(gs), rtol=1e-12)


@pytest.mark.parametrize("width", [0.2, 0.4])
def test_bump_mass_routes_agree(width):
    cartan = bump_mass(width, tol=1e-10, method="cartan")
    assert cartan == pytest.approx(bump_mass(width, tol=1e-10, method="iwasawa"), rel=1e-6)


def test_bump_mass_unknown_method():
    with pytest.raises(ObservableError):
        bump_mass(0.2, method="polar")


@pytest.mark.parametrize("width", [0.0, -0.1, 0.6])
def test_bump_width_is_checked(group_237, width):
    with pytest.raises(ObservableError):
        GammaBump(group_237, iwasawa_coords(0.0, 1.15, 0.5), width)


def test_bump_peaks_at_center(small_bump):
    assert small_bump.evaluate(small_bump.center).real == pytest.approx(1.0, abs=1e-12)


def test_bump_is_gamma_invariant(group_237, small_bump, random_elements):
    gs = random_elements(30, x_scale=0.3, y_range=(0.8, 1.6))
    values = small_bump.evaluate_many(gs)
    for gamma in group_237.generators:
        np.testing.assert_allclose(small_bump.evaluate_many(gamma.array @ gs), values, atol=1e-10)
        np.testing.assert_allclose(small_bump.evaluate_many(gamma.inverse().array @ gs), values, atol=1e-10)


def test_bump_derivatives_match_finite_differences(small_bump):
    c = small_bump.center
    gs = np.stack([(c @ exp_lie(W, 0.05)).array for W in (X, U, V, THETA)])
    for W in (X, U, THETA):
        np.testing.assert_allclose(small_bump.lie_derivative_many(W, gs), finite_difference(small_bump, W, gs),
                                   rtol=1e-6, atol=1e-7)
    np.testing.assert_allclose(small_bump.second_lie_derivative_many(X, U, gs),
                               OpaqueObservable(small_bump).second_lie_derivative_many(X, U, gs),
                               rtol=1e-4, atol=1e-4)


@pytest.mark.slow
def test_bump_space_average_by_monte_carlo(group_237, small_bump):
    gs = sample_quotient_array(group_237, 40_000, seed=11)
    values = small_bump.evaluate_many(gs).real
    stderr = values.std() / math.sqrt(values.size)
    assert abs(values.mean() - small_bump.space_average()) < 4.0 * stderr


@pytest.mark.parametrize("delta", [0.0, 1.5])
def test_mollifier_scale_is_checked(group_237, delta):
    with pytest.raises(ObservableError):
        Mollifier(group_237, delta)


def test_mollifier_has_unit_mass(group_237):
    psi = Mollifier(group_237, 0.3)
    assert psi.mass() == pytest.approx(1.0, rel=1e-8)
    assert psi.space_average() == pytest.approx(1.0 / group_237.covol_surface)


def test_mollifier_is_right_k_invariant(group_237, random_elements):
    psi = Mollifier(group_237, 0.5)
    gs = random_elements(20, x_scale=0.5, y_range=(0.5, 2.0))
    np.testing.assert_allclose(psi.evaluate_many(gs @ rotation(1.1).array), psi.evaluate_many(gs), atol=1e-10)


@pytest.mark.slow
def test_mollifier_average_by_monte_carlo(group_237):
    psi = Mollifier(group_237, 0.5)
    values = psi.evaluate_many(sample_quotient_array(group_237, 40_000, seed=3)).real
    stderr = values.std() / math.sqrt(values.size)
    assert abs(values.mean() - psi.space_average()) < 4.0 * stderr


def test_tangential_derivative_needs_a_k_invariant_base(small_bump):
    with pytest.raises(ObservableError):
        TangentialDerivative(small_bump)
    with pytest.raises(ObservableError):
        TangentialDerivative(ModelEigenfunction(0.5))


def test_tangential_derivative_averages_to_its_offset(group_237, random_elements):
    F = TangentialDerivative(Mollifier(group_237, 0.5), 1.0)
    assert F.gamma_invariant and F.full_circle_flat
    assert unfolded_average(F) == 1.0
    np.testing.assert_allclose(FiberAverage(F, 16).evaluate_many(random_elements(6)), 1.0, atol=1e-6)


def test_unfolded_average_requires_invariance():
    with pytest.raises(ObservableError):
        unfolded_average(ModelEigenfunction(0.5))
    assert unfolded_average(ConstantObservable(2.0)) == 2.0


def test_c1_norm_proxy(group_237, base_point):
    assert c1_norm_proxy(ConstantObservable(-3.0), points=base_point) == 3.0
    with pytest.raises(ObservableError):
        c1_norm_proxy(ConstantObservable(1.0))
    assert c1_norm_proxy(ConstantObservable(1.0), group_237, n_points=32) == 1.0
