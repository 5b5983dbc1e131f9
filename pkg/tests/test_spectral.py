import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from hypcircle.circle_average import G_coefficient_many, k_theta, k_theta_derivatives
from hypcircle.errors import ObservableError, SpectralError
from hypcircle.observables import ConstantObservable, SpectralCase, SpectralParams, weighted_eigenfunction
from hypcircle.spectral import (KAPPA_0, ForcingEnvelope, choose_horizon, compute_coefficients,
                                compute_coefficients_from_forcing, expansion_eval, initial_amplitudes, initial_data,
                                manufacture_forcing, remainder_bound, solve_cauchy, tail_bound)

MUS = [1.25, 0.25, 0.1875, 0.0, -0.3125]


def _reference(mu, G, y1, y1p, t):
    def rhs(s, state):
        y, dy = state
        return [dy, -dy - mu * y + math.exp(-s) * float(np.real(G(np.array([s]))[0]))]
    sol = solve_ivp(rhs, (1.0, t), [y1, y1p], method="DOP853", rtol=1e-12, atol=1e-13)
    return sol.y[0, -1]


@pytest.mark.parametrize("mu", MUS)
def test_cauchy_solution_matches_ode_solver(mu):
    G = lambda xi: 1.0 + np.cos(np.asarray(xi, dtype=float))
    value = solve_cauchy(mu, G, 1.0, -0.5, 5.0, tol=1e-11)
    assert value.real == pytest.approx(_reference(mu, G, 1.0, -0.5, 5.0), abs=1e-9)
    assert abs(value.imag) < 1e-10


@pytest.mark.parametrize("mu", MUS)
def test_cauchy_solution_reproduces_initial_data(mu):
    assert solve_cauchy(mu, lambda xi: np.zeros_like(xi), 0.7, 0.2, 1.0) == pytest.approx(0.7, abs=1e-13)


def test_cauchy_rejects_early_times():
    with pytest.raises(SpectralError):
        solve_cauchy(0.1875, lambda xi: xi, 1.0, 0.0, 0.5)


@pytest.mark.parametrize("mu", MUS)
def test_manufactured_forcing_recovers_the_solution(mu):
    y = lambda t: np.exp(-0.3 * t) * np.cos(2.0 * t)
    dy = lambda t: np.exp(-0.3 * t) * (-0.3 * np.cos(2.0 * t) - 2.0 * np.sin(2.0 * t))
    ddy = lambda t: np.exp(-0.3 * t) * ((0.09 - 4.0) * np.cos(2.0 * t) + 1.2 * np.sin(2.0 * t))
    G = manufacture_forcing(y, dy, ddy, mu)
    for t in (2.0, 4.5, 6.0):
        value = solve_cauchy(mu, G, float(y(1.0)), float(dy(1.0)), t, tol=1e-11)
        assert value.real == pytest.approx(float(y(t)), abs=1e-9)


@pytest.mark.parametrize("mu", [1.25, 0.25, 0.1875])
def test_unforced_expansion_is_exact(mu):
    params = SpectralParams.from_mu(mu)
    zero = lambda xi: np.zeros_like(np.asarray(xi, dtype=float))
    coeffs = compute_coefficients_from_forcing(zero, 1.0, -0.3, params, tol=1e-10)
    assert coeffs.truncation_T == 1.0
    for t in (1.0, 3.0, 7.0):
        assert expansion_eval(coeffs, t) == pytest.approx(solve_cauchy(mu, zero, 1.0, -0.3, t), abs=1e-13)


def test_zero_case_holds_the_forcing_integral_past_the_horizon():
    params = SpectralParams.from_nu(1.0)
    envelope = ForcingEnvelope(scale=1.0, rate=1.0)
    coeffs = compute_coefficients_from_forcing(lambda xi: np.exp(-np.asarray(xi, dtype=float)), 1.0, 0.0, params,
                                               tol=1e-2, envelope=envelope, horizon=3.0)
    assert coeffs.truncation_T == 3.0

    def untruncated(t):
        return coeffs.D_minus - math.exp(-t) * (math.exp(-1.0) - math.exp(-t))

    assert expansion_eval(coeffs, 2.5) == pytest.approx(untruncated(2.5), abs=1e-7)
    gap = abs(expansion_eval(coeffs, 6.0) - untruncated(6.0))
    assert gap == pytest.approx(math.exp(-6.0) * (math.exp(-3.0) - math.exp(-6.0)), rel=1e-4)
    assert gap <= (1.0 + envelope.rate) / math.e * coeffs.tail_bound


def test_above_quarter_coefficients_are_real_for_real_data():
    params = SpectralParams.from_nu(2j)
    a_plus, a_minus = initial_amplitudes(params, 1.0, 0.4)
    assert a_plus == pytest.approx(np.conj(a_minus))
    coeffs = compute_coefficients_from_forcing(lambda xi: np.exp(-np.asarray(xi)), 1.0, 0.4, params, tol=1e-10)
    assert abs(coeffs.D_plus.imag) < 1e-12
    assert abs(coeffs.D_minus.imag) < 1e-12


@pytest.mark.parametrize("mu", [1.25, 0.25, 0.1875, 0.0])
def test_remainder_stays_under_its_envelope(mu):
    params = SpectralParams.from_mu(mu)
    G = lambda xi: 3.0 * np.exp(-0.3 * np.asarray(xi, dtype=float))
    coeffs = compute_coefficients_from_forcing(G, 0.8, -0.1, params, tol=1e-10)
    assert coeffs.envelope.rate == pytest.approx(0.3, rel=1e-6)
    assert coeffs.tail_bound <= 1e-10 * (1.0 + 1e-3)
    remainders = []
    for t in (2.0, 4.0, 6.0, 8.0):
        remainder = abs(solve_cauchy(mu, G, 0.8, -0.1, t) - expansion_eval(coeffs, t))
        assert remainder <= remainder_bound(coeffs, t) + 1e-10
        remainders.append(remainder)
    assert remainders[-1] < remainders[0]


def test_negative_eigenvalue_reports_consistency_residual():
    params = SpectralParams.from_mu(-0.3125)
    coeffs = compute_coefficients_from_forcing(lambda xi: np.exp(-np.asarray(xi)), 1.0, 0.0, params, tol=1e-10)
    assert coeffs.case == SpectralCase.NEGATIVE
    assert coeffs.consistency_residual is not None
    assert coeffs.D_plus == 0 and coeffs.D_minus == 0
    assert expansion_eval(coeffs, 3.0) == 0


def test_envelope_tail_in_closed_form():
    env = ForcingEnvelope(scale=2.0, rate=0.5)
    assert env.tail(0.5, 3.0) == pytest.approx(2.0 * math.exp(-3.0))
    assert env.tail(0.5, 3.0, power=1) == pytest.approx(2.0 * math.exp(-3.0) * 4.0)
    assert ForcingEnvelope(scale=1.0, rate=0.0).tail(0.0, 5.0) == math.inf


def test_envelope_from_norm_scales_with_weight():
    params = SpectralParams.from_nu(0.5, n=2, theta=math.pi)
    env = ForcingEnvelope.from_norm(params, 1.5)
    assert env.scale == pytest.approx(10.0 * KAPPA_0 / math.pi * 5 * 1.5)
    assert env.rate == 0.0


def test_envelope_fit_dominates_samples():
    xi = np.linspace(1.0, 6.0, 11)
    values = 4.0 * np.exp(-0.7 * xi) * (1.0 + 0.1 * np.cos(xi))
    env = ForcingEnvelope.fit(xi, values)
    assert np.all(env.at(xi) >= np.abs(values))


def test_horizon_meets_tolerance():
    params = SpectralParams.from_nu(2j)
    env = ForcingEnvelope(scale=100.0)
    T = choose_horizon(params, env, 1e-6)
    assert tail_bound(params, env, T) == pytest.approx(1e-6, rel=1e-3)
    with pytest.raises(SpectralError):
        choose_horizon(params, env, 1e-6, max_horizon=5.0)


def test_invariant_observable_needs_a_group(base_point):
    params = SpectralParams.from_nu(1.0)
    with pytest.raises(ObservableError):
        compute_coefficients(ConstantObservable(2.0), base_point, params)


@pytest.mark.slow
def test_constant_has_a_constant_expansion(group_237, base_point):
    params = SpectralParams.from_nu(1.0)
    coeffs = compute_coefficients(ConstantObservable(2.0), base_point, params, group=group_237)
    assert coeffs.case == SpectralCase.ZERO
    assert coeffs.D_minus == pytest.approx(2.0, abs=1e-8)
    assert expansion_eval(coeffs, 5.0) == pytest.approx(2.0, abs=1e-8)


def test_initial_data_of_a_constant(base_point):
    y1, y1p = initial_data(ConstantObservable(2.0), base_point, SpectralParams.from_nu(1.0))
    assert y1 == pytest.approx(2.0, abs=1e-12)
    assert y1p == pytest.approx(0.0, abs=1e-12)


def test_initial_data_are_arc_averages_at_time_one(base_point):
    f = weighted_eigenfunction(0.5, 1)
    params = SpectralParams.from_nu(0.5, 1, math.pi)
    y1, y1p = initial_data(f, base_point, params, tol=1e-10)
    k, dk, _ = k_theta_derivatives(f, base_point, math.pi, 1.0, 1e-10)
    assert y1 == pytest.approx(k_theta(f, base_point, math.pi, 1.0, 1e-10).value, abs=1e-9)
    assert y1 == pytest.approx(k, abs=1e-9)
    assert y1p == pytest.approx(dk, abs=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("nu,n", [(0.5, 0), (2j, 1)])
def test_cauchy_solution_reproduces_circle_averages(base_point, nu, n):
    f = weighted_eigenfunction(nu, n)
    params = SpectralParams.from_nu(nu, n, math.pi)
    y1, y1p = initial_data(f, base_point, params, tol=1e-10)
    def forcing(xi):
        return G_coefficient_many(f, base_point, params, xi, tol=1e-10)
    value = solve_cauchy(params.mu, forcing, y1, y1p, 3.0, tol=1e-9)
    assert value == pytest.approx(k_theta(f, base_point, math.pi, 3.0, 1e-10).value, abs=1e-6)
