import math

import pytest

from hypcircle.counting import (AveragedCount, CountReport, averaged_count, count, count_many, covol_ratio,
                                error_exponent, fit_exponent, main_term, mollifier_norm_proxy, mollifier_sweep,
                                well_roundedness_check)
from hypcircle.errors import HypCircleError
from hypcircle.observables import ModelEigenfunction, Mollifier, unfolded_average


def test_covolume_ratio_of_237(group_237):
    assert covol_ratio(group_237) == pytest.approx(21.0 / (2.0 * math.pi))
    assert main_term(group_237, 2.0) == pytest.approx(21.0 / math.pi)


def test_zero_radius_counts_the_base_point(group_237):
    report = count(group_237, 0.0)
    assert report.N == 1
    assert report.Sigma == 0.0
    assert report.ratio == math.inf


def test_counts_are_monotone_and_consistent(group_237):
    reports = count_many(group_237, [1.0, 2.0, 3.0, 4.0])
    assert [r.N for r in reports] == sorted(r.N for r in reports)
    assert all(r.valid for r in reports)
    single = count(group_237, 3.0)
    assert single.N == reports[2].N
    assert single.E == pytest.approx(abs(single.N - single.Sigma))
    assert single.selberg_reference == pytest.approx(math.exp(2.0))


def test_count_approaches_main_term(group_237):
    report = count(group_237, 8.0)
    assert report.Sigma == pytest.approx(21.0 * (math.cosh(8.0) - 1.0))
    assert 0.9 < report.ratio < 1.1


def test_enumeration_cap_marks_counts_invalid(group_237):
    reports = count_many(group_237, [1.0, 5.0], max_points=100)
    assert not any(r.valid for r in reports)
    with pytest.raises(HypCircleError):
        error_exponent(group_237, [1.0, 2.0, 5.0], max_points=100)


def test_exponent_fit_needs_nonzero_errors():
    with pytest.raises(HypCircleError):
        fit_exponent([1.0, 2.0, 3.0], [0.0, 0.0, 4.0])
    fit = fit_exponent([1.0, 2.0, 3.0], [math.exp(0.5), math.exp(1.0), math.exp(1.5)])
    assert fit.slope == pytest.approx(0.5)


@pytest.mark.slow
def test_error_exponent_beats_the_trivial_bound(group_237):
    fit = error_exponent(group_237, [4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0])
    assert fit.slope < 0.98


def test_agreement_rule():
    close = AveragedCount(R=2.0, monte_carlo=1.0, monte_carlo_stderr=0.01, unfolded=1.02, unfolded_error=0.0,
                          samples=100)
    far = AveragedCount(R=2.0, monte_carlo=1.0, monte_carlo_stderr=0.01, unfolded=1.2, unfolded_error=0.0,
                        samples=100)
    assert close.agree
    assert not far.agree


def test_averaged_count_rejects_bad_input(group_237):
    with pytest.raises(HypCircleError):
        averaged_count(group_237, Mollifier(group_237, 0.5), 0.0)
    with pytest.raises(HypCircleError):
        averaged_count(group_237, ModelEigenfunction(0.5), 2.0)


@pytest.mark.slow
def test_averaged_count_routes_agree(group_237):
    result = averaged_count(group_237, Mollifier(group_237, 0.5), 2.0, tol=1e-5, n_samples=4000, seed=2)
    assert result.agree
    assert result.samples == 4000
    assert result.unfolded > 0.0


@pytest.mark.slow
def test_averaged_count_leading_term_at_radius_eight(group_237):
    psi = Mollifier(group_237, 0.5)
    result = averaged_count(group_237, psi, 8.0, tol=1e-5, n_samples=2000, seed=3)
    lead = main_term(group_237, unfolded_average(psi) * group_237.covol_surface)
    assert lead == pytest.approx(covol_ratio(group_237))
    assert 0.95 <= result.unfolded / lead <= 1.05


@pytest.mark.parametrize("delta,R", [(0.1, 2.0), (0.3, 4.0), (1.0, 1.5)])
def test_mollifier_support_is_well_rounded(group_237, delta, R):
    check = well_roundedness_check(group_237, delta, R, g_samples=16, n_boundary=64, seed=1)
    assert check.passed


def test_mollifier_norm_grows_like_inverse_square_scale(group_237):
    norms = [mollifier_norm_proxy(group_237, delta) for delta in (0.4, 0.2, 0.1)]
    for coarse, fine in zip(norms, norms[1:]):
        assert 4.0 / 3.0 <= fine / coarse <= 12.0


@pytest.mark.slow
def test_mollifier_sweep_tracks_the_exact_count(group_237):
    sweep = mollifier_sweep(group_237, 3.0, [0.2, 0.5], tol=1e-5, n_samples=500)
    assert sweep.N == count(group_237, 3.0).N
    assert len(sweep.smoothed) == 2
    assert sweep.deltas == [pytest.approx(math.exp(-0.6)), pytest.approx(math.exp(-1.5))]
    assert sweep.best_eta in (0.2, 0.5)
