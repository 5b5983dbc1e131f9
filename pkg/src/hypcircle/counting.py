"""
Orbit counting in hyperbolic balls.

N(R) counts the distinct orbit points of the base point within distance R;
the main term is Sigma(R) = m_H(B_R) / (|Stab| covol_surface). The averaged
count integrates F_R(g) = #{z in Gamma.i : d(z, g.i) <= R} / m_H(B_R) against
a bump on the quotient, once by Monte Carlo and once by unfolding to a
radial integral of full-circle averages.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Union

import numpy as np

from .circle_average import k_theta
from .errors import EnumerationCapError, HypCircleError
from .fuchsian import (DEFAULT_POINT_CAP, FuchsianGroup, OrbitBall, enumerate_orbit_ball, reduce_elements,
                       sample_quotient_array)
from .hyperbolic import I_POINT, HPoint, ball_area, circle_points_many, hyp_dist_many, mobius_many, sphere_integrate
from .observables import FOUR_PI, FiberAverage, Mollifier, Observable
from .parallel import SAMPLE_CHUNK
from .sl2 import X, SL2Matrix, as_stack, iwasawa_many
from .stats import DecayFit, fit_decay

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 3
AGREEMENT_SIGMAS = 3.0
CONTAINMENT_SLACK = 1e-9


@dataclass
class CountReport:
    R: float
    N: int
    Sigma: float
    E: float
    covol_ratio: float
    valid: bool = True

    @property
    def ratio(self) -> float:
        return self.N / self.Sigma if self.Sigma > 0 else math.inf

    @property
    def selberg_reference(self) -> float:
        return selberg_reference(self.R)


def selberg_reference(R: float) -> float:
    return math.exp(2.0 * R / 3.0)


def covol_ratio(G: FuchsianGroup, base: HPoint = I_POINT) -> float:
    """covol_K(Gamma cap K) / covol_G(Gamma) with m_{G/K} = m_H: 1 / (|Stab(base)| covol_surface)."""
    return 1.0 / (G.stabilizer(base).shape[0] * G.covol_surface)


def _report(G: FuchsianGroup, base: HPoint, R: float, N: int, valid: bool = True) -> CountReport:
    ratio = covol_ratio(G, base)
    sigma = ratio * ball_area(R)
    return CountReport(R=float(R), N=int(N), Sigma=sigma, E=abs(N - sigma), covol_ratio=ratio, valid=valid)


def count_many(G: FuchsianGroup, R_grid: Sequence[float], base: HPoint = I_POINT,
               max_points: int = DEFAULT_POINT_CAP, workers: int = 1) -> List[CountReport]:
    """One enumeration at the largest radius, then a count for every radius in the grid."""
    R_grid = [float(R) for R in R_grid]
    R_max = max(R_grid)
    try:
        ball = enumerate_orbit_ball(G, base, R_max, max_points=max_points, workers=workers)
        valid = True
    except EnumerationCapError as exc:
        logger.error("Enumeration cap hit at R=%g; reporting partial counts as invalid", R_max)
        ball = exc.partial
        valid = False
    return [_report(G, base, R, ball.count(R), valid) for R in R_grid]


def count(G: FuchsianGroup, R: float, base: HPoint = I_POINT, max_points: int = DEFAULT_POINT_CAP,
          workers: int = 1) -> CountReport:
    return count_many(G, [R], base, max_points, workers)[0]


def fit_exponent(R: Sequence[float], E: Sequence[float]) -> DecayFit:
    """Least-squares slope of log E against R; zero errors are dropped."""
    fit = fit_decay(R, E, floor=0.0)
    usable = len(R) - len(fit.dropped)
    if usable < MIN_FIT_POINTS:
        raise HypCircleError(f"Need at least {MIN_FIT_POINTS} nonzero errors for an exponent fit, got {usable}")
    return fit


def error_exponent(G: FuchsianGroup, R_grid: Sequence[float], base: HPoint = I_POINT,
                   max_points: int = DEFAULT_POINT_CAP, workers: int = 1) -> DecayFit:
    reports = count_many(G, R_grid, base, max_points, workers)
    if not all(r.valid for r in reports):
        raise HypCircleError("Error exponent needs complete counts; the enumeration cap was reached")
    return fit_exponent([r.R for r in reports], [r.E for r in reports])


# --- Averaged counting ---

@dataclass
class AveragedCount:
    R: float
    monte_carlo: float
    monte_carlo_stderr: float
    unfolded: float
    unfolded_error: float
    samples: int

    @property
    def agree(self) -> bool:
        gap = abs(self.monte_carlo - self.unfolded)
        return gap <= AGREEMENT_SIGMAS * self.monte_carlo_stderr + self.unfolded_error + 1e-12


def _orbit_counts(ball: OrbitBall, points: np.ndarray, R: float) -> np.ndarray:
    out = np.empty(points.size, dtype=np.int64)
    for start in range(0, points.size, SAMPLE_CHUNK):
        chunk = points[start:start + SAMPLE_CHUNK]
        d = hyp_dist_many(chunk[:, None], ball.points[None, :])
        out[start:start + SAMPLE_CHUNK] = np.count_nonzero(d <= R, axis=1)
    return out


def _monte_carlo(G: FuchsianGroup, psi: Observable, R: float, n_samples: int, seed: int, workers: int):
    gs = sample_quotient_array(G, n_samples, seed)
    reduced, _ = reduce_elements(G, gs)
    z = mobius_many(reduced, 1j)
    ball = enumerate_orbit_ball(G, I_POINT, R + G.require_domain().covering_radius(1j), workers=workers)
    F = _orbit_counts(ball, z, R) / ball_area(R)
    vals = np.real(psi.evaluate_many(reduced)) * F * G.covol_surface
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(n_samples))


def _unfolded(G: FuchsianGroup, psi: Observable, R: float, tol: float):
    psi0 = psi if getattr(psi, "k_invariant", False) else FiberAverage(psi)
    stab = G.stabilizer(I_POINT).shape[0]
    # The mean over the sphere of radius r about i is the full-circle average at time r.
    def radial(z):
        r = hyp_dist_many(z, 1j)
        return np.array([np.real(k_theta(psi0, SL2Matrix.identity(), FOUR_PI, float(ri), tol).value) for ri in r])
    res = sphere_integrate(radial, R, tol=tol * ball_area(R), radial=True)
    scale = 1.0 / (stab * ball_area(R))
    return float(np.real(res.value)) * scale, res.error_estimate * scale + tol


def averaged_count(G: FuchsianGroup, psi: Observable, R: float, tol: float = 1e-7, n_samples: int = 10_000,
                   seed: int = 0, workers: int = 1) -> AveragedCount:
    """
    int psi F_R over the quotient, by Monte Carlo and by unfolding.

    The unfolded route is |Stab|^-1 m_H(B_R)^-1 times the integral over B_R
    of the K-averaged psi, done as a radial integral of full-circle averages.
    """
    if R <= 0:
        raise HypCircleError(f"Averaged count needs R > 0, got {R!r}")
    if not psi.gamma_invariant:
        raise HypCircleError(f"{psi.name} does not descend to the quotient")
    mc, stderr = _monte_carlo(G, psi, R, n_samples, seed, workers)
    unf, unf_err = _unfolded(G, psi, R, tol)
    result = AveragedCount(R=float(R), monte_carlo=mc, monte_carlo_stderr=stderr, unfolded=unf,
                           unfolded_error=unf_err, samples=n_samples)
    if not result.agree:
        logger.warning("Averaged count routes disagree at R=%g: MC %.6g +- %.2g vs unfolded %.6g",
                       R, mc, stderr, unf)
    return result


def main_term(G: FuchsianGroup, psi_mass: float = 1.0) -> float:
    """Leading term of the averaged count: covol ratio times the mass of psi."""
    return covol_ratio(G) * psi_mass


# --- Mollifiers ---

@dataclass
class WellRoundedness:
    delta: float
    R: float
    outer_excess: float
    inner_excess: float

    @property
    def passed(self) -> bool:
        return self.outer_excess <= CONTAINMENT_SLACK and self.inner_excess <= CONTAINMENT_SLACK


def _near_identity(delta: float, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = delta * np.sqrt(rng.random(n)) * (1.0 - 1e-12)
    z = circle_points_many(I_POINT, r, 2.0 * math.pi * rng.random(n))
    return iwasawa_many(z.real, z.imag, 2.0 * math.pi * rng.random(n))


def well_roundedness_check(G: FuchsianGroup, delta: float, R: float,
                           g_samples: Union[int, np.ndarray] = 32, n_boundary: int = 256,
                           seed: int = 0) -> WellRoundedness:
    """
    Spot-check B_{R-delta} in g B_R in B_{R+delta} on boundary points, for g in the
    support of the delta-mollifier around the identity coset.
    """
    gs = _near_identity(delta, g_samples, seed) if isinstance(g_samples, int) else as_stack(g_samples)
    psi = Mollifier(G, delta)
    gs = gs[np.real(psi.evaluate_many(gs)) > 0]
    s = 2.0 * math.pi * np.arange(n_boundary) / n_boundary
    inner = circle_points_many(I_POINT, max(R - delta, 0.0), s)
    outer_excess = inner_excess = -math.inf
    for center in mobius_many(gs, 1j):
        rim = circle_points_many(complex(center), R, s)
        outer_excess = max(outer_excess, float(np.max(hyp_dist_many(rim, 1j))) - (R + delta))
        inner_excess = max(inner_excess, float(np.max(hyp_dist_many(inner, center))) - R)
    return WellRoundedness(delta=delta, R=R, outer_excess=outer_excess, inner_excess=inner_excess)


@dataclass
class MollifierSweep:
    R: float
    N: int
    Sigma: float
    etas: List[float]
    deltas: List[float]
    smoothed: List[float]
    errors: List[float] = field(default_factory=list)

    @property
    def best_eta(self) -> float:
        return self.etas[int(np.argmin(self.errors))]


def mollifier_sweep(G: FuchsianGroup, R: float, etas: Sequence[float], tol: float = 1e-6,
                    n_samples: int = 2000, seed: int = 0) -> MollifierSweep:
    """Smoothed counts m_H(B_R) int psi_delta F_R with delta = exp(-eta R), against the exact count."""
    report = count(G, R)
    deltas, smoothed, errors = [], [], []
    for eta in etas:
        delta = min(1.0, math.exp(-eta * R))
        avg = averaged_count(G, Mollifier(G, delta), R, tol=tol, n_samples=n_samples, seed=seed)
        estimate = avg.unfolded * ball_area(R)
        deltas.append(delta)
        smoothed.append(estimate)
        errors.append(abs(estimate - report.N))
        logger.info("eta=%.3g delta=%.4g: smoothed count %.6g vs N=%d", eta, delta, estimate, report.N)
    return MollifierSweep(R=R, N=report.N, Sigma=report.Sigma, etas=[float(e) for e in etas], deltas=deltas,
                          smoothed=smoothed, errors=errors)


def mollifier_norm_proxy(G: FuchsianGroup, delta: float, nodes: int = 64) -> float:
    """
    sqrt of 2 pi int_0^delta (psi^2 + |X psi|^2)(a_r) sinh r dr; the first-order
    Sobolev proxy of the mollifier, growing like delta^-2.
    """
    psi = Mollifier(G, delta)
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    r = 0.5 * delta * (xg + 1.0)
    gs = iwasawa_many(np.zeros_like(r), np.exp(r), np.zeros_like(r))
    vals = np.abs(psi.evaluate_many(gs)) ** 2 + np.abs(psi.lie_derivative_many(X, gs)) ** 2
    return math.sqrt(2.0 * math.pi * 0.5 * delta * float(np.sum(wg * vals * np.sinh(r))))
