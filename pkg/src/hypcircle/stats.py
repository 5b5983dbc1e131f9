"""
Equidistribution statistics: decay-rate fits, shrinking arcs, rescaled
deviation laws, Levy-Prokhorov distances between empirical laws and the
geodesic-difference representation of full-circle deviations.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence

import numpy as np

from .circle_average import DEFAULT_TOL, CircleAverageResult, k_theta, k_theta_many
from .errors import ObservableError, QuadratureError, SamplingError, SpectralError
from .fuchsian import FuchsianGroup, sample_quotient_array
from .observables import FOUR_PI, FiberAverage, Observable, SpectralParams, fiber_average, unfolded_average
from .quadrature import PanelQuadrature
from .sl2 import THETA, U, X, SL2Matrix, exp_lie, exp_lie_many
from .spectral import compute_coefficients

logger = logging.getLogger(__name__)

LP_TOLERANCE = 1e-10
MIN_WINDOW = 1e-6
# Deviations below this multiple of the quadrature tolerance carry no signal.
NOISE_FLOOR = 10.0

__all__ = [
    "EmpiricalLaw", "DecayFit", "DeviationScaling", "ThetaScaling", "fit_decay", "decay_rate",
    "shrinking_arc_average", "deviation_law", "levy_prokhorov", "coupling_bound", "fiber_average",
    "nocl_representation", "theta_scaling",
]


@dataclass
class EmpiricalLaw:
    samples: np.ndarray
    seed: int = 0

    def __post_init__(self):
        arr = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if arr.size < 2:
            raise SamplingError(f"An empirical law needs at least 2 samples, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise SamplingError("Empirical law contains non-finite samples")
        self.samples = arr

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples))

    @property
    def std(self) -> float:
        return float(np.std(self.samples, ddof=1))

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.samples, q))


@dataclass
class DecayFit:
    slope: float
    intercept: float
    ts: np.ndarray
    deviations: np.ndarray
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dropped: List[float] = field(default_factory=list)
    degenerate: bool = False


def fit_decay(ts: Sequence[float], deviations: Sequence[float], floor: float = 0.0) -> DecayFit:
    """Least-squares slope of log|deviation| against t; points at or below `floor` are dropped."""
    ts = np.asarray(ts, dtype=float)
    dev = np.abs(np.asarray(deviations))
    keep = dev > floor
    dropped = [float(t) for t in ts[~keep]]
    if dropped:
        logger.warning("Dropped %d points at or below the noise floor %.2e: t=%s", len(dropped), floor, dropped)
    if np.count_nonzero(keep) < 2:
        return DecayFit(slope=math.nan, intercept=math.nan, ts=ts, deviations=dev, dropped=dropped, degenerate=True)
    x, y = ts[keep], np.log(dev[keep])
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    return DecayFit(slope=float(slope), intercept=float(intercept), ts=ts, deviations=dev,
                    residuals=residuals, dropped=dropped)


def decay_rate(f: Observable, p: SL2Matrix, theta: float, t_grid: Sequence[float], tol: float = DEFAULT_TOL,
               reference: Optional[complex] = None) -> DecayFit:
    """
    Rate at which k(p, t) approaches the space average of f.

    For observables that do not descend to the quotient pass `reference`
    explicitly; it defaults to 0 for them.
    """
    if list(t_grid) != sorted(t_grid):
        raise SpectralError(f"t grid must be increasing, got {list(t_grid)}")
    if reference is None:
        reference = unfolded_average(f) if f.gamma_invariant else 0.0
    devs = [k_theta(f, p, theta, float(t), tol).value - reference for t in t_grid]
    return fit_decay(t_grid, devs, floor=NOISE_FLOOR * tol)


def shrinking_arc_average(f: Observable, p: SL2Matrix, theta1: Callable[[float], float],
                          theta2: Callable[[float], float], t: float, tol: float = DEFAULT_TOL) -> CircleAverageResult:
    """Average over the arc [theta1(t), theta2(t)], taken as a full arc based at p exp(theta1 Theta)."""
    lo, hi = float(theta1(t)), float(theta2(t))
    if not 0.0 <= lo < hi <= FOUR_PI + 1e-12:
        raise SpectralError(f"Arc window must satisfy 0 <= theta1 < theta2 <= 4pi, got [{lo}, {hi}]")
    if hi - lo < MIN_WINDOW:
        raise SpectralError(f"Arc window {hi - lo:.3e} is below {MIN_WINDOW}")
    return k_theta(f, p @ exp_lie(THETA, lo), hi - lo, t, tol)


class DeviationScaling(str, Enum):
    SUBQUARTER = "subquarter"
    QUARTER = "quarter"
    SUPERQUARTER = "superquarter"

    def factor(self, T: float, nu_f: Optional[float] = None) -> float:
        if self is DeviationScaling.SUBQUARTER:
            if nu_f is None or not 0.0 < nu_f < 1.0:
                raise SpectralError(f"subquarter scaling needs nu_f in (0, 1), got {nu_f!r}")
            return math.exp((1.0 - nu_f) * T / 2.0)
        if self is DeviationScaling.QUARTER:
            return math.exp(T / 2.0) / T
        return math.exp(T / 2.0)


def deviation_law(f: Observable, theta: float, T: float, n: int, seed: int,
                  scaling: DeviationScaling = DeviationScaling.SUPERQUARTER, nu_f: Optional[float] = None,
                  G: Optional[FuchsianGroup] = None, tol: float = 1e-7, workers: int = 1) -> EmpiricalLaw:
    """
    Law of the rescaled deviation factor(T) * Re(k(p, T) - int f) with p drawn from the quotient.

    The base points are fixed by `seed` and so are the samples, for any worker count.
    """
    if not f.gamma_invariant:
        raise ObservableError(f"{f.name} is not Gamma-invariant; deviation laws live on the quotient")
    group = G if G is not None else getattr(f, "group", None)
    if group is None:
        raise ObservableError(f"{f.name}: deviation laws need a group to sample base points from")
    scaling = DeviationScaling(scaling)
    mean = unfolded_average(f)
    ps = sample_quotient_array(group, n, seed)
    values = k_theta_many(f, ps, theta, T, tol, workers=workers)
    samples = scaling.factor(T, nu_f) * np.real(values - mean)
    logger.info("deviation law T=%g: n=%d, max|x|=%.4g", T, n, float(np.max(np.abs(samples))))
    return EmpiricalLaw(samples=samples, seed=seed)


# --- Levy-Prokhorov distance ---

def _matched_units(x: np.ndarray, y: np.ndarray, eps: float) -> int:
    """
    Largest transportable mass between the two atomic laws over pairs with |x - y| < eps.

    x atoms carry len(y) units each and y atoms len(x) units, so the total is
    len(x) * len(y). Each x atom in increasing order takes the leftmost
    available y mass in its window, which is optimal for sorted windows.
    """
    nx, ny = x.size, y.size
    rem = np.full(ny, nx, dtype=np.int64)
    matched = 0
    j = 0
    for xi in x:
        need = ny
        while j < ny and (y[j] <= xi - eps or rem[j] == 0):
            j += 1
        k = j
        while need and k < ny and y[k] < xi + eps:
            take = min(need, int(rem[k]))
            rem[k] -= take
            need -= take
            matched += take
            k += 1
    return matched


def _deficit(x: np.ndarray, y: np.ndarray, eps: float) -> float:
    total = x.size * y.size
    return (total - _matched_units(x, y, eps)) / total


def _distance_in(x: np.ndarray, y: np.ndarray, lo: float, hi: float) -> Optional[float]:
    """Smallest |x_i - y_j| in [lo, hi), or None."""
    best = math.inf
    for xi in x:
        for a, b in ((xi + lo, xi + hi), (xi - hi, xi - lo)):
            d = np.abs(y[np.searchsorted(y, a, "left"):np.searchsorted(y, b, "right")] - xi)
            d = d[(d >= lo) & (d < hi)]
            if d.size:
                best = min(best, float(d.min()))
    return None if math.isinf(best) else best


def levy_prokhorov(mu: EmpiricalLaw, nu: EmpiricalLaw, tol: float = LP_TOLERANCE) -> float:
    """
    Levy-Prokhorov distance between two empirical laws on the line.

    By Strassen's theorem d <= eps iff a coupling puts mass at most eps on
    |X - Y| >= eps, so the feasibility test is a maximal matching of atoms
    within distance eps. eps is bisected to `tol` and then snapped to the
    exact value: either a pairwise atom distance or a matching deficit.
    """
    x, y = mu.samples, nu.samples
    if np.array_equal(x, y):
        return 0.0
    lo, hi = 0.0, 1.0
    if _deficit(x, y, hi) > hi:
        return 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _deficit(x, y, mid) <= mid:
            hi = mid
        else:
            lo = mid
    level = _deficit(x, y, hi)
    if abs(level - hi) <= 2.0 * tol:
        return float(level)
    jump = _distance_in(x, y, lo, hi)
    return float(jump) if jump is not None else float(hi)


def consecutive_distances(laws: Sequence[EmpiricalLaw]) -> List[float]:
    """d_LP between each law and the one before it."""
    return [levy_prokhorov(a, b) for a, b in zip(laws, laws[1:])]


def coupling_bound(x: Sequence[float], x_prime: Sequence[float]) -> float:
    """Smallest eps with #{i : |x_i - x'_i| >= eps} / n <= eps; an upper bound for the LP distance."""
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(x_prime, dtype=float))
    n = d.size
    if n == 0:
        raise SamplingError("coupling_bound needs at least one coupled pair")
    desc = np.concatenate([np.sort(d)[::-1], [0.0]])
    upper = np.concatenate([[math.inf], desc[:-1]])
    k = np.arange(n + 1)
    cand = np.maximum(desc, k / n)
    ok = cand <= upper
    return float(min(cand[ok].min(), 1.0))


# --- Geodesic-difference representation ---

def nocl_representation(f: Observable, p: SL2Matrix, theta: float, T: float, tol: float = DEFAULT_TOL,
                        fiber_nodes: int = 256, quadrature: Optional[PanelQuadrature] = None):
    """
    (lhs, rhs) with lhs = e^T (k(p, T) - int f) and
    rhs = (2/theta) int_1^T (1 - e^{-2 xi})^{-1} (U f0(p a_xi) - U f0(p r_theta a_xi)) d xi,
    f0 the fiber average of f.
    """
    if not f.gamma_invariant:
        raise ObservableError(f"{f.name} is not Gamma-invariant")
    lhs = math.exp(T) * (k_theta(f, p, theta, T, tol).value - unfolded_average(f))
    f0 = FiberAverage(f, fiber_nodes)
    start, end = p.array, (p @ exp_lie(THETA, theta)).array

    def integrand(xi):
        a = exp_lie_many(X, xi)
        diff = f0.lie_derivative_many(U, start @ a) - f0.lie_derivative_many(U, end @ a)
        return diff / -np.expm1(-2.0 * xi)

    quad = quadrature or PanelQuadrature()
    rhs = (2.0 / theta) * quad.integrate(integrand, 1.0, T, tol).value if T > 1.0 else 0.0
    return complex(lhs), complex(rhs)


@dataclass
class ThetaScaling:
    thetas: List[float]
    D_plus: List[complex]
    D_minus: List[complex]

    def scaled(self) -> np.ndarray:
        """theta * max(|D+|, |D-|) per arc length; flat when the coefficients scale like 1/theta."""
        return np.array([t * max(abs(a), abs(b)) for t, a, b in zip(self.thetas, self.D_plus, self.D_minus)])


def theta_scaling(f: Observable, p: SL2Matrix, params: SpectralParams, thetas: Sequence[float],
                  tol: float = 1e-4, **kwargs) -> ThetaScaling:
    """Expansion coefficients of the same observable across arc lengths."""
    plus, minus = [], []
    for theta in thetas:
        try:
            coeffs = compute_coefficients(f, p, params.with_theta(theta), tol=tol, **kwargs)
        except QuadratureError as exc:
            raise SpectralError(f"Coefficients at theta={theta} failed: {exc}") from exc
        plus.append(coeffs.D_plus)
        minus.append(coeffs.D_minus)
    return ThetaScaling(thetas=[float(t) for t in thetas], D_plus=plus, D_minus=minus)
