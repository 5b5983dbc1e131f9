"""
Closed-form Cauchy solutions of y'' + y' + mu y = e^{-t} G(t) with data at t = 1,
the coefficients a+-, D+- of the two-term expansion of arc averages, and the
case-wise remainder envelopes.

The five cases follow the position of mu: above 1/4 (nu = i beta), at 1/4
(double root), in (0, 1/4), at 0, and below 0.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .circle_average import DEFAULT_TOL, G_coefficient, T_CAP, arc_average
from .errors import ObservableError, SpectralError
from .observables import Observable, SpectralCase, SpectralParams, c1_norm_proxy
from .quadrature import PanelQuadrature
from .sl2 import X, SL2Matrix

logger = logging.getLogger(__name__)

KAPPA_0 = 2.0 * math.e ** 2 * (1.0 + 4.0 * math.pi) / (math.e - 1.0) ** 2
TAIL_SLACK = 10.0
MAX_HORIZON = 60.0
FIT_HORIZON = 6.0
FIT_POINTS = 11
CUMULATIVE_STEP = 1.0 / 16.0

ForcingFn = Callable[[np.ndarray], np.ndarray]


def _forcing_values(G: ForcingFn, xi: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(G(xi), dtype=complex), xi.shape)


@dataclass(frozen=True)
class ForcingEnvelope:
    """|G(xi)| <= scale * exp(-rate * xi) for xi >= 1."""
    scale: float
    rate: float = 0.0

    def at(self, xi) -> np.ndarray:
        return self.scale * np.exp(-self.rate * np.asarray(xi, dtype=float))

    def tail(self, kernel_rate: float, T: float, power: int = 0) -> float:
        """int_T^inf xi^power exp(-kernel_rate xi) times the envelope, in closed form."""
        c = kernel_rate + self.rate
        if c <= 0:
            return math.inf
        if power == 0:
            return self.scale * math.exp(-c * T) / c
        return self.scale * math.exp(-c * T) * (T / c + 1.0 / c ** 2)

    @classmethod
    def from_norm(cls, params: SpectralParams, c1_norm: float, slack: float = TAIL_SLACK) -> "ForcingEnvelope":
        return cls(scale=slack * KAPPA_0 / params.theta * (params.n ** 2 + 1) * c1_norm, rate=0.0)

    @classmethod
    def fit(cls, xi: np.ndarray, values: np.ndarray, margin: float = TAIL_SLACK) -> "ForcingEnvelope":
        """Exponential envelope fitted to samples of |G|, widened by `margin`."""
        mag = np.abs(np.asarray(values))
        ok = mag > 0
        if np.count_nonzero(ok) < 2:
            return cls(scale=margin * float(mag.max(initial=0.0)) + 1e-300, rate=0.0)
        slope = np.polyfit(xi[ok], np.log(mag[ok]), 1)[0]
        rate = max(0.0, -float(slope))
        scale = margin * float(np.max(mag * np.exp(rate * xi)))
        return cls(scale=scale, rate=rate)


@dataclass
class ExpansionCoefficients:
    params: SpectralParams
    a_plus: complex
    a_minus: complex
    D_plus: complex
    D_minus: complex
    tail_bound: float
    truncation_T: float
    envelope: ForcingEnvelope
    consistency_residual: Optional[complex] = None
    forcing_integral: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    @property
    def case(self) -> SpectralCase:
        return self.params.case

    def main(self, t):
        return expansion_eval(self, t)


# --- Cauchy problem ---

def initial_amplitudes(params: SpectralParams, y1: complex, y1p: complex) -> Tuple[complex, complex]:
    """a+ and a- matching y(1) = y1, y'(1) = y1p for the homogeneous modes."""
    if params.case == SpectralCase.QUARTER:
        root_e = math.sqrt(math.e)
        return root_e * (y1 - 2.0 * y1p) / 2.0, root_e * (y1 + 2.0 * y1p) / 2.0
    nu = params.nu
    a_plus = -((1.0 - nu) * y1 + 2.0 * y1p) / (2.0 * nu * np.exp(-(1.0 + nu) / 2.0))
    a_minus = ((1.0 + nu) * y1 + 2.0 * y1p) / (2.0 * nu * np.exp(-(1.0 - nu) / 2.0))
    return complex(a_plus), complex(a_minus)


def _integrate(fn: Callable[[np.ndarray], np.ndarray], a: float, b: float, tol: float,
               quadrature: Optional[PanelQuadrature]) -> np.ndarray:
    if b <= a:
        return np.asarray(fn(np.array([a])))[0] * 0.0
    quad = quadrature or PanelQuadrature()
    return quad.integrate(fn, a, b, tol).value


def solve_cauchy(mu: float, G: ForcingFn, y1: complex, y1p: complex, t: float, tol: float = 1e-12,
                 quadrature: Optional[PanelQuadrature] = None) -> complex:
    """
    Value at t >= 1 of the solution of y'' + y' + mu y = e^{-t} G(t), y(1) = y1, y'(1) = y1p.

    G must accept an array of times. For |nu| < 1e-8 the double-root formula
    is used; it is the leading term of the expansion in nu.
    """
    if t < 1.0:
        raise SpectralError(f"The Cauchy solution is evaluated for t >= 1, got {t!r}")
    params = SpectralParams.from_mu(mu)
    a_plus, a_minus = initial_amplitudes(params, y1, y1p)

    if params.case == SpectralCase.QUARTER:
        def inner(xi):
            g = _forcing_values(G, xi) * np.exp(-xi / 2.0)
            return np.stack([xi * g, g], axis=-1)
        I1, I2 = _integrate(inner, 1.0, t, tol, quadrature)
        return complex(math.exp(-t / 2.0) * (a_plus - I1) + t * math.exp(-t / 2.0) * (a_minus + I2))

    nu = params.nu

    def inner(xi):
        g = _forcing_values(G, xi)
        return np.stack([np.exp(-(1.0 - nu) * xi / 2.0) * g, np.exp(-(1.0 + nu) * xi / 2.0) * g], axis=-1)
    I1, I2 = _integrate(inner, 1.0, t, tol, quadrature)
    return complex(np.exp(-(1.0 + nu) * t / 2.0) * (a_plus - I1 / nu)
                   + np.exp(-(1.0 - nu) * t / 2.0) * (a_minus + I2 / nu))


def manufacture_forcing(y: Callable, dy: Callable, ddy: Callable, mu: float) -> ForcingFn:
    """G = e^t (y'' + y' + mu y), so that y solves the forced equation."""
    def G(xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(xi) * (ddy(xi) + dy(xi) + mu * y(xi))
    return G


def initial_data(f: Observable, p: SL2Matrix, params: SpectralParams,
                 tol: float = DEFAULT_TOL) -> Tuple[complex, complex]:
    """(k(1), k'(1)) as arc averages of f and Xf at t = 1."""
    def values(gs):
        return np.stack([f.evaluate_many(gs), f.lie_derivative_many(X, gs)], axis=-1)
    res = arc_average(values, p, params.theta, 1.0, tol, f.feature_scale)
    y1, y1p = res.value[0]
    return complex(y1), complex(y1p)


# --- Coefficients ---

@dataclass(frozen=True)
class _Kernel:
    """factor * xi^power * exp(-rate xi) bounds the kernel in modulus."""
    rate: float
    factor: float
    power: int = 0


def _kernels(params: SpectralParams) -> List[_Kernel]:
    case = params.case
    nu = params.nu
    if case == SpectralCase.ABOVE_QUARTER:
        beta = nu.imag
        return [_Kernel(0.5, 2.0 / beta), _Kernel(0.5, 2.0 / beta)]
    if case == SpectralCase.QUARTER:
        return [_Kernel(0.5, 1.0, power=1), _Kernel(0.5, 1.0)]
    if case == SpectralCase.ZERO:
        return [_Kernel(1.0, 1.0)]
    r = nu.real
    if case == SpectralCase.NEGATIVE:
        return [_Kernel((1.0 + r) / 2.0, 1.0 / r)]
    return [_Kernel((1.0 - r) / 2.0, 1.0 / r), _Kernel((1.0 + r) / 2.0, 1.0 / r)]


def _kernel_values(params: SpectralParams, xi: np.ndarray) -> np.ndarray:
    """The exact kernels multiplying G in the coefficient integrals, stacked on the last axis."""
    case = params.case
    nu = params.nu
    if case == SpectralCase.ABOVE_QUARTER:
        beta = nu.imag
        damp = np.exp(-xi / 2.0)
        return np.stack([damp * np.sin(beta * xi / 2.0), damp * np.cos(beta * xi / 2.0)], axis=-1)
    if case == SpectralCase.QUARTER:
        damp = np.exp(-xi / 2.0)
        return np.stack([xi * damp, damp], axis=-1)
    if case == SpectralCase.ZERO:
        return np.exp(-xi)[..., None]
    if case == SpectralCase.NEGATIVE:
        return np.exp(-(1.0 + nu.real) * xi / 2.0)[..., None]
    return np.stack([np.exp(-(1.0 - nu.real) * xi / 2.0), np.exp(-(1.0 + nu.real) * xi / 2.0)], axis=-1)


def tail_bound(params: SpectralParams, envelope: ForcingEnvelope, T: float) -> float:
    return max(k.factor * envelope.tail(k.rate, T, k.power) for k in _kernels(params))


def choose_horizon(params: SpectralParams, envelope: ForcingEnvelope, tol: float,
                   max_horizon: float = MAX_HORIZON) -> float:
    """Smallest T in [1, max_horizon] whose closed-form tail bound is at most tol."""
    if tail_bound(params, envelope, 1.0) <= tol:
        return 1.0
    if tail_bound(params, envelope, max_horizon) > tol:
        raise SpectralError(
            f"Tail bound {tail_bound(params, envelope, max_horizon):.3e} at T = {max_horizon} is above "
            f"tol = {tol:g} (envelope scale {envelope.scale:.3e}, rate {envelope.rate:.3g})"
        )
    return float(brentq(lambda T: tail_bound(params, envelope, T) - tol, 1.0, max_horizon, xtol=1e-6))


def compute_coefficients_from_forcing(G: ForcingFn, y1: complex, y1p: complex, params: SpectralParams,
                                      tol: float = 1e-8, envelope: Optional[ForcingEnvelope] = None,
                                      horizon: Optional[float] = None, max_horizon: float = MAX_HORIZON,
                                      quad_tol: Optional[float] = None,
                                      quadrature: Optional[PanelQuadrature] = None) -> ExpansionCoefficients:
    """
    Coefficients of the two-term expansion for a given forcing G and initial data.

    The integrals over [1, inf) are truncated at T, chosen from `envelope` so
    that the closed-form tail bound is at most tol. Without an envelope one is
    fitted to samples of G on [1, 6]. An explicit `horizon` overrides the
    choice of T; its tail bound is still reported.
    """
    if envelope is None:
        xi = np.linspace(1.0, FIT_HORIZON, FIT_POINTS)
        envelope = ForcingEnvelope.fit(xi, _forcing_values(G, xi))
        logger.debug("fitted forcing envelope: scale=%.3e rate=%.3g", envelope.scale, envelope.rate)
    T = horizon if horizon is not None else choose_horizon(params, envelope, tol, max_horizon)
    bound = tail_bound(params, envelope, T)
    if bound > tol:
        logger.warning("Tail bound %.3e at horizon T=%g exceeds tol %.3e", bound, T, tol)

    quad_tol = quad_tol if quad_tol is not None else tol / 10.0
    integrals = _integrate(lambda xi: _kernel_values(params, xi) * _forcing_values(G, xi)[:, None],
                           1.0, T, quad_tol, quadrature)
    a_plus, a_minus = initial_amplitudes(params, y1, y1p)
    case = params.case
    nu = params.nu
    residual = None
    cumulative = None

    if case == SpectralCase.ABOVE_QUARTER:
        beta = nu.imag
        D_plus = a_plus + a_minus - (2.0 / beta) * integrals[0]
        D_minus = 1j * (a_minus - a_plus) + (2.0 / beta) * integrals[1]
    elif case == SpectralCase.QUARTER:
        D_plus = a_plus - integrals[0]
        D_minus = a_minus + integrals[1]
    elif case == SpectralCase.BELOW_QUARTER:
        D_plus = a_plus - integrals[0] / nu.real
        D_minus = a_minus + integrals[1] / nu.real
    elif case == SpectralCase.ZERO:
        D_plus = 0.0
        D_minus = a_minus + integrals[0]
        grid = np.linspace(1.0, T, max(8, int(math.ceil((T - 1.0) / CUMULATIVE_STEP)) + 1))
        cumulative = CubicSpline(grid, _forcing_values(G, grid)).antiderivative()
    else:
        D_plus = 0.0
        D_minus = 0.0
        residual = complex(a_minus + integrals[0] / nu.real)
        logger.info("discrete-series consistency residual %.3e (tail bound %.3e)", abs(residual), bound)

    return ExpansionCoefficients(params=params, a_plus=a_plus, a_minus=a_minus, D_plus=complex(D_plus),
                                 D_minus=complex(D_minus), tail_bound=bound, truncation_T=float(T),
                                 envelope=envelope, consistency_residual=residual, forcing_integral=cumulative)


def compute_coefficients(f: Observable, p: SL2Matrix, params: SpectralParams, tol: float = 1e-6,
                         quad_tol: float = DEFAULT_TOL, envelope: Optional[ForcingEnvelope] = None,
                         horizon: Optional[float] = None, max_horizon: float = MAX_HORIZON,
                         group=None) -> ExpansionCoefficients:
    """
    Expansion coefficients for the arc averages of a joint eigenfunction f.

    For a Gamma-invariant f the default envelope is the uniform bound
    (kappa_0 / theta)(n^2 + 1) times the C^1 proxy of f, with slack 10.
    Otherwise an exponential envelope is fitted to G on [1, 6].
    """
    y1, y1p = initial_data(f, p, params, quad_tol)
    t_cap = max(T_CAP, horizon or max_horizon)

    def G(xi):
        xi = np.atleast_1d(xi)
        return np.array([G_coefficient(f, p, params, float(x), quad_tol, t_cap=t_cap) for x in xi])

    if envelope is None and f.gamma_invariant:
        G_group = group if group is not None else getattr(f, "group", None)
        if G_group is None:
            raise ObservableError(f"{f.name}: a group is needed for the C^1 proxy of the tail envelope")
        envelope = ForcingEnvelope.from_norm(params, c1_norm_proxy(f, G_group))
    return compute_coefficients_from_forcing(G, y1, y1p, params, tol, envelope, horizon, max_horizon,
                                             quad_tol=quad_tol)


# --- Expansion and remainders ---

def expansion_eval(coeffs: ExpansionCoefficients, t):
    """
    Two-term main expansion of k at t; scalar in, scalar out.

    At mu = 0 the cumulative forcing integral is only tabulated on [1, T] with
    T = truncation_T. Past T it is held at its value at T; the omitted
    e^-t int_T^t G is at most (1 + envelope.rate) / e times tail_bound.
    """
    ts = np.asarray(t, dtype=float)
    params = coeffs.params
    case = params.case
    nu = params.nu
    if case == SpectralCase.ABOVE_QUARTER:
        half = nu.imag * ts / 2.0
        out = np.exp(-ts / 2.0) * (np.cos(half) * coeffs.D_plus + np.sin(half) * coeffs.D_minus)
    elif case == SpectralCase.QUARTER:
        out = np.exp(-ts / 2.0) * (coeffs.D_plus + ts * coeffs.D_minus)
    elif case == SpectralCase.BELOW_QUARTER:
        out = (np.exp(-(1.0 + nu.real) * ts / 2.0) * coeffs.D_plus
               + np.exp(-(1.0 - nu.real) * ts / 2.0) * coeffs.D_minus)
    elif case == SpectralCase.ZERO:
        if coeffs.forcing_integral is None:
            raise SpectralError("Zero-eigenvalue coefficients carry no cumulative forcing integral")
        upto = np.clip(ts, 1.0, coeffs.truncation_T)
        out = coeffs.D_minus - np.exp(-ts) * coeffs.forcing_integral(upto)
    else:
        out = np.zeros_like(ts, dtype=complex)
    return complex(out) if np.ndim(out) == 0 else np.asarray(out, dtype=complex)


def remainder_bound(coeffs: ExpansionCoefficients, t):
    """Case-wise envelope of |k - main| at t, with the forcing envelope in place of the C^1 norm."""
    ts = np.asarray(t, dtype=float)
    M = coeffs.envelope.at(ts)
    params = coeffs.params
    case = params.case
    nu = params.nu
    if case == SpectralCase.ABOVE_QUARTER:
        out = 4.0 * M * np.exp(-ts) / nu.imag
    elif case == SpectralCase.QUARTER:
        out = M * (4.0 * ts + 4.0) * np.exp(-ts)
    elif case == SpectralCase.BELOW_QUARTER:
        r = nu.real
        out = 4.0 * M * np.exp(-ts) / (r * (1.0 - r * r))
    elif case == SpectralCase.ZERO:
        out = (abs(coeffs.a_plus) + M) * np.exp(-ts)
    else:
        r = nu.real
        out = abs(coeffs.a_plus) * np.exp(-(1.0 + r) * ts / 2.0) + 4.0 * M * np.exp(-ts) / (r * r - 1.0)
    return float(out) if np.ndim(out) == 0 else out
