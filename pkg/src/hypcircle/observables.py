"""
Observables on SL(2,R) and on Gamma\\SL(2,R): evaluation plus Lie derivatives.

Lie derivatives are taken along right translation,
    Wf(g) = d/ds f(g exp(sW)),   (W Z)f(g) = d/ds1 d/ds2 f(g exp(s1 W) exp(s2 Z)),
both at zero. Subclasses evaluate on (N, 2, 2) stacks and may replace the
finite-difference derivatives with analytic ones.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ObservableError, SpectralError
from .fuchsian import (FuchsianGroup, enumerate_orbit_ball, reduce_elements, reduce_points,
                       sample_quotient_array, triangle_group)
from .hyperbolic import I_POINT, hyp_dist, hyp_dist_many, mobius, mobius_many, sphere_integrate
from .quadrature import PanelQuadrature, gauss_legendre
from .sl2 import THETA, U, X, V, LieVector, SL2Matrix, adjoint, as_stack, exp_lie, rotation_many

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi
QUARTER_TOLERANCE = 1e-8
PARAM_TOLERANCE = 1e-12
FD_STEP = 1e-4
FD_STEP_SECOND = 1e-3
ANGULAR_NODES = 48
MAX_BUMP_WIDTH = 0.5

# 4th-order central stencil: (offset in units of h, weight / h).
_STENCIL4 = ((1.0, 8.0 / 12.0), (-1.0, -8.0 / 12.0), (2.0, -1.0 / 12.0), (-2.0, 1.0 / 12.0))
_STENCIL2 = ((1.0, 0.5), (-1.0, -0.5))
# Row vector r = (c, d) of g gives d - ic = r . OMEGA.
OMEGA = np.array([-1j, 1.0])


class SpectralCase(str, Enum):
    ABOVE_QUARTER = "above_quarter"
    QUARTER = "quarter"
    BELOW_QUARTER = "below_quarter"
    ZERO = "zero"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class SpectralParams:
    """
    Casimir eigenvalue mu, its parameter nu (1 - nu^2 = 4 mu, nu on the
    half-lines R>=0 or iR>0), Theta-weight n and arc length theta.
    """
    mu: float
    nu: complex
    n: int = 0
    theta: float = FOUR_PI

    def __post_init__(self):
        nu = complex(self.nu)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "theta", float(self.theta))
        on_real = abs(nu.imag) <= PARAM_TOLERANCE and nu.real >= -PARAM_TOLERANCE
        on_imag = abs(nu.real) <= PARAM_TOLERANCE and nu.imag > 0
        if not (on_real or on_imag):
            raise SpectralError(f"nu must lie in R>=0 or iR>0, got {nu!r}")
        if abs(1.0 - nu * nu - 4.0 * self.mu) > PARAM_TOLERANCE * max(1.0, abs(self.mu)):
            raise SpectralError(f"Inconsistent parameters: 1 - nu^2 = {1 - nu * nu!r} but 4 mu = {4 * self.mu!r}")
        if not 0.0 < self.theta <= FOUR_PI + PARAM_TOLERANCE:
            raise SpectralError(f"theta must lie in (0, 4pi], got {self.theta!r}")

    @classmethod
    def from_nu(cls, nu: complex, n: int = 0, theta: float = FOUR_PI) -> "SpectralParams":
        nu = complex(nu)
        return cls(mu=((1.0 - nu * nu) / 4.0).real, nu=nu, n=n, theta=theta)

    @classmethod
    def from_mu(cls, mu: float, n: int = 0, theta: float = FOUR_PI) -> "SpectralParams":
        return cls(mu=mu, nu=nu_from_mu(mu), n=n, theta=theta)

    @property
    def case(self) -> SpectralCase:
        if abs(self.nu) < QUARTER_TOLERANCE:
            return SpectralCase.QUARTER
        if self.nu.imag > PARAM_TOLERANCE:
            return SpectralCase.ABOVE_QUARTER
        if abs(self.nu.real - 1.0) <= PARAM_TOLERANCE:
            return SpectralCase.ZERO
        if self.nu.real > 1.0:
            return SpectralCase.NEGATIVE
        return SpectralCase.BELOW_QUARTER

    def with_theta(self, theta: float) -> "SpectralParams":
        return SpectralParams(mu=self.mu, nu=self.nu, n=self.n, theta=theta)


# --- Finite differences along right translation ---

def _stencil(fn, W: LieVector, gs: np.ndarray, h: float, stencil=_STENCIL4) -> np.ndarray:
    total = 0.0
    for offset, weight in stencil:
        total = total + weight * fn(gs @ exp_lie(W, offset * h).array)
    return total / h


def finite_difference(f: "Observable", W: LieVector, g, order: int = 4, h: float = FD_STEP) -> np.ndarray:
    """Central difference of order 2 or 4 for Wf, without extrapolation."""
    if order not in (2, 4):
        raise ObservableError(f"Finite-difference order must be 2 or 4, got {order}")
    return _stencil(f.evaluate_many, W, as_stack(g), h, _STENCIL4 if order == 4 else _STENCIL2)


class Observable(ABC):
    """A function on SL(2,R); `gamma_invariant` marks functions that descend to the quotient."""
    gamma_invariant: bool = False
    # Full-circle averages equal the space average at every radius.
    full_circle_flat: bool = False
    feature_scale: float = 1.0
    name: str = "observable"

    @abstractmethod
    def evaluate_many(self, gs: np.ndarray) -> np.ndarray:
        pass

    def evaluate(self, g: SL2Matrix) -> complex:
        return complex(self.evaluate_many(as_stack(g))[0])

    def lie_derivative_many(self, W: LieVector, gs: np.ndarray) -> np.ndarray:
        """4th-order central difference with step 1e-4 and one Richardson level."""
        gs = as_stack(gs)
        coarse = _stencil(self.evaluate_many, W, gs, FD_STEP)
        fine = _stencil(self.evaluate_many, W, gs, FD_STEP / 2.0)
        return (16.0 * fine - coarse) / 15.0

    def second_lie_derivative_many(self, W1: LieVector, W2: LieVector, gs: np.ndarray) -> np.ndarray:
        gs = as_stack(gs)
        h = FD_STEP_SECOND
        total = 0.0
        for offset, weight in _STENCIL4:
            shifted = gs @ exp_lie(W1, offset * h).array
            total = total + weight * _stencil(self.evaluate_many, W2, shifted, h)
        return total / h

    def lie_derivative(self, W: LieVector, g: SL2Matrix) -> complex:
        return complex(self.lie_derivative_many(W, as_stack(g))[0])

    def second_lie_derivative(self, W1: LieVector, W2: LieVector, g: SL2Matrix) -> complex:
        return complex(self.second_lie_derivative_many(W1, W2, as_stack(g))[0])

    def casimir_many(self, gs: np.ndarray) -> np.ndarray:
        """(-X^2 + X - UV) f."""
        gs = as_stack(gs)
        return (-self.second_lie_derivative_many(X, X, gs) + self.lie_derivative_many(X, gs)
                - self.second_lie_derivative_many(U, V, gs))

    def space_average(self, tol: float = 1e-10, method: str = "cartan") -> float:
        raise ObservableError(f"{self.name} has no exact space average")


class ConstantObservable(Observable):
    gamma_invariant = True
    k_invariant = True
    full_circle_flat = True

    def __init__(self, c: complex = 1.0):
        self.c = complex(c)
        self.name = f"const(c={c})"

    def evaluate_many(self, gs: np.ndarray) -> np.ndarray:
        return np.full(as_stack(gs).shape[0], self.c, dtype=complex)

    def lie_derivative_many(self, W: LieVector, gs: np.ndarray) -> np.ndarray:
        return np.zeros(as_stack(gs).shape[0], dtype=complex)

    def second_lie_derivative_many(self, W1: LieVector, W2: LieVector, gs: np.ndarray) -> np.ndarray:
        return np.zeros(as_stack(gs).shape[0], dtype=complex)

    def space_average(self, tol: float = 1e-10, method: str = "cartan") -> complex:
        return self.c


# --- Joint Casimir / Theta eigenfunctions on SL(2,R) ---

def _quadratic(r: np.ndarray, M: np.ndarray) -> np.ndarray:
    return np.einsum("ni,ij,nj->n", r, M, r)


class ModelEigenfunction(Observable):
    """
    f(g) = q^a w^n with q = c^2 + d^2, w = d - ic, a = -(1 + nu)/2 - n/2.

    f has Casimir eigenvalue mu = (1 - nu^2)/4 and Theta f = (i n / 2) f for
    every integer n; for n = 0 it is (Im g.i)^{(1+nu)/2}. Derivatives are
    exact: f_W = f L_W with L the logarithmic derivative of q^a w^n.
    """

    def __init__(self, nu: complex, n: int = 0):
        self.params = SpectralParams.from_nu(nu, n)
        self.nu = self.params.nu
        self.n = int(n)
        self.exponent = -(1.0 + self.nu) / 2.0 - self.n / 2.0
        self.name = f"eigen(nu={nu}, n={n})"

    def _parts(self, gs: np.ndarray):
        r = gs[:, 1, :]
        q = r[:, 0] ** 2 + r[:, 1] ** 2
        w = r @ OMEGA
        f = np.exp(self.exponent * np.log(q)) * np.power(w, self.n)
        return r, q, w, f

    def _log_first(self, r, q, w, Wm):
        q1 = _quadratic(r, Wm + Wm.T)
        w1 = r @ (Wm @ OMEGA)
        return self.exponent * q1 / q + self.n * w1 / w, q1, w1

    def evaluate_many(self, gs: np.ndarray) -> np.ndarray:
        return self._parts(as_stack(gs))[3]

    def lie_derivative_many(self, W: LieVector, gs: np.ndarray) -> np.ndarray:
        r, q, w, f = self._parts(as_stack(gs))
        L, _, _ = self._log_first(r, q, w, W.array)
        return f * L

    def second_lie_derivative_many(self, W1: LieVector, W2: LieVector, gs: np.ndarray) -> np.ndarray:
        r, q, w, f = self._parts(as_stack(gs))
        A, B = W1.array, W2.array
        L1, q1, w1 = self._log_first(r, q, w, A)
        L2, q2, w2 = self._log_first(r, q, w, B)
        S2 = B + B.T
        q12 = _quadratic(r, A @ S2 + S2 @ A.T)
        w12 = r @ (A @ B @ OMEGA)
        L12 = (self.exponent * (q12 / q - q1 * q2 / q ** 2)
               + self.n * (w12 / w - w1 * w2 / w ** 2))
        return f * (L1 * L2 + L12)


def model_eigenfunction(nu: complex) -> ModelEigenfunction:
    return ModelEigenfunction(nu, 0)


def weighted_eigenfunction(nu: complex, n: int) -> ModelEigenfunction:
    return ModelEigenfunction(nu, n)


# --- Right translates and fiber averages ---

class RightTranslate(Observable):
    """g -> f(g k); derivatives become (Ad_{k^-1} W) f at g k."""

    def __init__(self, base: Observable, k: SL2Matrix):
        self.base = base
        self.k = k
        self._k = k.array
        self._k_inv = k.inverse()
        self.gamma_invariant = base.gamma_invariant
        self.feature_scale = base.feature_scale
        self.name = f"{base.name}.R"

    def evaluate_many(self, gs: np.ndarray) -> np.ndarray:
        return self.base.evaluate_many(as_stack(gs) @ self._k)

    def lie_derivative_many(self, W: LieVector, gs: np.ndarray) -> np.ndarray:
        return self.base.lie_derivative_many(adjoint(self._k_inv, W), as_stack(gs) @ self._k)

    def second_lie_derivative_many(self, W1: LieVector, W2: LieVector, gs: np.ndarray) -> np.ndarray:
        return self.base.second_lie_derivative_many(adjoint(self._k_inv, W1), adjoint(self._k_inv, W2),
                                                    as_stack(gs) @ self._k)

    def space_average(self, tol: float = 1e-10, method: str = "cartan") -> float:
        return self.base.space_average(tol, method)


class FiberAverage(Observable):
    """
    Weight-zero projection f0(g) = (1/2pi) int f(g k(phi)) dphi, by the
    periodic trapezoid rule on `nodes` points.
    """

    def __init__(self, base: Observable, nodes: int = 256):
        self.base = base
        self.nodes = nodes
        phi = 2.0 * math.pi * np.arange(nodes) / nodes
        self._ks = rotation_many(phi)
        self._k_invs = rotation_many(-phi)
        self.gamma_invariant = base.gamma_invariant
        self.feature_scale = base.feature_scale
        self.name = f"fiber({base.name})"

    def evaluate_many(self, gs: np.ndarray) -> np.ndarray:
        gs = as_stack(gs)
        return sum(self.base.evaluate_many(gs @ k) for k in self._ks) / self.nodes

    def lie_derivative_many(self, W: LieVector, gs: np.ndarray) -> np.ndarray:
        gs = as_stack(gs)
        total = 0.0
        for k, k_inv in zip(self._ks, self._k_invs):
            total = total + self.base.lie_derivative_many(LieVector.from_array(k_inv @ W.array @ k), gs @ k)
        return total / self.nodes

    def space_average(self, tol: float = 1e-10, method: str = "cartan") -> float:
        return self.base.space_average(tol, method)


def fiber_average(f: Observable, gs, nodes: int = 256) -> np.ndarray:
    return FiberAverage(f, nodes).evaluate_many(gs)


# --- Bumps on the quotient ---

def bump_support_radius(width: float) -> float:
    """Largest d(h.i, i) with ||h - I||_F <= width."""
    return math.acosh(math.sqrt(1.0 + width ** 2) + width ** 2 / 2.0)


def _angular_mass(A: np.ndarray, B: np.ndarray, width: float) -> np.ndarray:
    """int over psi of (1 - (A - B cos psi)/width^2)_+^4, elementwise in A, B."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    w2 = width * width
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_max = np.where(B > 0, (A - w2) / B, 2.0)
    psi_max = np.arccos(np.clip(cos_max, -1.0, 1.0))
    xg, wg = np.polynomial.legendre.leggauss(ANGULAR_NODES)
    psi = 0.5 * psi_max[..., None] * (xg + 1.0)
    base = 1.0 - (A[..., None] - B[..., None] * np.cos(psi)) / w2
    vals = np.clip(base, 0.0, None) ** 4
    # Even in psi: twice the integral over [0, psi_max].
    return psi_max * (vals @ wg)


def bump_mass(width: float, tol: float = 1e-12, method: str = "cartan",
              quadrature: Optional[PanelQuadrature] = None) -> float:
    """
    Haar integral over SL(2,R) of h -> (1 - ||h - I||_F^2 / width^2)_+^4.

    Haar measure is dx dy / y^2 dalpha with alpha in [0, 2pi). The "cartan"
    route integrates over k(phi1) a_t k(phi2); the "iwasawa" route over
    (x, log y) with the fiber angle done in closed form.
    """
    quad = quadrature or PanelQuadrature()
    r_w = bump_support_radius(width)
    if method == "cartan":
        def radial(t):
            A = 2.0 * np.cosh(t) + 2.0
            B = 4.0 * np.cosh(t / 2.0)
            return 2.0 * math.pi * np.sinh(t) * _angular_mass(A, B, width)
        return float(quad.integrate(radial, 0.0, r_w, tol).value)
    if method == "iwasawa":
        xg, wg = np.polynomial.legendre.leggauss(128)
        ch = math.cosh(r_w)

        def slab(u):
            y = np.exp(u)
            xm = np.sqrt(np.clip(2.0 * y * (ch - 1.0) - (y - 1.0) ** 2, 0.0, None))
            x = xm[:, None] * xg[None, :]
            yy = y[:, None]
            A = yy + (x ** 2 + 1.0) / yy + 2.0
            B = 2.0 * np.sqrt((np.sqrt(yy) + 1.0 / np.sqrt(yy)) ** 2 + x ** 2 / yy)
            inner = xm * (_angular_mass(A, B, width) @ wg)
            return np.exp(-u) * inner
        return float(quad.integrate(slab, -r_w, r_w, tol).value)
    raise ObservableError(f"Unknown bump-mass method '{method}'")


class GammaBump(Observable):
    """
    F(g) = sum over gamma in Gamma of phi(gamma g), where
    phi(h) = amplitude (1 - ||c^-1 h - I||_F^2 / width^2)_+^4 and c is the center.

    g is first reduced so that g.i lies in the fundamental domain; the sum then
    runs over the precomputed elements gamma with d(gamma.i, c.i) within the
    support radius plus the covering radius of the domain.
    """
    gamma_invariant = True

    def __init__(self, G: FuchsianGroup, center: SL2Matrix, width: float, amplitude: float = 1.0,
                 check_injectivity: bool = True):
        if not 0.0 < width <= MAX_BUMP_WIDTH:
            raise ObservableError(f"Bump width must lie in (0, {MAX_BUMP_WIDTH}], got {width!r}")
        domain = G.require_domain()
        self.group = G
        self.center = center
        self.width = float(width)
        self.amplitude = float(amplitude)
        self.feature_scale = self.width
        self.support_radius = bump_support_radius(self.width)
        self.name = f"bump(width={width})"

        base = I_POINT.z
        center_point = mobius(center, I_POINT).z
        d0 = hyp_dist(center_point, base)
        rho = domain.covering_radius(base)
        # ||c^-1 gamma c - I|| > sep for gamma != 1 keeps the support injective.
        self.separation = 2.0 * self.width / (1.0 - self.width)
        radius = max(d0 + self.support_radius + rho, 2.0 * d0 + bump_support_radius(self.separation))
        ball = enumerate_orbit_ball(G, I_POINT, radius)
        stab = G.stabilizer(I_POINT)
        elems = np.einsum("nij,hjk->nhik", ball.elements, stab).reshape(-1, 2, 2)
        elems = np.concatenate([elems, -elems])

        c_inv = center.inverse().array
        near = hyp_dist_many(mobius_many(elems, base), center_point) <= self.support_radius + rho + 1e-9
        self._terms = c_inv @ elems[near]
        logger.debug("%s: %d summands from %d orbit elements", self.name, self._terms.shape[0], elems.shape[0])

        if check_injectivity:
            dev = np.linalg.norm(c_inv @ elems @ center.array - np.eye(2), axis=(1, 2))
            clash = dev[dev > 1e-9]
            if clash.size and clash.min() <= self.separation:
                raise ObservableError(
                    f"Bump of width {width} does not inject into the quotient: a nontrivial element moves the "
                    f"center by {clash.min():.4g} <= {self.separation:.4g}"
                )

    def _local(self, gs: np.ndarray) -> np.ndarray:
        reduced, _ = reduce_elements(self.group, as_stack(gs))
        return np.einsum("jab,nbc->njac", self._terms, reduced)

    def evaluate_many(self, gs: np.ndarray) -> np.ndarray:
        m = self._local(gs)
        u = np.sum((m - np.eye(2)) ** 2, axis=(-2, -1)) / self.width ** 2
        v = np.clip(1.0 - u, 0.0, None)
        return (self.amplitude * np.sum(v ** 4, axis=1)).astype(complex)

    def lie_derivative_many(self, W: LieVector, gs: np.ndarray) -> np.ndarray:
        m = self._local(gs)
        E = m - np.eye(2)
        w2 = self.width ** 2
        v = np.clip(1.0 - np.sum(E ** 2, axis=(-2, -1)) / w2, 0.0, None)
        u1 = 2.0 * np.sum(E * (m @ W.array), axis=(-2, -1)) / w2
        return (self.amplitude * np.sum(-4.0 * v ** 3 * u1, axis=1)).astype(complex)

    def second_lie_derivative_many(self, W1: LieVector, W2: LieVector, gs: np.ndarray) -> np.ndarray:
        m = self._local(gs)
        E = m - np.eye(2)
        w2 = self.width ** 2
        v = np.clip(1.0 - np.sum(E ** 2, axis=(-2, -1)) / w2, 0.0, None)
        m1, m2 = m @ W1.array, m @ W2.array
        u1 = 2.0 * np.sum(E * m1, axis=(-2, -1)) / w2
        u2 = 2.0 * np.sum(E * m2, axis=(-2, -1)) / w2
        u12 = 2.0 * (np.sum(m1 * m2, axis=(-2, -1)) + np.sum(E * (m1 @ W2.array), axis=(-2, -1))) / w2
        return (self.amplitude * np.sum(12.0 * v ** 2 * u1 * u2 - 4.0 * v ** 3 * u12, axis=1)).astype(complex)

    def space_average(self, tol: float = 1e-10, method: str = "cartan") -> float:
        mass = bump_mass(self.width, tol=tol * self.group.covol_surface, method=method)
        return self.amplitude * mass / (math.pi * self.group.covol_surface)


def gamma_bump(G: FuchsianGroup, center: SL2Matrix, width: float, amplitude: float = 1.0) -> GammaBump:
    return GammaBump(G, center, width, amplitude)


def _profile(x: np.ndarray) -> np.ndarray:
    return np.clip(1.0 - x * x, 0.0, None) ** 4


class Mollifier(Observable):
    """
    K-invariant unit-mass bump around the identity coset:
    psi(g) = stab * c_delta * sum over z in Gamma.i of b(d(g.i, z) / delta),
    b(x) = (1 - x^2)_+^4, c_delta = 1 / (2 pi int_0^delta b(r/delta) sinh r dr).

    Mass is taken against the measure on G/Gamma pushed down from m_H, of
    total mass covol_surface.
    """
    gamma_invariant = True
    k_invariant = True

    def __init__(self, G: FuchsianGroup, delta: float):
        if not 0.0 < delta <= 1.0:
            raise ObservableError(f"Mollifier scale must lie in (0, 1], got {delta!r}")
        domain = G.require_domain()
        self.group = G
        self.delta = float(delta)
        self.feature_scale = self.delta
        self.name = f"mollifier(delta={delta})"
        radial = gauss_legendre(lambda r: 2.0 * math.pi * _profile(r / delta) * np.sinh(r), 0.0, delta, 64)
        self.c_delta = 1.0 / float(radial)
        self.normalization = G.stabilizer_order * self.c_delta
        ball = enumerate_orbit_ball(G, I_POINT, domain.covering_radius(I_POINT.z) + self.delta)
        self._orbit = ball.points

    def evaluate_many(self, gs: np.ndarray) -> np.ndarray:
        z, _ = reduce_points(self.group, mobius_many(as_stack(gs), 1j))
        d = hyp_dist_many(z[:, None], self._orbit[None, :])
        return (self.normalization * np.sum(_profile(d / self.delta), axis=1)).astype(complex)

    def density(self, z) -> np.ndarray:
        """Single-bump density about i, normalised so its m_H integral is 1."""
        d = hyp_dist_many(np.asarray(z, dtype=complex), 1j)
        return self.c_delta * _profile(d / self.delta)

    def mass(self, tol: float = 1e-10) -> float:
        """m_H integral of the single bump by nested circle quadrature."""
        return float(np.real(sphere_integrate(self.density, self.delta, tol=tol).value))

    def space_average(self, tol: float = 1e-10, method: str = "cartan") -> float:
        return 1.0 / self.group.covol_surface


def mollifier_family(delta: float, G: Optional[FuchsianGroup] = None) -> Mollifier:
    return Mollifier(G if G is not None else triangle_group(2, 3, 7), delta)


class TangentialDerivative(Observable):
    """
    F(g) = offset + (V h)(g) for a right-K-invariant h.

    Since Theta h = 0, V h is the derivative of h along the circle through
    g.i centred at the start of the geodesic, so
        k_theta(F)(p, t) - offset = -(h(p r_theta a_t) - h(p a_t)) / (theta sinh t)
    exactly, and every full-circle average equals the offset.
    """
    full_circle_flat = True

    def __init__(self, base: Observable, offset: complex = 0.0):
        if not getattr(base, "k_invariant", False):
            raise ObservableError(f"{base.name} is not right-K-invariant; V {base.name} is not tangential")
        self.base = base
        self.offset = complex(offset)
        self.gamma_invariant = base.gamma_invariant
        self.feature_scale = base.feature_scale
        self.group = getattr(base, "group", None)
        self.name = f"tangent({base.name}, c={offset})"

    def evaluate_many(self, gs: np.ndarray) -> np.ndarray:
        return self.offset + self.base.lie_derivative_many(V, gs)

    def lie_derivative_many(self, W: LieVector, gs: np.ndarray) -> np.ndarray:
        return self.base.second_lie_derivative_many(W, V, gs)

    def space_average(self, tol: float = 1e-10, method: str = "cartan") -> complex:
        return self.offset


# --- Averages and norms ---

def unfolded_average(F: Observable, tol: float = 1e-10, method: str = "cartan") -> float:
    """int_M F dvol for a Gamma-invariant observable, computed from a single chart."""
    if not F.gamma_invariant:
        raise ObservableError(f"{F.name} is not Gamma-invariant; it has no quotient average")
    return F.space_average(tol=tol, method=method)


def c1_norm_proxy(f: Observable, G: Optional[FuchsianGroup] = None, n_points: int = 1000, seed: int = 0,
                  points: Optional[np.ndarray] = None) -> float:
    """max of |f| + |Xf| + |Uf| + |Theta f| over sampled points; a lower bound for the C^1 norm."""
    if points is None:
        if G is None:
            raise ObservableError("c1_norm_proxy needs a group to sample from or explicit points")
        points = sample_quotient_array(G, n_points, seed)
    gs = as_stack(points)
    total = np.abs(f.evaluate_many(gs))
    for W in (X, U, THETA):
        total = total + np.abs(f.lie_derivative_many(W, gs))
    return float(np.max(total))


def nu_from_mu(mu: float) -> complex:
    disc = 1.0 - 4.0 * mu
    return complex(math.sqrt(disc)) if disc >= 0 else complex(0.0, math.sqrt(-disc))
