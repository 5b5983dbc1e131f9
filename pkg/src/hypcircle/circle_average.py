"""
Circle-arc averages k(p, t) = (1/theta) int_0^theta f(p exp(s Theta) exp(t X)) ds,
their t-derivatives, the arc boundary terms A and B, and the forcing G of the
second-order equation k'' + k' + mu k = e^{-t} G satisfied by arc averages of
Casimir/Theta eigenfunctions.
"""

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Any, Callable, NamedTuple, Optional

import numpy as np

from .errors import QuadratureError, SpectralError
from .observables import FOUR_PI, Observable, RightTranslate, SpectralParams
from .parallel import chunked, parallel_map
from .quadrature import PanelQuadrature
from .sl2 import THETA, U, X, SL2Matrix, as_stack, cartan, diagonal, exp_lie, rotation_many

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
MIN_NODES = 64
# Arc nodes per unit of theta * e^t / feature_scale.
NODE_DENSITY = 8.0
T_CAP = 12.0
BATCH = 16

ValuesFn = Callable[[np.ndarray], np.ndarray]


@dataclass
class CircleAverageResult:
    value: Any
    error_estimate: float
    nodes_used: int


class ArcDerivatives(NamedTuple):
    k: complex
    dk: complex
    ddk: complex


class BoundaryTerms(NamedTuple):
    A: complex
    B: complex


def node_budget(theta: float, t: float, feature_scale: float = 1.0) -> int:
    """Initial node count: the arc grows like e^t while the feature scale stays fixed."""
    return max(MIN_NODES, math.ceil(NODE_DENSITY * theta * math.exp(t) / feature_scale))


def _check_arc(theta: float, t: float, tol: float, t_cap: float) -> None:
    if not 0.0 < theta <= FOUR_PI + 1e-12:
        raise SpectralError(f"Arc length theta must lie in (0, 4pi], got {theta!r}")
    if not tol > 0:
        raise QuadratureError(f"Quadrature tolerance must be positive, got {tol!r}")
    if t > t_cap:
        raise QuadratureError(f"t = {t} exceeds the cap {t_cap}; pass a larger t_cap to override")


def mean_over(integrand: ValuesFn, length: float, tol: float, nodes: int,
              quadrature: Optional[PanelQuadrature] = None, what: str = "average") -> CircleAverageResult:
    """(1/length) int_0^length integrand, with absolute tolerance `tol` on the mean."""
    quad = quadrature or PanelQuadrature()
    nodes = min(nodes, quad.max_nodes // 4)
    try:
        res = quad.integrate(integrand, 0.0, length, tol * length, initial_nodes=nodes)
    except QuadratureError as exc:
        estimate = None if exc.estimate is None else exc.estimate / length
        raise QuadratureError(f"{what} did not converge: {exc}", estimate=estimate,
                              error_estimate=exc.error_estimate / length, nodes_used=exc.nodes_used) from exc
    return CircleAverageResult(value=res.value / length, error_estimate=res.error_estimate / length,
                               nodes_used=res.nodes_used)


def arc_average(values_fn: ValuesFn, ps, theta: float, t: float, tol: float = DEFAULT_TOL,
                feature_scale: float = 1.0, quadrature: Optional[PanelQuadrature] = None,
                t_cap: float = T_CAP) -> CircleAverageResult:
    """
    Arc average of `values_fn` for every base point in `ps`.

    `values_fn` maps an (N, 2, 2) stack to an array with first axis N and any
    trailing component axes. The result value has shape (len(ps), ...); the
    tolerance applies to every component of every base point.
    """
    _check_arc(theta, t, tol, t_cap)
    ps = as_stack(ps)
    a_t = diagonal(t).array

    def integrand(s):
        gs = ps[None, :, :, :] @ rotation_many(s / 2.0)[:, None, :, :] @ a_t
        vals = np.asarray(values_fn(gs.reshape(-1, 2, 2)))
        return vals.reshape((s.size, ps.shape[0]) + vals.shape[1:])

    res = mean_over(integrand, theta, tol, node_budget(theta, t, feature_scale), quadrature,
                    what=f"Arc average (theta={theta:.6g}, t={t:.6g})")
    logger.debug("arc theta=%.4g t=%.4g: %d nodes, err=%.3e", theta, t, res.nodes_used, res.error_estimate)
    return res


def k_theta(f: Observable, p: SL2Matrix, theta: float, t: float, tol: float = DEFAULT_TOL,
            quadrature: Optional[PanelQuadrature] = None, t_cap: float = T_CAP) -> CircleAverageResult:
    """
    Average of f over the time-t geodesic push of the rotation arc of length theta at p.

    Raises:
        QuadratureError: The node cap was reached; the exception carries the best estimate.
    """
    res = arc_average(f.evaluate_many, p, theta, t, tol, f.feature_scale, quadrature, t_cap)
    return CircleAverageResult(value=complex(res.value[0]), error_estimate=res.error_estimate,
                               nodes_used=res.nodes_used)


def _k_theta_batch(ps: np.ndarray, f: Observable, theta: float, t: float, tol: float) -> np.ndarray:
    return arc_average(f.evaluate_many, ps, theta, t, tol, f.feature_scale).value


def k_theta_many(f: Observable, ps, theta: float, t: float, tol: float = DEFAULT_TOL,
                 workers: int = 1) -> np.ndarray:
    """k_theta for a stack of base points; batches are fixed so the worker count never changes results."""
    ps = as_stack(ps)
    batches = chunked(ps, BATCH)
    job = partial(_k_theta_batch, f=f, theta=theta, t=t, tol=tol)
    parts = parallel_map(job, batches, workers=workers, desc=f"arcs t={t:g}")
    return np.concatenate(parts) if parts else np.zeros(0, dtype=complex)


def k_theta_derivatives(f: Observable, p: SL2Matrix, theta: float, t: float, tol: float = DEFAULT_TOL,
                        quadrature: Optional[PanelQuadrature] = None, t_cap: float = T_CAP) -> ArcDerivatives:
    """(k, k', k'') as arc averages of f, Xf and X^2 f, integrated on one shared node set."""
    def values(gs):
        return np.stack([f.evaluate_many(gs), f.lie_derivative_many(X, gs),
                         f.second_lie_derivative_many(X, X, gs)], axis=-1)
    res = arc_average(values, p, theta, t, tol, f.feature_scale, quadrature, t_cap)
    k, dk, ddk = (complex(v) for v in res.value[0])
    return ArcDerivatives(k, dk, ddk)


def boundary_terms(f: Observable, p: SL2Matrix, theta: float, t: float) -> BoundaryTerms:
    """A = f at the arc end minus f at the arc start, both pushed to time t; B is the same for Uf."""
    a_t = diagonal(t)
    ends = np.stack([(p @ exp_lie(THETA, theta) @ a_t).array, (p @ a_t).array])
    fv = f.evaluate_many(ends)
    uv = f.lie_derivative_many(U, ends)
    return BoundaryTerms(A=complex(fv[0] - fv[1]), B=complex(uv[0] - uv[1]))


def forcing_from_parts(n: int, theta: float, t, k, dk, A, B):
    """Assemble G from the arc averages k, k' and the boundary terms A, B."""
    t = np.asarray(t, dtype=float)
    e1 = np.exp(-t)
    den = -np.expm1(-2.0 * t)
    return (n * n * e1 / den ** 2 * k
            - 2.0 * e1 / den * dk
            + 2j * n * e1 * e1 / (theta * den ** 2) * A
            + 2.0 / (theta * den) * B)


def G_coefficient(f: Observable, p: SL2Matrix, params: SpectralParams, t: float, tol: float = DEFAULT_TOL,
                  quadrature: Optional[PanelQuadrature] = None, t_cap: float = T_CAP) -> complex:
    if not t > 0:
        raise SpectralError(f"The forcing G is defined for t > 0, got {t!r}")
    theta = params.theta

    def values(gs):
        return np.stack([f.evaluate_many(gs), f.lie_derivative_many(X, gs)], axis=-1)

    res = arc_average(values, p, theta, t, tol, f.feature_scale, quadrature, t_cap)
    k, dk = res.value[0]
    A, B = boundary_terms(f, p, theta, t)
    return complex(forcing_from_parts(params.n, theta, t, k, dk, A, B))


def G_coefficient_many(f: Observable, p: SL2Matrix, params: SpectralParams, ts, tol: float = DEFAULT_TOL,
                       t_cap: float = T_CAP) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    return np.array([G_coefficient(f, p, params, float(t), tol, t_cap=t_cap) for t in ts], dtype=complex)


def ode_residual(f: Observable, p: SL2Matrix, params: SpectralParams, t: float,
                 tol: float = DEFAULT_TOL) -> complex:
    """k'' + k' + mu k - e^{-t} G; zero for a joint eigenfunction with these parameters."""
    k, dk, ddk = k_theta_derivatives(f, p, params.theta, t, tol)
    A, B = boundary_terms(f, p, params.theta, t)
    G = forcing_from_parts(params.n, params.theta, t, k, dk, A, B)
    return complex(ddk + dk + params.mu * k - math.exp(-t) * G)


def translate_average(f: Observable, p: SL2Matrix, g: SL2Matrix, method: str = "direct",
                      tol: float = DEFAULT_TOL, quadrature: Optional[PanelQuadrature] = None,
                      t_cap: float = T_CAP) -> CircleAverageResult:
    """
    Average of f over the translated circle {p k g : k in K}.

    "direct" integrates over k(phi), phi in [0, 2pi). "cartan" writes
    g = k1 a(t) k2 and returns the full-circle average at time t(g) of the
    right translate f(. k2).
    """
    factors = cartan(g)
    if method == "cartan":
        return k_theta(RightTranslate(f, factors.k2), p, FOUR_PI, factors.t, tol, quadrature, t_cap)
    if method != "direct":
        raise ValueError(f"Unknown translate-average method '{method}'")
    if factors.t > t_cap:
        raise QuadratureError(f"Cartan time {factors.t} exceeds the cap {t_cap}")
    pm, gm = p.array, g.array

    def integrand(phi):
        return f.evaluate_many(pm @ rotation_many(phi) @ gm)

    res = mean_over(integrand, 2.0 * math.pi, tol, node_budget(FOUR_PI, factors.t, f.feature_scale), quadrature,
                    what="Translate average")
    return CircleAverageResult(value=complex(res.value), error_estimate=res.error_estimate,
                               nodes_used=res.nodes_used)
