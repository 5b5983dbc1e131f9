"""
Upper half-plane model: Mobius action, distances, circles, areas and the
radial sphere-integration formula.
"""

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import GeometryError, QuadratureError
from .quadrature import PanelQuadrature, QuadratureResult
from .sl2 import SL2Matrix, as_stack, diagonal, iwasawa_coords, rotation

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise GeometryError(f"Point is not in the upper half-plane: y = {self.y!r}")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


I_POINT = HPoint(0.0, 1.0)

PointLike = Union[HPoint, complex]


def _as_complex(z: PointLike) -> complex:
    return z.z if isinstance(z, HPoint) else complex(z)


def mobius(g: SL2Matrix, z: PointLike) -> HPoint:
    """(az + b) / (cz + d); the imaginary part is computed as Im z / |cz + d|^2."""
    zc = _as_complex(z)
    den = g.c * zc + g.d
    w = (g.a * zc + g.b) / den
    return HPoint(w.real, zc.imag / abs(den) ** 2)


def mobius_many(gs, zs) -> np.ndarray:
    """Vectorised Mobius action; `gs` is a stack or a single matrix, `zs` a complex array or scalar."""
    gs = as_stack(gs)
    zs = np.asarray(zs, dtype=complex)
    a, b, c, d = gs[:, 0, 0], gs[:, 0, 1], gs[:, 1, 0], gs[:, 1, 1]
    den = c * zs + d
    w = (a * zs + b) / den
    return w.real + 1j * (zs.imag / np.abs(den) ** 2)


def hyp_dist(z: PointLike, w: PointLike) -> float:
    """Hyperbolic distance, cosh d = 1 + |z - w|^2 / (2 Im z Im w), in its asinh form."""
    zc, wc = _as_complex(z), _as_complex(w)
    return 2.0 * math.asinh(abs(zc - wc) / (2.0 * math.sqrt(zc.imag * wc.imag)))


def hyp_dist_many(zs, ws) -> np.ndarray:
    zs = np.asarray(zs, dtype=complex)
    ws = np.asarray(ws, dtype=complex)
    return 2.0 * np.arcsinh(np.abs(zs - ws) / (2.0 * np.sqrt(zs.imag * ws.imag)))


def ball_area(R: float) -> float:
    """m_H(B_R) = 2 pi (cosh R - 1), written as 4 pi sinh^2(R/2)."""
    if R < 0:
        raise GeometryError(f"Radius must be non-negative, got {R!r}")
    return 4.0 * math.pi * math.sinh(R / 2.0) ** 2


def circle_length(r: float) -> float:
    if r < 0:
        raise GeometryError(f"Radius must be non-negative, got {r!r}")
    return TWO_PI * math.sinh(r)


def circle_point(center: PointLike, r: float, s: float) -> HPoint:
    """
    Point at parameter s on the circle of radius r about `center`.

    Realised as g exp(s Theta) exp(r X) . i with g.i = center; s runs over
    [0, 2pi) once around the circle.
    """
    c = _as_complex(center)
    g = iwasawa_coords(c.real, c.imag, 0.0)
    return mobius(g @ rotation(s / 2.0) @ diagonal(r), I_POINT)


def circle_points_many(center: PointLike, r, s) -> np.ndarray:
    """Points on circles about `center` for broadcastable arrays of radii and parameters."""
    c = _as_complex(center)
    r, s = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(s, dtype=float))
    # exp(s Theta) exp(r X) . i sits at tanh(r/2) e^{is} in the Cayley disc about i.
    w = np.tanh(r / 2.0) * np.exp(1j * s)
    z_from_i = 1j * (1.0 + w) / (1.0 - w)
    g = iwasawa_coords(c.real, c.imag, 0.0)
    return mobius_many(g, z_from_i.ravel()).reshape(r.shape)


def to_disc(z, base: PointLike = I_POINT):
    """Cayley map of H to the unit disc sending `base` to 0."""
    b = _as_complex(base)
    z = np.asarray(z, dtype=complex) if not isinstance(z, HPoint) else z.z
    return (z - b) / (z - np.conj(b))


def sphere_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    R: float,
    tol: float = 1e-8,
    center: PointLike = I_POINT,
    radial: bool = False,
    quadrature: PanelQuadrature = None,
) -> QuadratureResult:
    """
    Integral of f over the hyperbolic ball B_R(center) as an integral over spheres.

    Computes int_0^R sinh r int_0^{2pi} f(circle point) ds dr by nested
    panel-doubling quadrature. With `radial=True` the integrand is taken to
    depend on r only and is sampled on a single ray.

    Args:
        f: Vectorised map from complex points to values.
        R: Ball radius.
        tol: Target absolute error.
        center: Ball center.
        radial: Use the one-dimensional radial formula.

    Returns:
        QuadratureResult with the value and its error estimate.

    Raises:
        QuadratureError: If the tolerance is not met within the node cap; the
            exception carries the achieved estimate.
    """
    if R < 0:
        raise GeometryError(f"Radius must be non-negative, got {R!r}")
    quad = quadrature or PanelQuadrature()
    if R == 0:
        return QuadratureResult(value=0.0, error_estimate=0.0, nodes_used=0)

    if radial:
        def ray(r):
            vals = np.asarray(f(circle_points_many(center, r, 0.0)))
            return TWO_PI * np.sinh(r) * vals
        return quad.integrate(ray, 0.0, R, tol)

    inner_tol = tol / (10.0 * max(ball_area(R), 1.0))
    inner_nodes = max(32, int(8 * math.sinh(R)))

    def shell(r):
        def around(s):
            pts = circle_points_many(center, r[None, :], s[:, None])
            return np.asarray(f(pts))
        try:
            inner = quad.integrate(around, 0.0, TWO_PI, inner_tol, initial_nodes=inner_nodes)
        except QuadratureError as exc:
            raise QuadratureError(f"Circle integral did not converge: {exc}", estimate=exc.estimate,
                                  error_estimate=exc.error_estimate, nodes_used=exc.nodes_used) from exc
        return np.sinh(r) * inner.value

    return quad.integrate(shell, 0.0, R, tol)
