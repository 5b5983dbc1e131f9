import math

import numpy as np
import pytest

from hypcircle.errors import GeometryError
from hypcircle.hyperbolic import (HPoint, ball_area, circle_length, circle_point, circle_points_many, hyp_dist,
                                  hyp_dist_many, mobius, mobius_many, sphere_integrate, to_disc)
from hypcircle.sl2 import iwasawa_coords


def test_hpoint_rejects_lower_half_plane():
    with pytest.raises(GeometryError):
        HPoint(0.3, 0.0)


def test_negative_radius_is_rejected():
    with pytest.raises(GeometryError):
        ball_area(-1.0)
    with pytest.raises(GeometryError):
        circle_length(-0.1)


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0, 5.0])
def test_ball_area_by_quadrature(R):
    result = sphere_integrate(lambda z: np.ones(np.shape(z)), R, tol=1e-10)
    assert float(result.value) == pytest.approx(2.0 * math.pi * (math.cosh(R) - 1.0), rel=1e-8)
    assert ball_area(R) == pytest.approx(2.0 * math.pi * (math.cosh(R) - 1.0), rel=1e-13)


def test_radial_integration_agrees_with_full():
    center = HPoint(0.4, 1.3)
    f = lambda z: np.exp(-hyp_dist_many(z, center.z) ** 2)
    full = sphere_integrate(f, 2.0, tol=1e-9, center=center)
    radial = sphere_integrate(f, 2.0, tol=1e-9, center=center, radial=True)
    assert float(full.value) == pytest.approx(float(radial.value), rel=1e-7)


def test_zero_ball_is_empty():
    assert float(sphere_integrate(lambda z: np.ones(np.shape(z)), 0.0).value) == 0.0


def test_mobius_is_an_isometry(random_elements, rng):
    zs = rng.uniform(-3, 3, 50) + 1j * rng.uniform(0.1, 4, 50)
    ws = rng.uniform(-3, 3, 50) + 1j * rng.uniform(0.1, 4, 50)
    for m in random_elements(20):
        gz = mobius_many(m, zs)
        gw = mobius_many(m, ws)
        np.testing.assert_allclose(hyp_dist_many(gz, gw), hyp_dist_many(zs, ws), rtol=1e-9, atol=1e-10)


def test_mobius_scalar_matches_batched():
    g = iwasawa_coords(0.2, 0.7, 1.4)
    z = 0.5 + 2.0j
    assert mobius(g, z).z == pytest.approx(complex(mobius_many(g, z)[0]), abs=1e-13)


def test_circle_points_lie_on_circle():
    center = HPoint(-0.7, 0.6)
    s = np.linspace(0.0, 2.0 * math.pi, 33)
    for r in (0.1, 1.0, 4.0):
        pts = circle_points_many(center, r, s)
        np.testing.assert_allclose(hyp_dist_many(pts, center.z), r, rtol=1e-10)
        assert hyp_dist(circle_point(center, r, 1.3), center) == pytest.approx(r, rel=1e-10)


def test_circle_length_by_polygon():
    center = HPoint(0.0, 2.0)
    r = 1.5
    s = np.linspace(0.0, 2.0 * math.pi, 20_001)
    pts = circle_points_many(center, r, s)
    perimeter = float(np.sum(hyp_dist_many(pts[1:], pts[:-1])))
    assert perimeter == pytest.approx(circle_length(r), rel=1e-7)


def test_to_disc_sends_base_to_origin():
    base = HPoint(1.0, 0.5)
    assert abs(to_disc(base, base)) < 1e-15
    assert abs(to_disc(5.0 + 0.01j, base)) < 1.0
