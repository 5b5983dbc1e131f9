import math

import numpy as np
import pytest

from hypcircle.errors import QuadratureError
from hypcircle.quadrature import PanelQuadrature, gauss_legendre


def test_integrates_smooth_function():
    result = PanelQuadrature().integrate(np.cos, 0.0, 10.0, tol=1e-12)
    assert float(result.value) == pytest.approx(math.sin(10.0), abs=1e-12)
    assert result.error_estimate <= 1e-12


def test_vector_valued_integrand():
    fn = lambda x: np.stack([x, x ** 2], axis=-1)
    result = PanelQuadrature().integrate(fn, 0.0, 3.0, tol=1e-12)
    np.testing.assert_allclose(result.value, [4.5, 9.0], rtol=1e-13)


def test_chunking_does_not_change_the_value():
    fn = lambda x: np.exp(-x) * np.sin(5 * x)
    coarse = PanelQuadrature(chunk_size=7).integrate(fn, 0.0, 4.0, tol=1e-12)
    fine = PanelQuadrature().integrate(fn, 0.0, 4.0, tol=1e-12)
    assert float(coarse.value) == pytest.approx(float(fine.value), abs=1e-14)


def test_node_cap_raises_with_estimate():
    quad = PanelQuadrature(order=4, max_nodes=64)
    with pytest.raises(QuadratureError) as info:
        quad.integrate(lambda x: np.sin(200.0 * x), 0.0, 10.0, tol=1e-14)
    assert info.value.estimate is not None
    assert info.value.nodes_used > 0


def test_empty_interval():
    assert float(PanelQuadrature().integrate(np.exp, 1.0, 1.0, tol=1e-9).value) == 0.0


def test_fixed_rule_is_exact_for_polynomials():
    assert float(gauss_legendre(lambda x: x ** 7 - x ** 2, -1.0, 2.0, 4)) == pytest.approx(
        (2.0 ** 8 - 1.0) / 8.0 - (8.0 + 1.0) / 3.0, rel=1e-13)
