import numpy as np
import pytest

from hypcircle.fuchsian import triangle_group
from hypcircle.observables import GammaBump
from hypcircle.sl2 import iwasawa_coords, iwasawa_many


@pytest.fixture(scope="session")
def group_237():
    return triangle_group(2, 3, 7)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_bump(group_237):
    return GammaBump(group_237, iwasawa_coords(0.0, 1.15, 0.5), 0.2)


@pytest.fixture
def base_point():
    return iwasawa_coords(0.1, 1.2, 0.3)


@pytest.fixture
def random_elements(rng):
    """Factory for stacks g = n_x a_y k(angle) with moderate entries."""
    def make(n, x_scale=2.0, y_range=(0.2, 5.0)):
        x = rng.uniform(-x_scale, x_scale, n)
        y = np.exp(rng.uniform(np.log(y_range[0]), np.log(y_range[1]), n))
        angle = rng.uniform(0.0, 2.0 * np.pi, n)
        return iwasawa_many(x, y, angle)
    return make
