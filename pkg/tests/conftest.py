import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fujita_lab import Grid

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def grid1():
    return Grid(1, 32.0, 256)


@pytest.fixture
def grid2():
    return Grid(2, 16.0, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gaussian(grid, amp=1.0, sigma=1.0):
    return grid.sample(lambda *xs: amp * np.exp(-sum(x**2 for x in xs) / (2 * sigma**2)))
