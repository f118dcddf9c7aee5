import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pshlab.grid import build_grid

settings.register_profile(
    "default", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def disk21():
    return build_grid("disk(1)", 21)


@pytest.fixture(scope="session")
def disk41():
    return build_grid("disk(1)", 41)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
