import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qpspec.cocycle import CocycleParams
from qpspec.numtheory import golden_frequency
from qpspec.potential import amo_potential, gevrey2_potential, zero_potential

settings.register_profile(
    "suite", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")


@pytest.fixture(scope="session")
def golden():
    return golden_frequency()


@pytest.fixture(scope="session")
def amo_params(golden):
    """AMO at coupling 10, the workhorse configuration."""
    return CocycleParams(potential=amo_potential(), lam=10.0, omega=golden,
                         E=0.0)


@pytest.fixture(scope="session")
def gevrey_params(golden):
    return CocycleParams(potential=gevrey2_potential(), lam=10.0,
                         omega=golden, E=0.0)


@pytest.fixture(scope="session")
def free_params(golden):
    return CocycleParams(potential=zero_potential(), lam=1.0, omega=golden,
                         E=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
