import pytest
from hypothesis import HealthCheck, settings

from minimaxkern.estimator import EstimatorConfig
from minimaxkern.model import get_noise, scale_catalog

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def mixed_scale():
    return scale_catalog()["mixed"]


@pytest.fixture(scope="session")
def gaussian():
    return get_noise("gaussian")


@pytest.fixture(scope="session")
def cfg_1e5():
    return EstimatorConfig(n=100_000, beta=2.0, z0=0.5)


@pytest.fixture(scope="session")
def plateau_kernel_01():
    from minimaxkern.lowerbound import build_kernel
    return build_kernel(0.1)
