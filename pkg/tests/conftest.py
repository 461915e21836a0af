import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bendsim.dynamics import ActuatorGeometry, DynamicsParams, build_chain
from bendsim.integrator import PressureTrace

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def bench_geometry():
    return ActuatorGeometry(r1=0.014, r2=0.010, wall=0.004,
                            total_length=0.17, total_mass=0.069)


@pytest.fixture(scope="session")
def bench_params():
    return DynamicsParams.uniform(1.6067, 0.008, 5)


@pytest.fixture(scope="session")
def bench_chain(bench_geometry):
    return build_chain(bench_geometry, 5)


@pytest.fixture(scope="session")
def bench_pulse():
    return PressureTrace.rectangular(0.12, 2.76, 119e3)


@pytest.fixture
def rng():
    return np.random.default_rng(20260813)
