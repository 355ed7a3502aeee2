import numpy as np
import pytest

from vpfplab.dynamics import PhaseState, SimParams
from vpfplab.fields import (
    IsotropicGaussian, TruncatedGaussianVelocity, UniformBall)
from vpfplab.kernels import DEFAULT_PROFILE, KernelConfig

"""
    Pytest fixture statements, shared by the tests of several modules.
    Session scoped fixtures are immutable values and may be shared freely.
    Acceptance-scale tests are marked ``slow`` and only run with
    ``--runslow``.
"""


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help="run acceptance-scale tests marked slow")


def pytest_configure(config):
    config.addinivalue_line('markers', "slow: acceptance-scale test, needs "
                                       "--runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope='session')
def profile():
    """
    The default C² polynomial bump
    """
    return DEFAULT_PROFILE


@pytest.fixture(scope='session')
def kernel_config():
    """
    Kernel at N = 1000 with the default exponents, cut-off length 0.1
    """
    return KernelConfig(n_particles=1000)


@pytest.fixture(scope='session')
def gaussian():
    return IsotropicGaussian(1.0)


@pytest.fixture(scope='session')
def velocity():
    return TruncatedGaussianVelocity(1.0)


@pytest.fixture(scope='session')
def ball():
    return UniformBall(1.0)


@pytest.fixture
def rng():
    """
    A fresh, fixed-seed numpy Generator per test
    """
    return np.random.default_rng(12345)


@pytest.fixture
def small_state(rng, gaussian, velocity):
    """
    32 particles drawn from the Gaussian fixtures
    """
    return PhaseState(gaussian.sample(rng, 32), velocity.sample(rng, 32))


@pytest.fixture(scope='session')
def short_params():
    """
    A 10 step run with a distance record at every step
    """
    return SimParams(sigma=0.5, horizon=0.1, dt=0.01, seed=7, record_every=1)
