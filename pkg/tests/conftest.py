import numpy as np
import pytest

from cartpole_lab.params import PhysicalParams
from cartpole_lab.policy import init_policy


@pytest.fixture
def nominal():
    return PhysicalParams()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_policy():
    return init_policy(7)
