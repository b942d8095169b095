import numpy as np
import pytest

from alip_mpc import RobotParams, TerrainPlane


@pytest.fixture
def params():
    return RobotParams(m=32.0, g=9.81, T_s=0.3, W=0.3)


@pytest.fixture
def flat():
    return TerrainPlane(k_x=0.0, k_y=0.0, mu=0.6, z_H=0.8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
