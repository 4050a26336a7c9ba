import sys
from pathlib import Path

import pytest

from backcoop import ChannelGains, HarvestPolicy, SystemParams, path_loss_gain

sys.path.insert(0, str(Path(__file__).parent))

H_E, H_A = 8.5e-5, 8.5e-6


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def policy():
    return HarvestPolicy()


@pytest.fixture
def fig_gains():
    h = path_loss_gain(4.0, SystemParams())
    return ChannelGains(H_E, H_E, H_A, H_A, h, h)
