import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cogmac.model import SensingModel, UnslottedChannelParams

REF_LAMBDA_FREE = (0.2, 0.17, 0.15, 0.13, 0.11)
REF_LAMBDA_BUSY = (1.0, 0.9, 0.8, 0.7, 0.6)


@pytest.fixture(scope="session")
def reference_channels():
    return [UnslottedChannelParams(a, b)
            for a, b in zip(REF_LAMBDA_FREE, REF_LAMBDA_BUSY)]


@pytest.fixture(scope="session")
def perfect_sensing():
    return SensingModel.perfect(sensing_time=0.01)


@pytest.fixture(scope="session")
def configs_dir():
    return Path(__file__).parent.parent / "configs"
