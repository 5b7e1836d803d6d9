import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from boseglow.params import ModelParams, derive


@pytest.fixture
def mid_density():
    """x = 1, sigma_T = 100 MeV: everything of order one."""
    params = ModelParams.from_natural(n0=1.0, x=1.0, sigma_t2=10000.0)
    return params, derive(params)


@pytest.fixture
def pion_source():
    """Physical-scale inputs (pion mass, hot fm-sized source)."""
    params = ModelParams(n0=1.0, R=5.0, T=100.0, m=139.57, sigma=150.0)
    return params, derive(params)
