import numpy as np
import pytest

from robust_kelly import ambiguity as amb
from robust_kelly.robust import TradingConstraints
from robust_kelly.scenarios import make_scenarios

TOY_RETURNS = [[0.1, -0.1], [-0.25, 0.3]]
TOY_NOMINAL = [0.7, 0.3]


@pytest.fixture
def toy():
    return make_scenarios(TOY_RETURNS, TOY_NOMINAL)


@pytest.fixture
def toy_constraints():
    return TradingConstraints(L=1.0, k_min=0.0, k_max=0.5)


@pytest.fixture
def toy_box():
    def build(gamma):
        return amb.box(TOY_NOMINAL, gamma=gamma)
    return build


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
