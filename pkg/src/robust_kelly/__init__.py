"""Distributionally robust log-optimal portfolios over discrete return scenarios."""

from . import ambiguity, backtest, hyperplane, lp, robust, scenarios
from .ambiguity import AmbiguitySet, BoxSpec, box
from .backtest import BacktestReport, Trajectory
from .hyperplane import HyperplaneSet
from .robust import RobustSolution, TradingConstraints, Weights, solve_robust, worst_case_elg
from .scenarios import ScenarioSet, make_scenarios

__version__ = "0.1.0"

__all__ = [
    "AmbiguitySet",
    "BacktestReport",
    "BoxSpec",
    "HyperplaneSet",
    "RobustSolution",
    "ScenarioSet",
    "TradingConstraints",
    "Trajectory",
    "Weights",
    "ambiguity",
    "backtest",
    "box",
    "hyperplane",
    "lp",
    "make_scenarios",
    "robust",
    "scenarios",
    "solve_robust",
    "worst_case_elg",
]
