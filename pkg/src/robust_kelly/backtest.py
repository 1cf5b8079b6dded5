"""Constant-weight account simulation, performance metrics and the drawdown surrogate."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .robust import SurvivalError
from .scenarios import fee_adjusted_returns

DEFAULT_COST = 1e-4
DEFAULT_RISK_FREE_TOTAL = 0.01


@dataclass(frozen=True)
class Trajectory:
    v: np.ndarray  # V(0..N)
    period_returns: np.ndarray  # R^p(0..N-1)
    ruined: bool = False

    @classmethod
    def from_values(cls, v) -> "Trajectory":
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.size < 1 or v[0] <= 0:
            raise ValueError("a trajectory needs V(0) > 0")
        ruined = bool(np.any(v[1:] <= 0))
        if ruined:
            v = v[: int(np.flatnonzero(v <= 0)[0]) + 1]
        return cls(v, np.diff(v) / v[:-1], ruined)

    @property
    def N(self) -> int:
        return self.period_returns.shape[0]

    def scaled(self, factor: float) -> "Trajectory":
        return Trajectory(self.v * factor, self.period_returns, self.ruined)

    def to_csv(self) -> str:
        lines = ["k,V,Rp"]
        for k, val in enumerate(self.v):
            rp = f"{self.period_returns[k]:.12g}" if k < self.N else ""
            lines.append(f"{k},{val:.12g},{rp}")
        return "\n".join(lines) + "\n"


def run(scenario_path, weights, costs=0.0, v0: float = 1.0, use_numba: bool | None = None) -> Trajectory:
    """Wealth under constant weights: ``V(k+1) = V(k) (1 + sum_i K_i Xtilde_i(k))``.

    Stops (``ruined=True``) at the first period where wealth is no longer positive.
    """
    X = np.atleast_2d(np.asarray(scenario_path, dtype=float))
    k = np.asarray(getattr(weights, "k", weights), dtype=float).reshape(-1)
    if X.shape[1] != k.shape[0]:
        raise ValueError(f"return vectors have {X.shape[1]} assets, weights have {k.shape[0]}")
    if not v0 > 0:
        raise ValueError("initial wealth must be positive")
    growth = np.ascontiguousarray(fee_adjusted_returns(X, costs, k) @ k)
    v = _accel.kernel("wealth", use_numba)(growth, float(v0))
    ruined = bool(v[-1] <= 0.0)
    return Trajectory(v, growth[: v.shape[0] - 1].copy(), ruined)


def max_drawdown(traj: Trajectory, use_numba: bool | None = None) -> float:
    """Largest peak-to-trough fraction ``(V(l) - V(k)) / V(l)`` over ``l <= k``.

    A ruined trajectory reports 1.
    """
    if traj.ruined:
        return 1.0
    return float(_accel.kernel("drawdown", use_numba)(np.ascontiguousarray(traj.v)))


@dataclass(frozen=True)
class BacktestReport:
    avg_excess_return: float
    std_excess: float
    sharpe_N: float | None  # None when the excess returns have zero spread
    cumulative_return: float
    log_growth: float | None  # None after ruin
    max_drawdown: float
    terminal_value: float
    N: int
    risk_free: float
    ruined: bool = False

    def to_json(self) -> dict:
        return {
            "avg_excess_return": self.avg_excess_return,
            "std_excess": self.std_excess,
            "sharpe_N": self.sharpe_N,
            "cumulative_return": self.cumulative_return,
            "log_growth": self.log_growth,
            "max_drawdown": self.max_drawdown,
            "terminal_value": self.terminal_value,
            "N": self.N,
            "risk_free": self.risk_free,
            "ruined": self.ruined,
        }


def report(traj: Trajectory, r_f: float | None = None) -> BacktestReport:
    """Performance summary; ``r_f`` is per period and defaults to ``0.01 / N``."""
    N = traj.N
    if N < 2:
        raise ValueError("need at least 2 periods for a report")
    if r_f is None:
        r_f = DEFAULT_RISK_FREE_TOTAL / N
    excess = traj.period_returns - r_f
    mean = float(excess.mean())
    std = float(excess.std(ddof=1))
    sharpe = None if std <= 1e-12 * max(1.0, abs(mean)) else math.sqrt(N) * mean / std
    ratio = traj.v[-1] / traj.v[0]
    return BacktestReport(
        avg_excess_return=mean,
        std_excess=std,
        sharpe_N=sharpe,
        cumulative_return=float(ratio - 1.0),
        log_growth=float(math.log(ratio)) if ratio > 0 else None,
        max_drawdown=max_drawdown(traj),
        terminal_value=float(traj.v[-1]),
        N=N,
        risk_free=float(r_f),
        ruined=traj.ruined,
    )


def _path_logs(k: np.ndarray, path, index: int) -> np.ndarray:
    X = np.atleast_2d(np.asarray(path, dtype=float))
    gross = 1.0 + X @ k
    bad = np.flatnonzero(gross <= 0.0)
    if bad.size:
        err = SurvivalError(int(bad[0]), float(gross[bad[0]]))
        err.path = index
        raise err
    return np.ascontiguousarray(np.log(gross))


def log_drawdown_per_path(weights, paths, use_numba: bool | None = None) -> np.ndarray:
    """``min_{l <= k} sum_{i=l}^{k-1} log(1 + K^T X(i))`` for each path (empty sum = 0).

    Each value is checked against ``log(1 - max_drawdown)`` of the same path.
    """
    k = np.asarray(getattr(weights, "k", weights), dtype=float).reshape(-1)
    mps = _accel.kernel("min_partial_sum", use_numba)
    out = np.empty(len(paths))
    for idx, path in enumerate(paths):
        s = _path_logs(k, path, idx)
        val = float(mps(s))
        v = np.exp(np.concatenate(([0.0], np.cumsum(s))))
        direct = math.log1p(-max_drawdown(Trajectory(v, np.expm1(s)), use_numba))
        if abs(val - direct) > 1e-9:
            raise RuntimeError(f"drawdown surrogate mismatch on path {idx}: {val} vs {direct}")
        out[idx] = val
    return out


def drawdown_surrogate(weights, paths, use_numba: bool | None = None) -> float:
    """Sample mean of ``log D_K`` (``D_K = 1 - max drawdown``) over ``paths``."""
    if len(paths) == 0:
        raise ValueError("need at least one path")
    return float(np.mean(log_drawdown_per_path(weights, paths, use_numba)))
