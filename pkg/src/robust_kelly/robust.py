"""Worst-case expected log-growth and the hyperplane-approximated robust Kelly LP."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lp
from .ambiguity import AmbiguitySet
from .hyperplane import HyperplaneError, HyperplaneSet, generate
from .scenarios import ScenarioSet

RANGE_PAD = 1e-9


class OptimizationError(RuntimeError):
    """The LP solver did not return an optimum (infeasible, unbounded or stalled)."""


class SurvivalError(ValueError):
    """Some scenario sends ``1 + K^T x`` to zero or below."""

    def __init__(self, scenario: int, value: float):
        super().__init__(f"non-survival at scenario {scenario}: 1 + K^T x = {value:.6g}")
        self.scenario = scenario
        self.value = value


@dataclass(frozen=True)
class TradingConstraints:
    """Leverage cap ``L`` and per-asset bounds on the net weight ``K_i``.

    ``k_min``/``k_max`` may be scalars (broadcast per asset) or vectors; infinite
    bounds drop the corresponding row. Long-only is ``k_min = 0``.
    """

    L: float = 1.0
    k_min: float | np.ndarray = 0.0
    k_max: float | np.ndarray = 1.0

    def __post_init__(self):
        if not float(self.L) >= 1.0:
            raise ValueError("leverage cap L must be at least 1")

    def bounds(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        lo = np.broadcast_to(np.asarray(self.k_min, float), (n,)).copy()
        hi = np.broadcast_to(np.asarray(self.k_max, float), (n,)).copy()
        if np.any(lo > hi):
            raise ValueError("k_min exceeds k_max for some asset")
        return lo, hi


@dataclass(frozen=True)
class Weights:
    k: np.ndarray
    k_long: np.ndarray | None = None
    k_short: np.ndarray | None = None

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float).reshape(-1)
        object.__setattr__(self, "k", k)
        if (self.k_long is None) != (self.k_short is None):
            raise ValueError("give both halves of the long/short split or neither")
        if self.k_long is not None:
            kl = np.asarray(self.k_long, float).reshape(-1)
            ks = np.asarray(self.k_short, float).reshape(-1)
            if kl.shape != k.shape or ks.shape != k.shape:
                raise ValueError("split vectors must match k")
            if np.any(kl < -1e-12) or np.any(ks > 1e-12) or np.max(np.abs(kl + ks - k)) > 1e-9:
                raise ValueError("split must have k_long >= 0, k_short <= 0, k_long + k_short = k")
            object.__setattr__(self, "k_long", kl)
            object.__setattr__(self, "k_short", ks)

    @classmethod
    def from_k(cls, k) -> "Weights":
        k = np.asarray(k, dtype=float).reshape(-1)
        return cls(k, np.maximum(k, 0.0), np.minimum(k, 0.0))

    @property
    def n(self) -> int:
        return self.k.shape[0]


def _k(weights) -> np.ndarray:
    return np.asarray(getattr(weights, "k", weights), dtype=float).reshape(-1)


def log_growth_vector(scenarios: ScenarioSet, weights) -> np.ndarray:
    """``q_j = log(1 + K^T x^j)`` for every scenario."""
    k = _k(weights)
    if k.shape[0] != scenarios.n:
        raise ValueError(f"weights have length {k.shape[0]}, expected {scenarios.n}")
    gross = 1.0 + scenarios.returns @ k
    bad = np.flatnonzero(gross <= 0.0)
    if bad.size:
        raise SurvivalError(int(bad[0]), float(gross[bad[0]]))
    return np.log(gross)


def elg(scenarios: ScenarioSet, p, weights) -> float:
    """Expected log-growth ``sum_j p_j log(1 + K^T x^j)``."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape[0] != scenarios.m:
        raise ValueError(f"p has length {p.shape[0]}, expected {scenarios.m}")
    return float(p @ log_growth_vector(scenarios, weights))


def _require_optimal(sol: lp.LpSolution, what: str) -> lp.LpSolution:
    if not sol.optimal:
        raise OptimizationError(f"{what}: solver returned {sol.status.value}")
    return sol


def worst_case_elg(scenarios: ScenarioSet, ambiguity: AmbiguitySet, weights,
                   solver: lp.Solver = lp.solve) -> tuple[float, np.ndarray]:
    """Minimize ``p . q(K)`` over the ambiguity set; returns ``(value, p_star)``."""
    if ambiguity.m != scenarios.m:
        raise ValueError("ambiguity set and scenarios disagree on m")
    q = log_growth_vector(scenarios, weights)
    sol = _require_optimal(solver(ambiguity.feasibility_problem(-q)), "worst-case ELG")
    p = np.clip(sol.x, 0.0, None)
    p = p / p.sum()
    return float(p @ q), p


def worst_case_dual(scenarios: ScenarioSet, ambiguity: AmbiguitySet, weights,
                    solver: lp.Solver = lp.solve) -> tuple[float, np.ndarray, np.ndarray]:
    """Lagrangian dual of the worst-case problem: ``(value, v, lam)``.

    Solved as ``max W - v.d0 - lam.d1`` s.t. ``W <= (q + A0^T v + A1^T lam)_j`` and ``lam >= 0``.
    """
    if ambiguity.m != scenarios.m:
        raise ValueError("ambiguity set and scenarios disagree on m")
    q = log_growth_vector(scenarios, weights)
    m, m0, m1 = ambiguity.m, ambiguity.m0, ambiguity.m1
    nv = m0 + m1 + 1
    c = np.concatenate([-ambiguity.d0, -ambiguity.d1, [1.0]])
    A = np.zeros((m, nv))
    A[:, :m0] = -ambiguity.A0.T
    A[:, m0:m0 + m1] = -ambiguity.A1.T
    A[:, -1] = 1.0
    lower = np.concatenate([np.full(m0, -np.inf), np.zeros(m1), [-np.inf]])
    sol = _require_optimal(solver(lp.LpProblem(c, A_ub=A, b_ub=q, lower=lower)), "worst-case dual")
    v, lam = sol.x[:m0], np.maximum(sol.x[m0:m0 + m1], 0.0)
    return float(sol.objective_value), v, lam


# --------------------------------------------------------------------------
# trading-constraint polytope over (K_L, K_S)
# --------------------------------------------------------------------------

def _survival_coeffs(scenarios: ScenarioSet) -> tuple[np.ndarray, np.ndarray]:
    # sum_i K_L |min(x_min, 0)| - sum_i K_S max(0, x_max) <= 1
    return np.abs(np.minimum(scenarios.per_asset_min, 0.0)), -np.maximum(scenarios.per_asset_max, 0.0)


def _constraint_rows(scenarios: ScenarioSet, constraints: TradingConstraints, width: int):
    """Rows over the first ``2n`` columns (K_L then K_S) of a ``width``-column LP."""
    n = scenarios.n
    lo, hi = constraints.bounds(n)
    rows, rhs = [], []

    def row(kl, ks, b):
        r = np.zeros(width)
        r[:n], r[n:2 * n] = kl, ks
        rows.append(r)
        rhs.append(b)

    eye = np.eye(n)
    for i in range(n):
        if np.isfinite(hi[i]):
            row(eye[i], eye[i], hi[i])
        if np.isfinite(lo[i]):
            row(-eye[i], -eye[i], -lo[i])
    # sum |K_L + K_S| <= L, linearized as sum (K_L - K_S) <= L
    row(np.ones(n), -np.ones(n), float(constraints.L))
    sl, ss = _survival_coeffs(scenarios)
    row(sl, ss, 1.0)
    return rows, rhs


def portfolio_return_range(scenarios: ScenarioSet, constraints: TradingConstraints,
                           solver: lp.Solver = lp.solve) -> tuple[float, float]:
    """Smallest and largest ``K^T x^j`` over all scenarios and all admissible ``K``."""
    n = scenarios.n
    rows, rhs = _constraint_rows(scenarios, constraints, 2 * n)
    A, b = np.array(rows), np.array(rhs)
    lower = np.concatenate([np.zeros(n), np.full(n, -np.inf)])
    upper = np.concatenate([np.full(n, np.inf), np.zeros(n)])
    lo_val, hi_val = np.inf, -np.inf
    for x in np.unique(scenarios.returns, axis=0):
        obj = np.concatenate([x, x])
        for sign in (1.0, -1.0):
            sol = solver(lp.LpProblem(sign * obj, A_ub=A, b_ub=b, lower=lower, upper=upper))
            if sol.status is lp.Status.INFEASIBLE:
                raise OptimizationError("trading constraints admit no portfolio")
            _require_optimal(sol, "portfolio return range")
            val = sign * sol.objective_value
            lo_val, hi_val = min(lo_val, val), max(hi_val, val)
    if lo_val <= -1.0:
        raise SurvivalError(-1, 1.0 + lo_val)
    return float(lo_val), float(hi_val)


def hyperplane_domain(scenarios: ScenarioSet, constraints: TradingConstraints,
                      solver: lp.Solver = lp.solve) -> tuple[float, float]:
    """Attainable portfolio-return range, widened to contain 0 and padded by 1e-9."""
    lo, hi = portfolio_return_range(scenarios, constraints, solver)
    lo, hi = min(lo, 0.0), max(hi, 0.0)
    if hi - lo <= 0.0:
        raise HyperplaneError("portfolio return range is degenerate (all returns zero?)")
    padded_lo = lo - RANGE_PAD
    return (padded_lo if padded_lo > -1.0 else lo), hi + RANGE_PAD


# --------------------------------------------------------------------------
# robust LP
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RobustSolution:
    weights: Weights
    lp_value: float
    nominal_elg: float
    worst_case_elg: float
    worst_case_p: np.ndarray
    v: np.ndarray
    lam: np.ndarray
    W: float
    Z: np.ndarray
    hyperplanes: HyperplaneSet
    status: str
    iterations: int = 0
    extra: dict = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        hs = self.hyperplanes
        return {
            "status": self.status,
            "weights": {
                "k": self.weights.k.tolist(),
                "k_long": self.weights.k_long.tolist(),
                "k_short": self.weights.k_short.tolist(),
            },
            "lp_value": self.lp_value,
            "nominal_elg": self.nominal_elg,
            "worst_case_elg": self.worst_case_elg,
            "worst_case_p": self.worst_case_p.tolist(),
            "multipliers": {"v": self.v.tolist(), "lambda": self.lam.tolist()},
            "aux": {"W": self.W, "Z": self.Z.tolist()},
            "M": hs.M,
            "epsilon": hs.epsilon,
            "hyperplane_domain": [hs.x_min, hs.x_max],
            "iterations": self.iterations,
        }


def build_robust_lp(scenarios: ScenarioSet, ambiguity: AmbiguitySet,
                    constraints: TradingConstraints, hyperplanes: HyperplaneSet) -> lp.LpProblem:
    """Assemble the LP; columns are ``K_L (n), K_S (n), v (m0), lam (m1), W, Z (m)``."""
    n, m = scenarios.n, scenarios.m
    m0, m1 = ambiguity.m0, ambiguity.m1
    iv, il, iw, iz = 2 * n, 2 * n + m0, 2 * n + m0 + m1, 2 * n + m0 + m1 + 1
    width = iz + m
    rows, rhs = _constraint_rows(scenarios, constraints, width)
    A = [np.array(rows)]
    b = [np.array(rhs)]

    # Z_j - a_l (K_L + K_S).x^j <= b_l
    M = hyperplanes.M
    X = scenarios.returns
    Zrows = np.zeros((m * M, width))
    slope = -np.kron(X, hyperplanes.a[:, None])  # (m*M, n), row j*M + l
    Zrows[:, :n] = slope
    Zrows[:, n:2 * n] = slope
    Zrows[np.arange(m * M), iz + np.repeat(np.arange(m), M)] = 1.0
    A.append(Zrows)
    b.append(np.tile(hyperplanes.b, m))

    # W - Z_j - (A0^T v)_j - (A1^T lam)_j <= 0
    Wrows = np.zeros((m, width))
    Wrows[:, iw] = 1.0
    Wrows[np.arange(m), iz + np.arange(m)] = -1.0
    Wrows[:, iv:il] = -ambiguity.A0.T
    Wrows[:, il:iw] = -ambiguity.A1.T
    A.append(Wrows)
    b.append(np.zeros(m))

    c = np.zeros(width)
    c[iv:il] = -ambiguity.d0
    c[il:iw] = -ambiguity.d1
    c[iw] = 1.0
    lower = np.full(width, -np.inf)
    upper = np.full(width, np.inf)
    lower[:n] = 0.0
    upper[n:2 * n] = 0.0
    lower[il:iw] = 0.0
    names = ([f"KL{i + 1}" for i in range(n)] + [f"KS{i + 1}" for i in range(n)]
             + [f"v{i + 1}" for i in range(m0)] + [f"lam{i + 1}" for i in range(m1)]
             + ["W"] + [f"Z{j + 1}" for j in range(m)])
    return lp.LpProblem(c, A_ub=np.vstack(A), b_ub=np.concatenate(b), lower=lower, upper=upper,
                        names=tuple(names))


def make_hyperplanes(scenarios: ScenarioSet, constraints: TradingConstraints, epsilon: float,
                     solver: lp.Solver = lp.solve) -> HyperplaneSet:
    lo, hi = hyperplane_domain(scenarios, constraints, solver)
    return generate(lo, hi, epsilon)


def solve_robust(scenarios: ScenarioSet, ambiguity: AmbiguitySet, constraints: TradingConstraints,
                 approx: float | HyperplaneSet = 0.01, solver: lp.Solver = lp.solve) -> RobustSolution:
    """Robust log-optimal weights from the hyperplane LP.

    ``approx`` is either a tolerance ``epsilon`` (tangents are then generated over
    the attainable portfolio-return range) or a ready :class:`HyperplaneSet`.
    """
    if ambiguity.m != scenarios.m:
        raise ValueError("ambiguity set and scenarios disagree on m")
    if isinstance(approx, HyperplaneSet):
        hs = approx
    else:
        hs = make_hyperplanes(scenarios, constraints, float(approx), solver)
    problem = build_robust_lp(scenarios, ambiguity, constraints, hs)
    sol = solver(problem)
    if not sol.optimal:
        raise OptimizationError(f"robust LP: solver returned {sol.status.value}")

    n, m0, m1 = scenarios.n, ambiguity.m0, ambiguity.m1
    x = sol.x
    kl = np.maximum(x[:n], 0.0)
    ks = np.minimum(x[n:2 * n], 0.0)
    weights = Weights(kl + ks, kl, ks)
    iv, il, iw = 2 * n, 2 * n + m0, 2 * n + m0 + m1
    nominal = elg(scenarios, scenarios.nominal, weights)
    worst, p_star = worst_case_elg(scenarios, ambiguity, weights, solver)
    return RobustSolution(
        weights=weights,
        lp_value=float(sol.objective_value),
        nominal_elg=nominal,
        worst_case_elg=worst,
        worst_case_p=p_star,
        v=x[iv:il].copy(),
        lam=np.maximum(x[il:iw], 0.0),
        W=float(x[iw]),
        Z=x[iw + 1:].copy(),
        hyperplanes=hs,
        status=sol.status.value,
        iterations=sol.iterations,
    )


def constraint_violation(scenarios: ScenarioSet, constraints: TradingConstraints, weights) -> float:
    """Largest violation of the trading constraints at ``weights`` (0 when all hold).

    Uses the stored long/short split when present, else the canonical one.
    """
    w = weights if isinstance(weights, Weights) and weights.k_long is not None else Weights.from_k(_k(weights))
    n = scenarios.n
    rows, rhs = _constraint_rows(scenarios, constraints, 2 * n)
    y = np.concatenate([w.k_long, w.k_short])
    viol = np.array(rows) @ y - np.array(rhs)
    viol = np.concatenate([viol, -w.k_long, w.k_short, -(1.0 + scenarios.returns @ w.k)])
    return float(max(np.max(viol), 0.0))
