"""Dense linear programs and a two-phase tableau simplex solver.

Problems are stated as ``maximize c @ x`` subject to ``A_eq x = b_eq``,
``A_ub x <= b_ub`` and per-variable bounds. Internally every variable is
shifted/reflected/split so that the working variables are nonnegative, slack
columns are appended for inequality rows, and artificial columns for rows
without an obvious starting basis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _accel

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9


class LpError(ValueError):
    """Raised for malformed linear programs."""


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


def _as_matrix(a, q: int, name: str) -> np.ndarray:
    if a is None:
        return np.zeros((0, q))
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return np.zeros((0, q))
    if a.shape[1] != q:
        raise LpError(f"{name} has {a.shape[1]} columns, expected {q}")
    return a


def _as_vector(b, rows: int, name: str) -> np.ndarray:
    if b is None:
        b = np.zeros(0)
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.shape[0] != rows:
        raise LpError(f"{name} has length {b.shape[0]}, expected {rows}")
    return b


@dataclass(frozen=True)
class LpProblem:
    """``maximize objective @ x`` over the polyhedron given by eq/ub rows and bounds.

    ``lower``/``upper`` default to ``0`` and ``+inf``; use ``-np.inf`` for a
    free lower bound.
    """

    objective: np.ndarray
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None
    A_ub: np.ndarray = None
    b_ub: np.ndarray = None
    lower: np.ndarray = None
    upper: np.ndarray = None
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        q = c.shape[0]
        A_eq = _as_matrix(self.A_eq, q, "A_eq")
        A_ub = _as_matrix(self.A_ub, q, "A_ub")
        b_eq = _as_vector(self.b_eq, A_eq.shape[0], "b_eq")
        b_ub = _as_vector(self.b_ub, A_ub.shape[0], "b_ub")
        lower = np.zeros(q) if self.lower is None else np.broadcast_to(np.asarray(self.lower, float), (q,)).copy()
        upper = np.full(q, np.inf) if self.upper is None else np.broadcast_to(np.asarray(self.upper, float), (q,)).copy()
        for arr, name in ((c, "objective"), (A_eq, "A_eq"), (A_ub, "A_ub"), (b_eq, "b_eq"), (b_ub, "b_ub")):
            if not np.all(np.isfinite(arr)):
                raise LpError(f"{name} contains non-finite coefficients")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise LpError("bounds contain NaN")
        if np.any(lower > upper):
            bad = int(np.flatnonzero(lower > upper)[0])
            raise LpError(f"lower bound exceeds upper bound for variable {bad}")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise LpError("bounds must allow at least one finite value")
        if self.names is not None and len(self.names) != q:
            raise LpError("names must have one label per variable")
        for key, val in (("objective", c), ("A_eq", A_eq), ("b_eq", b_eq), ("A_ub", A_ub),
                         ("b_ub", b_ub), ("lower", lower), ("upper", upper)):
            val.setflags(write=False)
            object.__setattr__(self, key, val)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def n_rows(self) -> int:
        return self.A_eq.shape[0] + self.A_ub.shape[0]

    def max_violation(self, x) -> float:
        """Largest violation of any row or bound at ``x`` (0 when feasible)."""
        x = np.asarray(x, dtype=float)
        v = 0.0
        if self.A_eq.shape[0]:
            v = max(v, float(np.max(np.abs(self.A_eq @ x - self.b_eq))))
        if self.A_ub.shape[0]:
            v = max(v, float(np.max(self.A_ub @ x - self.b_ub)))
        v = max(v, float(np.max(self.lower - x, initial=0.0)), float(np.max(x - self.upper, initial=0.0)))
        return max(v, 0.0)


@dataclass(frozen=True)
class LpSolution:
    status: Status
    x: np.ndarray | None
    objective_value: float
    iterations: int
    basis: tuple[int, ...] = field(default=(), repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


# --------------------------------------------------------------------------
# standard form
# --------------------------------------------------------------------------

@dataclass
class _StandardForm:
    A: np.ndarray  # rows x cols over nonnegative working variables
    b: np.ndarray
    c: np.ndarray
    n_struct: int  # working columns that come from problem variables
    slack_of_row: np.ndarray  # slack column per row, or -1 for equality rows
    # x = offset + recover @ y[:n_struct]
    offset: np.ndarray
    recover: np.ndarray
    obj_offset: float


def _standard_form(p: LpProblem) -> _StandardForm:
    q = p.n_vars
    cols_map: list[tuple[int, float]] = []  # (problem var, sign) per working column
    offset = np.zeros(q)
    bound_rows: list[tuple[int, float]] = []  # (working col, upper) rows y <= u
    for i in range(q):
        lo, hi = p.lower[i], p.upper[i]
        if np.isfinite(lo):
            offset[i] = lo
            cols_map.append((i, 1.0))
            if np.isfinite(hi):
                bound_rows.append((len(cols_map) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[i] = hi
            cols_map.append((i, -1.0))
        else:
            cols_map.append((i, 1.0))
            cols_map.append((i, -1.0))
    nw = len(cols_map)
    recover = np.zeros((q, nw))
    for j, (i, s) in enumerate(cols_map):
        recover[i, j] = s

    A_ub = p.A_ub @ recover
    b_ub = p.b_ub - p.A_ub @ offset
    A_eq = p.A_eq @ recover
    b_eq = p.b_eq - p.A_eq @ offset
    if bound_rows:
        Ab = np.zeros((len(bound_rows), nw))
        for r, (j, u) in enumerate(bound_rows):
            Ab[r, j] = 1.0
        A_ub = np.vstack([A_ub, Ab])
        b_ub = np.concatenate([b_ub, [u for _, u in bound_rows]])

    n_ub, n_eq = A_ub.shape[0], A_eq.shape[0]
    rows = n_ub + n_eq
    A = np.zeros((rows, nw + n_ub))
    A[:n_ub, :nw] = A_ub
    A[:n_ub, nw:] = np.eye(n_ub)
    A[n_ub:, :nw] = A_eq
    b = np.concatenate([b_ub, b_eq])
    c = np.zeros(nw + n_ub)
    c[:nw] = p.objective @ recover
    slack_of_row = np.concatenate([nw + np.arange(n_ub), -np.ones(n_eq, dtype=int)]).astype(np.int64)
    return _StandardForm(A, b, c, nw, slack_of_row, offset, recover, float(p.objective @ offset))


# --------------------------------------------------------------------------
# simplex driver
# --------------------------------------------------------------------------

def _run(T, basis, max_iter, rule, use_numba):
    loop = _accel.kernel("simplex", use_numba)
    status, iters = loop(T, basis, max_iter, PIVOT_TOL, rule, 50)
    return int(status), int(iters)


def _price_out(T, basis, cost):
    # reduced-cost row for maximize cost @ y: z_j - c_j
    obj = T.shape[0] - 1
    T[obj, :] = 0.0
    T[obj, :-1] = -cost
    for i, j in enumerate(basis):
        if cost[j] != 0.0:
            T[obj, :] += cost[j] * T[i, :]


def _phase_one(sf: _StandardForm, max_iter: int, rule: int, use_numba: bool):
    """Find a feasible basis.

    Returns ``(state, tableau, basis, iterations)`` where ``state`` is ``"ok"``,
    ``None`` (infeasible) or ``"limit"`` (iteration cap hit).
    """
    A, b = sf.A.copy(), sf.b.copy()
    rows, cols = A.shape
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    basis = np.full(rows, -1, dtype=np.int64)
    for i in range(rows):
        s = sf.slack_of_row[i]
        if s >= 0 and not neg[i]:
            basis[i] = s
    need = np.flatnonzero(basis < 0)
    n_art = need.size
    T = np.zeros((rows + 1, cols + n_art + 1))
    T[:rows, :cols] = A
    T[:rows, -1] = b
    for k, i in enumerate(need):
        T[i, cols + k] = 1.0
        basis[i] = cols + k
    iters = 0
    if n_art:
        cost = np.zeros(cols + n_art)
        cost[cols:] = -1.0
        _price_out(T, basis, cost)
        status, iters = _run(T, basis, max_iter, rule, use_numba)
        if status == _accel.STATUS_ITERATION_LIMIT:
            return "limit", T, basis, iters
        scale = max(1.0, float(np.max(np.abs(b), initial=0.0)))
        if -T[-1, -1] > FEAS_TOL * scale:
            return None, T, basis, iters
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = np.ones(rows + 1, dtype=bool)
        for i in range(rows):
            if basis[i] >= cols:
                cand = np.flatnonzero(np.abs(T[i, :cols]) > PIVOT_TOL)
                if cand.size:
                    _accel._pivot_numpy(T, i, int(cand[0]))
                    basis[i] = int(cand[0])
                else:
                    keep[i] = False
        T = np.ascontiguousarray(np.delete(T[keep], np.s_[cols:cols + n_art], axis=1))
        basis = basis[keep[:-1]].copy()
        T[:-1, -1] = np.maximum(T[:-1, -1], 0.0)
    return "ok", T, basis, iters


def solve(problem: LpProblem, max_iter: int | None = None, rule: str = "bland",
          use_numba: bool | None = None) -> LpSolution:
    """Solve ``problem`` with the built-in two-phase tableau simplex.

    ``rule="bland"`` (default) uses Bland's smallest-index rule for every pivot,
    so the solver cannot cycle and ties break deterministically.
    ``rule="dantzig"`` picks the most negative reduced cost and falls back to
    Bland after 50 consecutive degenerate pivots.
    """
    if rule not in ("bland", "dantzig"):
        raise LpError(f"unknown pivot rule {rule!r}")
    rule_code = 0 if rule == "bland" else 1
    sf = _standard_form(problem)
    rows, cols = sf.A.shape
    if max_iter is None:
        max_iter = 50 * (problem.n_vars + max(problem.n_rows, 1))
    if use_numba is None:
        use_numba = _accel.USE_NUMBA

    state, T, basis, it1 = _phase_one(sf, max_iter, rule_code, use_numba)
    if state is None:
        return LpSolution(Status.INFEASIBLE, None, float("nan"), it1)
    if state == "limit":
        return LpSolution(Status.ITERATION_LIMIT, None, float("nan"), it1)

    _price_out(T, basis, sf.c)
    status, it2 = _run(T, basis, max(max_iter - it1, 1), rule_code, use_numba)
    iters = it1 + it2
    if status == _accel.STATUS_UNBOUNDED:
        return LpSolution(Status.UNBOUNDED, None, float("inf"), iters)
    if status == _accel.STATUS_ITERATION_LIMIT:
        return LpSolution(Status.ITERATION_LIMIT, None, float("nan"), iters)

    y = np.zeros(cols)
    y[basis] = T[:-1, -1]
    y = _polish(sf, basis, y)
    x = sf.offset + sf.recover @ y[:sf.n_struct]
    x = np.clip(x, problem.lower, problem.upper)
    value = float(problem.objective @ x)
    return LpSolution(Status.OPTIMAL, x, value, iters, tuple(int(j) for j in basis))


def _polish(sf: _StandardForm, basis: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Recompute basic values from the original data to shed pivot round-off."""
    B = sf.A[:, basis]
    if B.shape[0] != B.shape[1]:
        # redundant rows were dropped; least squares on the full system
        yb, *_ = np.linalg.lstsq(B, sf.b, rcond=None)
    else:
        try:
            yb = np.linalg.solve(B, sf.b)
        except np.linalg.LinAlgError:
            return y
    if np.any(yb < -1e-7) or not np.all(np.isfinite(yb)):
        return y
    out = np.zeros_like(y)
    out[basis] = np.maximum(yb, 0.0)
    return out


def check_feasibility(problem: LpProblem, use_numba: bool | None = None) -> bool:
    """Phase-one test: True unless the constraint set is empty."""
    sf = _standard_form(problem)
    max_iter = 50 * (problem.n_vars + max(problem.n_rows, 1))
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    state, *_ = _phase_one(sf, max_iter, 0, use_numba)
    if state == "limit":
        raise LpError("phase one hit the iteration limit")
    return state is not None


def scipy_solve(problem: LpProblem) -> LpSolution:
    """Adapter with the same contract as :func:`solve`, backed by scipy's HiGHS."""
    from scipy.optimize import linprog

    bounds = [(None if not np.isfinite(lo) else lo, None if not np.isfinite(hi) else hi)
              for lo, hi in zip(problem.lower, problem.upper)]
    res = linprog(
        -problem.objective,
        A_ub=problem.A_ub if problem.A_ub.shape[0] else None,
        b_ub=problem.b_ub if problem.A_ub.shape[0] else None,
        A_eq=problem.A_eq if problem.A_eq.shape[0] else None,
        b_eq=problem.b_eq if problem.A_eq.shape[0] else None,
        bounds=bounds,
        method="highs",
    )
    status = {0: Status.OPTIMAL, 1: Status.ITERATION_LIMIT, 2: Status.INFEASIBLE, 3: Status.UNBOUNDED}.get(
        res.status, Status.INFEASIBLE)
    if status is not Status.OPTIMAL:
        return LpSolution(status, None, float("nan"), int(getattr(res, "nit", 0)))
    x = np.asarray(res.x, dtype=float)
    return LpSolution(status, x, float(problem.objective @ x), int(res.nit))


Solver = Callable[[LpProblem], LpSolution]


# --------------------------------------------------------------------------
# LP-text dump
# --------------------------------------------------------------------------

def _term(coef: float, name: str, first: bool) -> str:
    sign = "-" if coef < 0 else "+"
    mag = abs(coef)
    body = name if mag == 1.0 else f"{mag:.12g} {name}"
    if first:
        return f"-{body}" if sign == "-" else body
    return f" {sign} {body}"


def _expr(row: np.ndarray, names: Sequence[str]) -> str:
    parts = []
    for j, v in enumerate(row):
        if v != 0.0:
            parts.append(_term(float(v), names[j], not parts))
    return "".join(parts) if parts else "0"


def to_lp_text(problem: LpProblem) -> str:
    """Render ``problem`` in LP-text format (see README for the grammar)."""
    names = problem.names or tuple(f"x{j + 1}" for j in range(problem.n_vars))
    lines = ["maximize", f"  obj: {_expr(problem.objective, names)}", "subject to"]
    for i, row in enumerate(problem.A_eq):
        lines.append(f"  e{i + 1}: {_expr(row, names)} = {problem.b_eq[i]:.12g}")
    for i, row in enumerate(problem.A_ub):
        lines.append(f"  c{i + 1}: {_expr(row, names)} <= {problem.b_ub[i]:.12g}")
    lines.append("bounds")
    for j, nm in enumerate(names):
        lo, hi = problem.lower[j], problem.upper[j]
        if not np.isfinite(lo) and not np.isfinite(hi):
            lines.append(f"  {nm} free")
        elif not np.isfinite(hi):
            if lo != 0.0:
                lines.append(f"  {nm} >= {lo:.12g}")
        elif not np.isfinite(lo):
            lines.append(f"  -inf <= {nm} <= {hi:.12g}")
        else:
            lines.append(f"  {lo:.12g} <= {nm} <= {hi:.12g}")
    lines.append("end")
    return "\n".join(lines) + "\n"
