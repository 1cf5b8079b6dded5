"""Tangent-line (supporting hyperplane) over-approximation of ``log(1 + x)``.

Tangents to a concave function lie above it, so the lower envelope
``min_l (a_l x + b_l)`` majorizes ``log(1 + x)``. Tangent points are placed
greedily from ``x_min`` so that the gap between consecutive tangents peaks at
exactly ``epsilon``; because every step has the same relative width
``1 + alpha`` the partition is geometric in ``1 + x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel

ROOT_TOL = 1e-12
ROOT_MAX_ITER = 200
MAX_POINTS = 100_000


class HyperplaneError(ValueError):
    """Raised for invalid approximation requests."""


@dataclass(frozen=True)
class Hyperplane:
    z: float
    a: float
    b: float

    def __call__(self, x):
        return self.a * np.asarray(x, dtype=float) + self.b


def tangent_at(z: float) -> Hyperplane:
    """Tangent to ``log(1 + x)`` at ``z``: slope ``1/(1+z)``, intercept ``log(1+z) - a z``."""
    z = float(z)
    if not z > -1.0:
        raise HyperplaneError(f"tangent point must exceed -1, got {z}")
    a = 1.0 / (1.0 + z)
    return Hyperplane(z, a, math.log1p(z) - a * z)


def _bisect(f, lo: float, hi: float) -> float:
    """Root of an increasing ``f`` bracketed by ``[lo, hi]``, bisected to float resolution."""
    if f(lo) > 0 or f(hi) < 0:
        raise HyperplaneError("root is not bracketed")
    for _ in range(ROOT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if fm < 0:
            lo = mid
        else:
            hi = mid
    root = lo if abs(f(lo)) <= abs(f(hi)) else hi
    if abs(f(root)) > ROOT_TOL:
        raise HyperplaneError("bisection did not reach the residual tolerance")
    return root


def _excess(t: float) -> float:
    # t - log(1 + t), i.e. beta - log(beta) - 1 with beta = 1 + t
    return t - math.log1p(t)


def solve_beta(epsilon: float) -> float:
    """Root ``beta > 1`` of ``beta - log(beta) - 1 = epsilon``."""
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise HyperplaneError("epsilon must be positive")
    hi = 2.0 * math.sqrt(epsilon) + 2.0 * epsilon
    while _excess(hi) < epsilon:
        hi *= 2.0
    lo = min(1e-15, hi / 2.0)
    if _excess(lo) > epsilon:
        lo = 0.0
    return 1.0 + _bisect(lambda t: _excess(t) - epsilon, lo, hi)


def _ratio_excess(alpha: float) -> float:
    # ((1 + alpha)/alpha) log(1 + alpha) - 1, evaluated without cancellation
    return ((1.0 + alpha) * math.log1p(alpha) - alpha) / alpha


def solve_alpha(beta: float) -> float:
    """Root ``alpha > 0`` of ``((1 + alpha)/alpha) log(1 + alpha) = beta``."""
    beta = float(beta)
    if not beta > 1.0:
        raise HyperplaneError("beta must exceed 1")
    target = beta - 1.0
    hi = max(4.0 * target, 1e-300)
    for _ in range(2000):
        if _ratio_excess(hi) >= target:
            break
        hi *= 2.0
    else:  # pragma: no cover - ratio_excess is unbounded
        raise HyperplaneError("could not bracket alpha")
    lo = hi / 2.0 if _ratio_excess(hi / 2.0) < target else 0.0
    if lo == 0.0:
        lo = min(hi, 1e-300)
        while _ratio_excess(lo) > target:
            lo /= 2.0
            if lo == 0.0:
                raise HyperplaneError("beta too close to 1 to resolve alpha")
    return _bisect(lambda a: _ratio_excess(a) - target, lo, hi)


def step_ratio(epsilon: float) -> float:
    """``alpha`` for tolerance ``epsilon``: consecutive points satisfy ``1 + z' = (1 + alpha)(1 + z)``."""
    return solve_alpha(solve_beta(epsilon))


def pair_error(x_prev: float, x: float) -> float:
    """Peak gap between ``log(1 + .)`` and the tangents at ``x_prev`` and ``x``.

    The peak sits where the two tangents cross. With ``alpha = (x - x_prev)/(1 + x_prev)``
    and ``beta = ((1 + alpha)/alpha) log(1 + alpha)`` the gap is ``beta - log(beta) - 1``.
    """
    x_prev, x = float(x_prev), float(x)
    if not x_prev > -1.0:
        raise HyperplaneError("x_prev must exceed -1")
    if not x > x_prev:
        raise HyperplaneError("x must exceed x_prev")
    alpha = (x - x_prev) / (1.0 + x_prev)
    return max(_excess(_ratio_excess(alpha)), 0.0)


def next_point(x_i: float, epsilon: float) -> float:
    x_i = float(x_i)
    if not x_i > -1.0:
        raise HyperplaneError("x_i must exceed -1")
    alpha = step_ratio(epsilon)
    return (1.0 + alpha) * x_i + alpha


@dataclass(frozen=True)
class HyperplaneSet:
    epsilon: float
    x_min: float
    x_max: float
    points: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @property
    def M(self) -> int:
        return int(self.points.shape[0])

    @property
    def planes(self) -> list[Hyperplane]:
        return [Hyperplane(float(z), float(a), float(b)) for z, a, b in zip(self.points, self.a, self.b)]

    def envelope(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.min(np.multiply.outer(x, self.a) + self.b, axis=-1)

    def gap(self, x, use_numba: bool | None = None) -> np.ndarray:
        """``envelope(x) - log(1 + x)`` on a 1-d array."""
        x = np.ascontiguousarray(x, dtype=float).reshape(-1)
        return _accel.kernel("envelope_gap", use_numba)(x, self.a, self.b)

    def max_gap(self, n_grid: int = 10_000) -> float:
        grid = np.linspace(self.x_min, self.x_max, n_grid)
        return float(np.max(self.gap(grid)))


def from_points(points, x_min: float | None = None, x_max: float | None = None,
                epsilon: float | None = None) -> HyperplaneSet:
    """Build a set from explicit tangent points; ``epsilon`` defaults to the exact
    worst gap over ``[x_min, x_max]`` (taken at tangent crossings and the ends)."""
    z = np.asarray(points, dtype=float).reshape(-1)
    if z.size == 0 or np.any(z <= -1.0):
        raise HyperplaneError("tangent points must exceed -1")
    if np.any(np.diff(z) <= 0):
        raise HyperplaneError("tangent points must be strictly increasing")
    x_min = float(z[0] if x_min is None else x_min)
    x_max = float(z[-1] if x_max is None else x_max)
    a = 1.0 / (1.0 + z)
    b = np.log1p(z) - a * z
    hs = HyperplaneSet(float("nan"), x_min, x_max, z, a, b)
    if epsilon is None:
        cross = (b[1:] - b[:-1]) / (a[:-1] - a[1:]) if z.size > 1 else np.zeros(0)
        cand = np.concatenate([[x_min, x_max], cross[(cross > x_min) & (cross < x_max)]])
        epsilon = float(np.max(hs.gap(cand)))
    return HyperplaneSet(float(epsilon), x_min, x_max, z, a, b)


def _validate(x_min: float, x_max: float) -> None:
    if not x_min > -1.0:
        raise HyperplaneError("x_min must exceed -1")
    if not (x_min <= 0.0 <= x_max):
        raise HyperplaneError("need x_min <= 0 <= x_max")
    if not x_min < x_max:
        raise HyperplaneError("x_min must be strictly below x_max")


def generate(x_min: float, x_max: float, epsilon: float) -> HyperplaneSet:
    """Greedy epsilon-optimal tangent placement over ``[x_min, x_max]``.

    Starts with a tangent at ``x_min`` and keeps adding the next point until one
    lands at or beyond ``x_max`` (that last point is kept even when it overshoots).
    """
    x_min, x_max, epsilon = float(x_min), float(x_max), float(epsilon)
    _validate(x_min, x_max)
    if not epsilon > 0:
        raise HyperplaneError("epsilon must be positive")
    alpha = step_ratio(epsilon)
    pts = [x_min]
    while pts[-1] < x_max:
        if len(pts) >= MAX_POINTS:
            raise HyperplaneError(f"more than {MAX_POINTS} tangents needed; loosen epsilon")
        pts.append((1.0 + alpha) * pts[-1] + alpha)
    z = np.array(pts)
    a = 1.0 / (1.0 + z)
    b = np.log1p(z) - a * z
    return HyperplaneSet(epsilon, x_min, x_max, z, a, b)


def epsilon_for_count(x_min: float, x_max: float, M: int) -> float:
    """Smallest tolerance whose greedy placement needs only ``M`` tangents on the interval."""
    _validate(float(x_min), float(x_max))
    if M < 2:
        raise HyperplaneError("at least 2 tangents are needed to cover an interval")
    growth = math.log1p(x_max) - math.log1p(x_min)
    alpha = math.expm1(growth / (M - 1))
    return _excess(_ratio_excess(alpha))


def generate_count(x_min: float, x_max: float, M: int) -> HyperplaneSet:
    """Greedy placement with exactly ``M`` tangents, using the tightest tolerance that allows it."""
    eps = epsilon_for_count(x_min, x_max, M)
    for k in range(60):
        hs = generate(x_min, x_max, eps * (1.0 + 1e-12 * 2.0 ** k))
        if hs.M <= M:
            return hs
    raise HyperplaneError("could not hit the requested tangent count")  # pragma: no cover


def to_csv(hs: HyperplaneSet) -> str:
    lines = ["z,a,b"]
    lines += [f"{z:.12g},{a:.12g},{b:.12g}" for z, a, b in zip(hs.points, hs.a, hs.b)]
    return "\n".join(lines) + "\n"


def summary(hs: HyperplaneSet) -> dict:
    return {"epsilon": hs.epsilon, "M": hs.M, "x_min": hs.x_min, "x_max": hs.x_max}
