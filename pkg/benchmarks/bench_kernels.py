"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first numba call per kernel is a warm-up (compilation or cache load) and
is excluded from the timings.
"""

import argparse
import time

import numpy as np

from robust_kelly import _accel
from robust_kelly import ambiguity as amb
from robust_kelly import robust as rb
from robust_kelly.lp import solve
from robust_kelly.scenarios import make_scenarios


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    growth = rng.uniform(-0.02, 0.02, 200_000)
    v = np.exp(np.concatenate([[0.0], np.cumsum(growth)]))
    z = np.sort(rng.uniform(-0.3, 0.5, 12))
    a = 1.0 / (1.0 + z)
    b = np.log1p(z) - a * z
    x = np.linspace(-0.3, 0.5, 200_000)
    sc = make_scenarios(rng.normal(0.001, 0.02, (124, 15)))
    tc = rb.TradingConstraints(1.0, 0.0, 1.0 / 15)
    problem = rb.build_robust_lp(sc, amb.box(sc.nominal, gamma=0.1), tc, rb.make_hyperplanes(sc, tc, 0.01))
    return {
        "wealth (2e5 periods)": lambda k: k["wealth"](growth, 1.0),
        "drawdown (2e5 values)": lambda k: k["drawdown"](v),
        "min_partial_sum (2e5)": lambda k: k["min_partial_sum"](growth),
        "envelope_gap (2e5 x 12)": lambda k: k["envelope_gap"](x, a, b),
        "simplex (robust LP 15x124)": lambda k: solve(problem, use_numba=k is _accel.NUMBA_KERNELS),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, call in cases(rng).items():
        call(_accel.NUMBA_KERNELS)
        t_np = _best(lambda: call(_accel.NUMPY_KERNELS), args.repeat)
        t_nb = _best(lambda: call(_accel.NUMBA_KERNELS), args.repeat)
        print(f"{name:<28}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
