"""Regenerate the bundled synthetic price fixture (15 assets, 125 daily closes)."""

import argparse
from pathlib import Path

import numpy as np

from robust_kelly.scenarios import PriceTable, write_prices

N_ASSETS = 15
N_ROWS = 125
SEED = 20240101


def synthetic_table(seed: int = SEED) -> PriceTable:
    rng = np.random.default_rng(seed)
    drift = rng.uniform(-2e-4, 1.2e-3, N_ASSETS)
    vol = rng.uniform(0.008, 0.03, N_ASSETS)
    market = rng.normal(0.0, 0.008, N_ROWS - 1)
    beta = rng.uniform(0.3, 1.2, N_ASSETS)
    shocks = rng.normal(0.0, 1.0, (N_ROWS - 1, N_ASSETS)) * vol
    log_ret = drift + np.outer(market, beta) + shocks
    start = rng.uniform(20.0, 300.0, N_ASSETS)
    prices = start * np.exp(np.vstack([np.zeros(N_ASSETS), np.cumsum(log_ret, axis=0)]))
    prices = np.round(prices, 4)
    dates = tuple(str(np.datetime64("2023-01-02") + np.timedelta64(k, "D")) for k in range(N_ROWS))
    tickers = tuple(f"SYN{i:02d}" for i in range(N_ASSETS))
    return PriceTable(dates, tickers, prices)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1]
                                         / "src/robust_kelly/data/synthetic_15x124.csv"))
    args = ap.parse_args()
    write_prices(synthetic_table(), args.out)
    print(args.out)
