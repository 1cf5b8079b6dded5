"""Price ingestion and finite return-scenario sets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SIMPLEX_TOL = 1e-9


class DataError(ValueError):
    """Raised for malformed price files or scenario data."""


@dataclass(frozen=True)
class PriceTable:
    dates: tuple[str, ...]
    tickers: tuple[str, ...]
    prices: np.ndarray  # rows = dates, columns = tickers

    def __post_init__(self):
        prices = np.array(self.prices, dtype=float)
        if prices.ndim != 2 or prices.shape != (len(self.dates), len(self.tickers)):
            raise DataError("price matrix shape does not match dates x tickers")
        if prices.shape[0] < 2:
            raise DataError("a price table needs at least 2 rows")
        if not np.all(np.isfinite(prices)):
            raise DataError("price table has missing or non-finite cells")
        if np.any(prices <= 0):
            r, c = np.argwhere(prices <= 0)[0]
            raise DataError(f"non-positive price at row {r + 1}, ticker {self.tickers[c]}")
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "tickers", tuple(self.tickers))

    def slice_rows(self, start: int, stop: int | None = None) -> "PriceTable":
        return PriceTable(self.dates[start:stop], self.tickers, self.prices[start:stop])


@dataclass(frozen=True)
class ScenarioSet:
    """``m`` joint return outcomes for ``n`` assets with a nominal distribution."""

    returns: np.ndarray  # m x n
    nominal: np.ndarray  # length m
    tickers: tuple[str, ...] | None = None

    def __post_init__(self):
        x = np.array(self.returns, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
            raise DataError("returns must be a non-empty m x n matrix")
        if not np.all(np.isfinite(x)):
            raise DataError("returns contain non-finite entries")
        if np.any(x <= -1.0):
            j, i = np.argwhere(x <= -1.0)[0]
            raise DataError(f"return {x[j, i]} at scenario {j}, asset {i} is not > -1")
        p = np.array(self.nominal, dtype=float).reshape(-1)
        if p.shape[0] != x.shape[0]:
            raise DataError(f"nominal has length {p.shape[0]}, expected {x.shape[0]}")
        if np.any(p < -SIMPLEX_TOL) or abs(p.sum() - 1.0) > SIMPLEX_TOL or not np.all(np.isfinite(p)):
            raise DataError("nominal is not a probability vector")
        p = np.clip(p, 0.0, None)
        p = p / p.sum()
        for arr in (x, p):
            arr.setflags(write=False)
        object.__setattr__(self, "returns", x)
        object.__setattr__(self, "nominal", p)
        if self.tickers is not None:
            if len(self.tickers) != x.shape[1]:
                raise DataError("one ticker label per asset is required")
            object.__setattr__(self, "tickers", tuple(self.tickers))

    @property
    def m(self) -> int:
        return self.returns.shape[0]

    @property
    def n(self) -> int:
        return self.returns.shape[1]

    @property
    def per_asset_min(self) -> np.ndarray:
        return self.returns.min(axis=0)

    @property
    def per_asset_max(self) -> np.ndarray:
        return self.returns.max(axis=0)


def make_scenarios(returns, nominal=None, tickers=None) -> ScenarioSet:
    """Build a :class:`ScenarioSet`; ``nominal`` defaults to uniform."""
    x = np.asarray(returns, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if nominal is None:
        nominal = np.full(x.shape[0], 1.0 / max(x.shape[0], 1))
    return ScenarioSet(x, nominal, tickers)


def _parse_price(text: str, row: int, ticker: str) -> float:
    text = text.strip()
    if text == "":
        raise DataError(f"missing price at row {row}, ticker {ticker}")
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"unparseable number {text!r} at row {row}, ticker {ticker}") from None
    if not math.isfinite(value):
        raise DataError(f"missing price at row {row}, ticker {ticker}")
    if value <= 0:
        raise DataError(f"non-positive price at row {row}, ticker {ticker}")
    return value


def load_prices(path) -> PriceTable:
    """Read a wide CSV (``date,TICKER1,...``) into a date-sorted :class:`PriceTable`.

    Row numbers in error messages are 1-based data rows (the header is row 0).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"price file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        if len(header) < 2:
            raise DataError("header must name a date column and at least one ticker")
        tickers = header[1:]
        dates, rows = [], []
        for r, rec in enumerate(reader, start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise DataError(f"ragged row {r}: {len(rec)} fields, expected {len(header)}")
            dates.append(rec[0].strip())
            rows.append([_parse_price(c, r, t) for c, t in zip(rec[1:], tickers)])
    if len(rows) < 2:
        raise DataError("a price table needs at least 2 rows")
    order = sorted(range(len(dates)), key=lambda k: dates[k])
    if len(set(dates)) != len(dates):
        raise DataError("duplicate date labels in price file")
    return PriceTable(tuple(dates[k] for k in order), tuple(tickers), np.array([rows[k] for k in order]))


def write_prices(table: PriceTable, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["date", *table.tickers])
        for d, row in zip(table.dates, table.prices):
            w.writerow([d, *(repr(float(v)) for v in row)])


def compute_returns(prices: PriceTable) -> ScenarioSet:
    """Per-period simple returns, one scenario per period, uniform nominal."""
    s = prices.prices
    if s.shape[0] < 2:
        raise DataError("need at least 2 price rows to form a return")
    x = (s[1:] - s[:-1]) / s[:-1]
    return make_scenarios(x, tickers=prices.tickers)


def fee_adjusted_returns(scenarios: ScenarioSet | np.ndarray, costs, weights) -> np.ndarray:
    """Shift each asset's returns by ``-c_i`` when held long (K_i >= 0), ``+c_i`` when short."""
    x = scenarios.returns if isinstance(scenarios, ScenarioSet) else np.atleast_2d(np.asarray(scenarios, float))
    k = np.asarray(getattr(weights, "k", weights), dtype=float).reshape(-1)
    c = np.broadcast_to(np.asarray(costs, dtype=float), (x.shape[1],))
    if k.shape[0] != x.shape[1]:
        raise DataError(f"weights have length {k.shape[0]}, expected {x.shape[1]}")
    if np.any(c < 0) or np.any(c >= 1):
        raise DataError("costs must lie in [0, 1)")
    return x - np.where(k >= 0, c, -c)
