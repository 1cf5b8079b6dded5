import numpy as np
import pytest

from robust_kelly.scenarios import (
    DataError,
    PriceTable,
    compute_returns,
    fee_adjusted_returns,
    load_prices,
    make_scenarios,
    write_prices,
)


def _csv(tmp_path, text):
    p = tmp_path / "prices.csv"
    p.write_text(text)
    return p


def test_load_three_rows(tmp_path):
    t = load_prices(_csv(tmp_path, "date,A\n2024-01-01,100\n2024-01-02,110\n2024-01-03,99\n"))
    assert len(t.dates) == 3 and t.tickers == ("A",)
    assert t.prices[:, 0].tolist() == [100, 110, 99]


def test_zero_price_reports_location(tmp_path):
    with pytest.raises(DataError, match="non-positive price at row 2, ticker B"):
        load_prices(_csv(tmp_path, "date,A,B\n2024-01-01,1,2\n2024-01-02,1,0\n"))


def test_shuffled_dates_are_sorted(tmp_path):
    t = load_prices(_csv(tmp_path, "date,A\n2024-01-03,3\n2024-01-01,1\n2024-01-02,2\n"))
    assert t.dates == ("2024-01-01", "2024-01-02", "2024-01-03")
    assert t.prices[:, 0].tolist() == [1, 2, 3]


@pytest.mark.parametrize("body,msg", [
    ("date,A\n2024-01-01,1\n2024-01-02,1,2\n", "ragged row 2"),
    ("date,A\n2024-01-01,1\n2024-01-02,abc\n", "unparseable number 'abc' at row 2, ticker A"),
    ("date,A\n2024-01-01,1\n2024-01-02,\n", "missing price at row 2"),
    ("date,A\n2024-01-01,1\n", "at least 2 rows"),
    ("date,A\n2024-01-01,1\n2024-01-01,2\n", "duplicate date"),
])
def test_malformed_files(tmp_path, body, msg):
    with pytest.raises(DataError, match=msg):
        load_prices(_csv(tmp_path, body))


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_prices(tmp_path / "nope.csv")


def test_write_round_trip(tmp_path):
    t = PriceTable(("d1", "d2"), ("A", "B"), np.array([[1.5, 2.0], [1.25, 3.0]]))
    write_prices(t, tmp_path / "x.csv")
    back = load_prices(tmp_path / "x.csv")
    assert back.dates == t.dates and np.array_equal(back.prices, t.prices)


@pytest.mark.parametrize("prices,expected", [
    ([[100], [110], [99]], [[0.10], [-0.10]]),
    ([[50], [50], [50]], [[0.0], [0.0]]),
    ([[10, 20], [11, 18]], [[0.10, -0.10]]),
])
def test_compute_returns(prices, expected):
    t = PriceTable(tuple(str(i) for i in range(len(prices))), tuple("AB"[: len(prices[0])]),
                   np.array(prices, float))
    s = compute_returns(t)
    assert s.returns == pytest.approx(np.array(expected), abs=1e-15)
    assert s.nominal == pytest.approx(np.full(s.m, 1.0 / s.m))


def test_price_reconstruction(rng):
    prices = np.exp(np.cumsum(rng.normal(0, 0.02, (30, 4)), axis=0)) * 100
    s = compute_returns(PriceTable(tuple(map(str, range(30))), tuple("ABCD"), prices))
    rebuilt = prices[0] * np.vstack([np.ones(4), np.cumprod(1 + s.returns, axis=0)])
    assert np.max(np.abs(rebuilt / prices - 1)) < 1e-12


def test_toy_set_and_extremes(toy):
    assert toy.m == 2 and toy.n == 2
    assert toy.per_asset_min.tolist() == [-0.25, -0.1]
    assert toy.per_asset_max.tolist() == [0.1, 0.3]


def test_make_scenarios_errors():
    with pytest.raises(DataError):
        make_scenarios([[0.1, -1.0]])
    with pytest.raises(DataError, match="not a probability vector"):
        make_scenarios([[0.1], [0.2]], [0.6, 0.6])


def test_immutable(toy):
    with pytest.raises(ValueError):
        toy.returns[0, 0] = 1.0


@pytest.mark.parametrize("k,expected", [(0.5, 0.09), (-0.5, 0.11)])
def test_fee_adjusted_sign(k, expected):
    assert fee_adjusted_returns(np.array([[0.10]]), [0.01], [k])[0, 0] == pytest.approx(expected, abs=1e-15)


def test_fee_zero_is_identity(toy):
    assert np.array_equal(fee_adjusted_returns(toy, 0.0, [0.3, -0.2]), toy.returns)


def test_fee_range():
    with pytest.raises(DataError):
        fee_adjusted_returns(np.array([[0.1]]), [1.0], [0.5])
