import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from robust_kelly import hyperplane as hp
from robust_kelly.hyperplane import HyperplaneError


@pytest.mark.parametrize("z,a,b", [(0.0, 1.0, 0.0), (2.0, 1 / 3, math.log(3) - 2 / 3),
                                   (-0.5, 2.0, math.log(0.5) + 1)])
def test_tangent_at(z, a, b):
    h = hp.tangent_at(z)
    assert h.a == pytest.approx(a, abs=1e-14) and h.b == pytest.approx(b, abs=1e-14)
    assert h(z) == pytest.approx(math.log1p(z), abs=1e-14)


def test_tangent_domain():
    with pytest.raises(HyperplaneError):
        hp.tangent_at(-1.0)


def test_pair_error_limit():
    assert hp.pair_error(0.3, 0.3 + 1e-9) < 1e-8


def test_pair_error_closed_form_and_grid():
    e = hp.pair_error(0.0, 1.0)
    closed = 2 * math.log(2) - math.log(2 * math.log(2)) - 1
    assert e == pytest.approx(closed, abs=1e-14)
    grid = np.linspace(0, 1, 200_001)
    env = np.minimum(grid, 0.5 * grid + math.log(2) - 0.5)
    assert e == pytest.approx(np.max(env - np.log1p(grid)), abs=2e-6)


def test_pair_error_monotone():
    assert hp.pair_error(0, 0.5) < hp.pair_error(0, 1.0)


def test_pair_error_domain():
    with pytest.raises(HyperplaneError):
        hp.pair_error(0.5, 0.5)
    with pytest.raises(HyperplaneError):
        hp.pair_error(-1.0, 0.5)


def _beta_ref(eps):
    return brentq(lambda b: b - math.log(b) - 1 - eps, 1.0, 100.0, xtol=1e-15, rtol=1e-15)


@pytest.mark.parametrize("eps", [1e-6, 1e-3, 0.01, 0.1, 1.0, 10.0])
def test_solve_beta(eps):
    beta = hp.solve_beta(eps)
    assert beta > 1
    assert abs(beta - math.log(beta) - 1 - eps) <= 1e-12
    assert beta == pytest.approx(_beta_ref(eps), rel=1e-12)


def test_solve_beta_values():
    assert hp.solve_beta(1e-15) == pytest.approx(1.0, abs=1e-6)
    assert hp.solve_beta(0.01) == pytest.approx(1.148, abs=5e-4)
    assert hp.solve_beta(0.1) == pytest.approx(1.5162, abs=1e-4)
    with pytest.raises(HyperplaneError, match="epsilon must be positive"):
        hp.solve_beta(0.0)


def test_solve_alpha_values():
    assert hp.solve_alpha(1.148) == pytest.approx(0.327, abs=1e-3)
    assert hp.solve_alpha(1 + 1e-10) < 1e-8
    with pytest.raises(HyperplaneError):
        hp.solve_alpha(1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1.0001, max_value=3.0))
def test_solve_alpha_round_trip(beta):
    a = hp.solve_alpha(beta)
    assert (1 + a) / a * math.log1p(a) == pytest.approx(beta, abs=1e-10)


def test_next_point():
    x1 = hp.next_point(0.0, 0.01)
    alpha = hp.step_ratio(0.01)
    assert x1 == pytest.approx(0.327, abs=1e-3)
    assert x1 == alpha
    x2 = hp.next_point(0.4, 0.01)
    assert (1 + x2) == pytest.approx((1 + alpha) * 1.4, rel=1e-15)
    assert hp.pair_error(0.0, x1) == pytest.approx(0.01, abs=1e-9)


@pytest.mark.parametrize("lo,hi,eps,M", [(0, 6, 0.01, 8), (0, 0.1, 0.01, 2), (0, 1, 10.0, 2)])
def test_generate_counts(lo, hi, eps, M):
    hs = hp.generate(lo, hi, eps)
    assert hs.M == M
    assert hs.points[0] == lo and hs.points[-1] >= hi and hs.points[-2] < hi


def test_generate_accuracy_dense():
    hs = hp.generate(0, 6, 0.01)
    grid = np.linspace(0, 6, 100_000)
    gap = hs.gap(grid)
    assert gap.min() >= -1e-12 and gap.max() <= 0.01 + 1e-9
    ratio = (1 + hs.points[1:]) / (1 + hs.points[:-1])
    assert np.allclose(ratio, ratio[0], rtol=1e-9, atol=0)
    assert ratio[0] == pytest.approx(1.327, abs=1e-3)


@pytest.mark.parametrize("args,msg", [((-1.5, 1, 0.1), "x_min must exceed -1"),
                                      ((0.1, 1, 0.1), "x_min <= 0 <= x_max"),
                                      ((0, 0, 0.1), "strictly below"),
                                      ((0, 1, -1), "epsilon must be positive")])
def test_generate_errors(args, msg):
    with pytest.raises(HyperplaneError, match=msg):
        hp.generate(*args)


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.9, 0.0), st.floats(0.01, 3.0), st.floats(1e-4, 0.2), st.floats(0.1, 1.0))
def test_monotone_refinement(lo, hi, eps, shrink):
    assert hp.generate(lo, hi, eps * shrink).M >= hp.generate(lo, hi, eps).M


def test_epsilon_for_count():
    hs = hp.generate_count(-0.125, 0.15, 3)
    assert hs.M == 3
    assert hs.points[-1] == pytest.approx(0.15, abs=1e-9)
    assert hs.max_gap() <= hs.epsilon + 1e-12
    assert hp.generate(-0.125, 0.15, hs.epsilon * 0.999).M == 4


def test_from_points_exact_epsilon():
    hs = hp.from_points([0.0, 1.0])
    assert hs.epsilon == pytest.approx(hp.pair_error(0.0, 1.0), abs=1e-14)
    with pytest.raises(HyperplaneError):
        hp.from_points([0.5, 0.2])


def test_csv_and_summary():
    hs = hp.generate(0, 6, 0.01)
    lines = hp.to_csv(hs).splitlines()
    assert lines[0] == "z,a,b" and len(lines) == 9
    assert hp.summary(hs) == {"epsilon": 0.01, "M": 8, "x_min": 0.0, "x_max": 6.0}
