import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from segmarket.dist import Beta, DistributionError, PiecewiseLinear, Uniform
from segmarket.duopoly import (
    DuopolyConfig,
    benchmark_price,
    cost_curves,
    duopoly_welfare,
    fully_revealing_prices,
    purchase,
    rich_evidence_duopoly,
    simple_evidence_duopoly,
)

UNIFORM = DuopolyConfig(Uniform(-1.0, 1.0))
BETA22 = DuopolyConfig(Beta(2.0, 2.0, -1.0, 1.0))


def grid_argmax(f, lo, hi, n=2_000_001):
    x = np.linspace(lo, hi, n)
    return x[int(np.argmax(f(x)))]


def test_config_validation():
    with pytest.raises(DistributionError):
        DuopolyConfig(Uniform(0.0, 1.0))
    with pytest.raises(ValueError):
        DuopolyConfig(Uniform(-1.0, 1.0), V=1.5)
    with pytest.raises(ValueError):
        benchmark_price(DuopolyConfig(Beta(1.2, 1.2, -1, 1), V=2.0))


def test_benchmark_uniform():
    b = benchmark_price(UNIFORM)
    assert b.p_star == 2.0
    assert b.fixed_point_slack >= -1e-6


def test_benchmark_beta22():
    # density oracle f(0) = 6 * (1/2)(1/2) / 2 on the rescaled support
    f0 = 6 * 0.25 / 2
    assert benchmark_price(BETA22).p_star == pytest.approx(2 * 0.5 / f0, abs=1e-12)
    assert benchmark_price(BETA22).p_star == pytest.approx(4 / 3, abs=1e-12)


def test_benchmark_rejects_asymmetric():
    with pytest.raises(DistributionError):
        benchmark_price(DuopolyConfig(Beta(2.0, 3.0, -1.0, 1.0)))


@pytest.mark.parametrize("a", [2.0, 3.0, 5.0])
def test_symmetric_center_mass(a):
    assert float(DuopolyConfig(Beta(a, a, -1, 1)).d.cdf(0.0)) == pytest.approx(0.5, abs=1e-15)


def test_fully_revealing_prices():
    assert fully_revealing_prices(0.5) == (0.0, 1.0)
    assert fully_revealing_prices(0.0) == (0.0, 0.0)
    assert fully_revealing_prices(-1.0) == (2.0, 0.0)
    with pytest.raises(ValueError):
        fully_revealing_prices(1.5)


def test_purchase_tie_rules():
    firm, cost = purchase(np.array([0.0, 0.3, -0.3]), np.zeros(3), np.array([0.0, 0.6, 0.0]))
    assert list(firm) == [-1.0, 1.0, -1.0]
    assert cost == pytest.approx([1.0, 1.3, 0.7])


def test_simple_uniform():
    s = simple_evidence_duopoly(UNIFORM)
    assert (s.t1_L, s.t1_R, s.p1_L, s.p1_R) == (-0.5, 0.5, 1.0, 1.0)
    assert s.messages(0.7) == ("reveal", "nondisclose")
    assert s.messages(-0.7) == ("nondisclose", "reveal")
    assert s.messages(0.2) == ("reveal", "reveal")
    assert s.price_map("R", "nondisclose") == 1.0
    assert s.price_map("R", "reveal", 0.3) == pytest.approx(0.6)
    assert s.price_map("L", "reveal", 0.3) == 0.0


def test_simple_beta22_against_grid_and_closed_form():
    s = simple_evidence_duopoly(BETA22)
    F = BETA22.d.cdf
    oracle = grid_argmax(lambda p: p * (1 - np.asarray(F(p / 2))), 0.0, 2.0)
    assert s.p1_R == pytest.approx(oracle, abs=1e-6)
    # stationarity of x(1 - F(x)) reduces to 2x^3 - 3x + 1 = 0 on (0, 1)
    assert s.t1_R == pytest.approx((math.sqrt(3) - 1) / 2, abs=1e-9)
    assert s.t1_L == pytest.approx(-s.t1_R, abs=1e-12)


def test_simple_one_sided_mass_rejected():
    d = PiecewiseLinear(((-1.0, 0.0), (0.0, 1.0), (1.0, 1.0 + 1e-300)))
    with pytest.raises((DistributionError, ValueError)):
        simple_evidence_duopoly(DuopolyConfig(d))


def test_rich_uniform_halving():
    r = rich_evidence_duopoly(UNIFORM)
    for s in range(16):
        assert r.R.cutoffs[s] == 0.5**s
        assert r.L.cutoffs[s] == -(0.5**s)
    for s in range(1, 16):
        assert r.R.prices[s - 1] == 0.5 ** (s - 1)


def test_rich_first_step_is_simple_pool():
    for cfg in (UNIFORM, BETA22):
        r, s = rich_evidence_duopoly(cfg), simple_evidence_duopoly(cfg)
        assert r.R.cutoffs[1] == s.t1_R and r.R.prices[0] == s.p1_R
        assert r.L.cutoffs[1] == s.t1_L and r.L.prices[0] == s.p1_L


def test_rich_beta22_steps_against_grid():
    r = rich_evidence_duopoly(BETA22)
    F = BETA22.d.cdf
    prices = r.R.prices
    assert all(b < a for a, b in zip(prices, prices[1:]))
    for s in range(1, 6):
        prev = r.R.cutoffs[s - 1]
        oracle = grid_argmax(lambda p: p * (float(F(prev)) - np.asarray(F(p / 2))), 0.0, 2 * prev)
        assert prices[s - 1] == pytest.approx(oracle, abs=2e-6 * prev)
        assert r.R.cutoffs[s] == pytest.approx(prices[s - 1] / 2, abs=1e-15)


def test_rich_prices_center():
    r = rich_evidence_duopoly(UNIFORM)
    p_L, p_R = r.prices(np.array([0.0, 0.3, -0.3, 1e-9]))
    assert list(p_R) == [0.0, 0.5, 0.0, 0.0]
    assert list(p_L) == [0.0, 0.0, 0.5, 0.0]


def test_welfare_uniform():
    w = {k: duopoly_welfare(UNIFORM, k) for k in ("benchmark", "fully_revealing", "simple", "rich")}
    assert w["benchmark"].expected_cost == pytest.approx(2.5, abs=1e-12)
    assert w["fully_revealing"].expected_cost == pytest.approx(1.5, abs=1e-12)
    assert w["simple"].expected_cost == pytest.approx(1.25, abs=1e-12)
    # sum over both sides of 2^-(s-1) * 2^-(s+1), truncated after 20 steps
    rich_price = 2 * sum(2.0 ** -(s - 1) * 2.0 ** -(s + 1) for s in range(1, 21))
    assert w["rich"].expected_price == pytest.approx(rich_price, abs=1e-9)
    assert w["simple"].expected_cost / w["benchmark"].expected_cost == pytest.approx(0.5, abs=1e-12)
    t, cost = w["benchmark"].t, w["benchmark"].cost
    np.testing.assert_allclose(cost, 2 + 1 - np.abs(t), atol=1e-12)
    assert w["fully_revealing"].cost[0] == 2.0 and w["fully_revealing"].cost[-1] == 2.0
    assert w["simple"].expected_surplus == pytest.approx(3 - 1.25)


def test_welfare_expectation_matches_curve_average():
    # uniform types: the grid mean of the cost curve approximates the expectation
    for regime in ("simple", "rich", "fully_revealing"):
        w = duopoly_welfare(UNIFORM, regime, n_grid=200_001)
        assert np.mean(w.cost) == pytest.approx(w.expected_cost, abs=1e-4)


def test_cost_curves_columns():
    cols = cost_curves(UNIFORM, n_grid=11)
    assert list(cols) == ["t", "benchmark_cost", "fully_revealing_cost", "simple_cost", "rich_cost"]
    assert all(len(c) == 11 for c in cols.values())


@pytest.mark.parametrize("a", [1.5, 2.0, 3.0, 5.0, 8.0])
def test_interim_dominance_chain(a):
    cfg = DuopolyConfig(Beta(a, a, -1, 1))
    bench = duopoly_welfare(cfg, "benchmark").cost
    simple = duopoly_welfare(cfg, "simple").cost
    rich = duopoly_welfare(cfg, "rich").cost
    assert np.all(simple <= bench) and np.any(simple < bench)
    assert np.all(rich <= simple + 1e-15)
    assert max(simple_evidence_duopoly(cfg).p1_R, simple_evidence_duopoly(cfg).p1_L) < benchmark_price(cfg).p_star


@settings(max_examples=60, deadline=None)
@given(st.floats(-1.0, 1.0))
def test_simple_cost_formula_uniform(t):
    s = simple_evidence_duopoly(UNIFORM)
    _, cost = purchase(t, *s.prices(t))
    expected = 1 + abs(t) if abs(t) <= 0.5 else 2 - abs(t)
    assert float(cost) == pytest.approx(expected, abs=1e-12)
