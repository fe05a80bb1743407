import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from segmarket.dist import Beta, Discrete, DistributionError, Power, Uniform
from segmarket.monopoly import (
    MonopolySegmentation,
    benchmark_surplus,
    greedy_segmentation,
    interim_payoff_zeno,
    optimal_posted_price,
    optimal_truncated_price,
    segmentation_from_cutoffs,
    segmentation_welfare,
    simple_evidence_equilibria,
)


def brute_force_argmax(d, lo, hi, n=2_000_001):
    p = np.linspace(lo, hi, n)
    rev = p * (float(d.cdf(hi)) - np.asarray(d.cdf(p)))
    return p[int(np.argmax(rev))]


@pytest.mark.parametrize(
    "d,expected",
    [(Uniform(0, 1), 0.5), (Power(2), 3**-0.5), (Uniform(1, 2), 1.0), (Power(0.5), 1.5**-2)],
)
def test_posted_price(d, expected):
    assert optimal_posted_price(d).p == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("d", [Beta(2, 5, 0, 1), Beta(3, 3, 1, 4), Power(3)])
def test_posted_price_matches_dense_grid(d):
    p = optimal_posted_price(d).p
    assert p == pytest.approx(brute_force_argmax(d, d.support_lo, d.support_hi), abs=5e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 4.0), st.floats(0.05, 1.0))
def test_truncated_power_price_closed_form(k, v):
    got = optimal_truncated_price(Power(k), v).p
    assert got == pytest.approx(v / (k + 1) ** (1 / k), rel=1e-9)


def test_discrete_law_rejected():
    with pytest.raises(DistributionError):
        optimal_posted_price(Discrete((1.0, 2.0), (0.5, 0.5)))


def test_zeno_cutoffs_exact():
    seg = greedy_segmentation(Uniform(0, 1))
    assert seg.truncation_reason == "eps_price"
    assert seg.cutoffs == tuple(2.0**-k for k in range(len(seg.cutoffs)))
    assert seg.cutoffs[-1] < 1e-6 <= seg.cutoffs[-2]


def test_power_law_cutoffs_geometric():
    k = 2.0
    gamma = math.sqrt(3)
    seg = greedy_segmentation(Power(k))
    for i, c in enumerate(seg.cutoffs[:12]):
        assert c == pytest.approx(gamma**-i, rel=1e-12)


def test_floor_termination():
    seg = greedy_segmentation(Uniform(1, 2))
    assert seg.terminated_at_floor and seg.truncation_reason == "floor"
    assert seg.cutoffs == (2.0, 1.0)
    w = segmentation_welfare(Uniform(1, 2), seg)
    assert w.cs_ex_ante == pytest.approx(0.5, abs=1e-12)
    assert w.ps_ex_ante == pytest.approx(1.0, abs=1e-12)


def test_max_segments_and_eps_mass_truncation():
    assert greedy_segmentation(Uniform(0, 1), max_segments=3).truncation_reason == "max_segments"
    assert greedy_segmentation(Uniform(0, 1), eps_mass=1e-3).truncation_reason == "eps_mass"
    with pytest.raises(ValueError):
        greedy_segmentation(Uniform(0, 1), eps_price=0.0)


def test_zeno_welfare_against_geometric_series():
    # segment (2^-s, 2^-(s-1)] has mass 2^-s and price 2^-s
    d = Uniform(0, 1)
    w = segmentation_welfare(d, greedy_segmentation(d))
    ps = sum(4.0**-s for s in range(1, 21))
    assert w.ps_ex_ante == pytest.approx(ps, abs=1e-14)
    assert w.cs_ex_ante == pytest.approx(0.5 - ps, abs=1e-12)
    assert w.trade_prob == 1.0


def test_posted_price_welfare():
    d = Uniform(0, 1)
    w = segmentation_welfare(d, MonopolySegmentation.posted(d, 0.5))
    assert (w.cs_ex_ante, w.ps_ex_ante, w.avg_price, w.trade_prob) == pytest.approx((0.125, 0.25, 0.5, 0.5))


def test_boundary_types_take_lower_price():
    seg = greedy_segmentation(Uniform(0, 1))
    assert seg.price_at(0.5) == 0.25
    assert seg.price_at(0.5000001) == 0.5
    assert seg.price_at(1.0) == 0.5
    assert seg.price_at(0.0) == 0.0


@settings(max_examples=80, deadline=None)
@given(st.floats(1e-5, 1.0))
def test_interim_payoff_zeno_matches_segmentation(v):
    seg = greedy_segmentation(Uniform(0, 1))
    assert interim_payoff_zeno(v) == pytest.approx(v - seg.price_at(v), abs=1e-15)


def test_interim_payoff_zeno_values():
    assert interim_payoff_zeno(0.5) == 0.25
    assert interim_payoff_zeno(1.0) == 0.5
    assert interim_payoff_zeno(0.3) == pytest.approx(0.05)
    with pytest.raises(ValueError):
        interim_payoff_zeno(0.0)


def test_benchmark_surplus():
    f = benchmark_surplus(Uniform(0, 1))
    np.testing.assert_allclose(f([0.2, 0.5, 0.9]), [0.0, 0.0, 0.4], atol=1e-12)


@pytest.mark.parametrize("d", [Uniform(0, 1), Power(2), Beta(2, 5, 0, 1)])
def test_simple_evidence_never_beats_posted_price(d):
    eqs = {e.name: e for e in simple_evidence_equilibria(d)}
    assert set(eqs) == {"full-unraveling", "cutoff", "full-pooling"}
    p_star = optimal_posted_price(d).p
    for e in eqs.values():
        assert e.nd_price >= p_star - 1e-10
        assert e.verified
        v = np.linspace(d.support_lo, d.support_hi, 101)
        assert np.all(e.interim_surplus(v) <= np.maximum(v - p_star, 0.0) + 1e-12)
    np.testing.assert_allclose(
        eqs["cutoff"].interim_surplus(np.linspace(0, 1, 11)), np.maximum(np.linspace(0, 1, 11) - p_star, 0), atol=1e-12
    )


def test_segmentation_from_cutoffs_and_export():
    d = Uniform(0, 1)
    seg = segmentation_from_cutoffs(d, (1.0, 0.5, 0.0))
    assert seg.prices == (0.5, 0.0) and seg.terminated_at_floor
    out = seg.to_dict(d)
    assert out["segment_mass"] == pytest.approx([0.5, 0.5])
    with pytest.raises(ValueError):
        MonopolySegmentation((1.0, 1.0), (0.5,), 0.0, True)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 4.0))
def test_greedy_prices_bottom_of_each_segment(k):
    d = Power(k)
    seg = greedy_segmentation(d, max_segments=8)
    for lo, hi, p in seg.segments():
        assert p <= lo + 1e-15
    assert all(b < a for a, b in zip(seg.prices, seg.prices[1:]))
