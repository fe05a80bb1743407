import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from segmarket.dist import (
    Beta,
    Discrete,
    DistributionError,
    PiecewiseLinear,
    Power,
    PowerLawParams,
    Uniform,
    cdf,
    check_log_concave_symmetric,
    from_dict,
    pdf,
    quantile,
)


def test_uniform_values():
    assert cdf(Uniform(0, 1), 0.5) == 0.5
    assert pdf(Uniform(-1, 1), 0.0) == 0.5


def test_power_values():
    assert cdf(Power(2), 0.5) == pytest.approx(0.25, abs=1e-15)
    assert pdf(Power(2), 0.5) == pytest.approx(1.0, abs=1e-15)


def test_power_gamma():
    assert PowerLawParams(1).gamma == 2.0
    assert PowerLawParams(2).gamma == pytest.approx(math.sqrt(3))


def test_discrete_example_cdf():
    eps = 0.01
    d = Discrete((1 / 3, 2 / 3, 1.0), (0.5 - eps, 1 / 3 + eps, 1 / 6))
    assert cdf(d, 2 / 3) == pytest.approx(5 / 6, abs=1e-15)
    assert cdf(d, 0.5) == pytest.approx(0.49, abs=1e-15)
    assert cdf(d, 1.0) == 1.0
    with pytest.raises(DistributionError):
        pdf(d, 0.5)


def test_beta_density_and_cdf_at_center():
    d = Beta(2, 2, -1, 1)
    assert float(d.pdf(0.0)) == pytest.approx(0.75, abs=1e-14)
    assert float(d.cdf(0.0)) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("a,b", [(2, 2), (2, 5), (3.5, 1.5)])
def test_beta_cdf_matches_quadrature_oracle(a, b):
    d = Beta(a, b, 0.0, 2.0)
    for x in (0.1, 0.7, 1.3, 1.9):
        assert float(d.cdf(x)) == pytest.approx(d.cdf_by_quadrature(x), abs=1e-10)


def test_beta22_cdf_closed_form():
    d = Beta(2, 2, -1, 1)
    t = np.linspace(-1, 1, 41)
    x = (t + 1) / 2
    np.testing.assert_allclose(d.cdf(t), 3 * x**2 - 2 * x**3, atol=1e-14)


def test_piecewise_validation():
    with pytest.raises(DistributionError):
        PiecewiseLinear(((0.0, 0.0), (1.0, 0.9)))
    with pytest.raises(DistributionError):
        PiecewiseLinear(((0.0, 0.0), (0.5, 0.7), (1.0, 0.6)))


def test_piecewise_pdf_at_knot_is_mean_of_sides():
    d = PiecewiseLinear(((0.0, 0.0), (0.5, 0.25), (1.0, 1.0)))
    assert float(d.pdf(0.5)) == pytest.approx(1.0)
    assert float(d.pdf(0.25)) == pytest.approx(0.5)


def test_from_samples_support_and_order():
    rng = np.random.default_rng(3)
    d = PiecewiseLinear.from_samples(rng.uniform(0.2, 0.8, 100))
    assert d.cdf(d.support_lo) == 0.0 and d.cdf(d.support_hi) == 1.0
    e = PiecewiseLinear.from_samples(rng.uniform(-1, 1, 100), support=(-1.0, 1.0))
    assert (e.support_lo, e.support_hi) == (-1.0, 1.0)
    with pytest.raises(DistributionError):
        PiecewiseLinear.from_samples([0.5, 2.0], support=(0.0, 1.0))


@pytest.mark.parametrize(
    "desc",
    [
        {"kind": "uniform", "lo": 0.0, "hi": 2.0},
        {"kind": "power", "k": 3.0},
        {"kind": "beta", "a": 2.0, "b": 3.0, "lo": -1.0, "hi": 1.0},
        {"kind": "piecewise", "knots": [[0.0, 0.0], [0.5, 0.4], [1.0, 1.0]]},
        {"kind": "discrete", "support": [1.0, 2.0], "masses": [0.25, 0.75]},
        {"kind": "reflected", "base": {"kind": "power", "k": 2.0}},
    ],
)
def test_from_dict_round_trip(desc):
    d = from_dict(desc)
    assert from_dict(d.to_dict()) == d


def test_from_dict_rejects_unknown_fields_and_kinds():
    with pytest.raises(DistributionError):
        from_dict({"kind": "uniform", "lo": 0, "hi": 1, "mode": 3})
    with pytest.raises(DistributionError):
        from_dict({"kind": "gamma"})


def test_reflected_law():
    d = Power(2).reflect()
    assert (d.support_lo, d.support_hi) == (-1.0, 0.0)
    assert float(d.cdf(-0.5)) == pytest.approx(1 - 0.25)
    assert d.reflect() == Power(2)


def test_partial_expectation_and_mean():
    assert Uniform(0, 1).mean() == pytest.approx(0.5, abs=1e-13)
    assert Power(2).mean() == pytest.approx(2 / 3, abs=1e-13)
    assert Uniform(0, 1).partial_expectation(0.5, 1.0) == pytest.approx(0.375, abs=1e-13)


def test_shape_checks():
    assert check_log_concave_symmetric(Uniform(-1, 1)).passed
    assert check_log_concave_symmetric(Beta(3, 3, -1, 1)).passed
    assert not check_log_concave_symmetric(Beta(2, 3, -1, 1)).symmetric
    bimodal = PiecewiseLinear(((-1.0, 0.0), (-0.5, 0.4), (0.5, 0.6), (1.0, 1.0)))
    rep = check_log_concave_symmetric(bimodal)
    assert rep.symmetric and not rep.log_concave


LAWS = [Uniform(0, 1), Power(0.5), Power(3), Beta(2, 5, 0, 1), PiecewiseLinear(((0, 0), (0.3, 0.5), (1, 1)))]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(LAWS), st.floats(0.001, 0.999))
def test_quantile_inverts_cdf(d, q):
    x = float(quantile(d, q))
    assert float(d.cdf(x)) == pytest.approx(q, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(LAWS), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_cdf_monotone_and_bounded(d, x, y):
    lo, hi = sorted((x, y))
    a, b = float(d.cdf(lo)), float(d.cdf(hi))
    assert 0.0 <= a <= b <= 1.0
