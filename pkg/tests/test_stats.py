import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special, stats

from oracles import pearson_direct, t_cdf_quad, t_quantile_mp, t_two_sided_quad
from texturalyze.errors import LengthMismatch, TooFewPoints, ZeroVariance
from texturalyze.stats import betainc, pearson, pearson_r, t_cdf, t_ppf, t_sf2, weighted_pearson_r


@given(
    st.floats(0.1, 200.0),
    st.floats(0.1, 200.0),
    st.floats(0.0, 1.0),
)
def test_betainc_matches_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), rel=1e-11, abs=1e-14)


def test_betainc_endpoints():
    assert betainc(2.0, 3.0, 0.0) == 0.0
    assert betainc(2.0, 3.0, 1.0) == 1.0


@pytest.mark.parametrize("df", [1, 2, 3, 7, 30])
def test_t_cdf_at_zero_is_half(df):
    assert t_cdf(0.0, df) == 0.5


def test_cauchy_closed_form():
    assert t_cdf(1.0, 1) == pytest.approx(0.75, abs=1e-12)
    for t in (-5.0, -0.3, 0.2, 3.0, 40.0):
        assert t_cdf(t, 1) == pytest.approx(0.5 + math.atan(t) / math.pi, abs=1e-12)


def test_critical_value_df4():
    p = t_sf2(2.7765, 4)
    assert p == pytest.approx(0.05, abs=1e-4)
    assert p == pytest.approx(t_two_sided_quad(2.7765, 4), abs=1e-6)


@given(st.floats(-60.0, 60.0), st.integers(1, 200))
def test_t_cdf_matches_quadrature(t, df):
    assert t_cdf(t, df) == pytest.approx(t_cdf_quad(t, df), abs=1e-9)


@given(st.floats(-50.0, 50.0), st.integers(1, 500))
def test_t_cdf_symmetry(t, df):
    assert t_cdf(t, df) + t_cdf(-t, df) == pytest.approx(1.0, abs=1e-12)


@given(st.integers(1, 100), st.lists(st.floats(-20, 20), min_size=2, max_size=10))
def test_t_cdf_monotone(df, ts):
    ts = sorted(ts)
    values = [t_cdf(t, df) for t in ts]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_t_cdf_normal_limit():
    for t in (-3.0, -1.0, 0.5, 2.0):
        assert t_cdf(t, 1e6) == pytest.approx(stats.norm.cdf(t), abs=1e-6)


@pytest.mark.parametrize("df", [1, 2, 4, 9, 29])
@pytest.mark.parametrize("q", [0.025, 0.6, 0.975, 0.995])
def test_t_ppf_against_high_precision(q, df):
    assert t_ppf(q, df) == pytest.approx(t_quantile_mp(q, df), rel=1e-10)


def test_t_ppf_inverts_cdf():
    for df in (1, 3, 12):
        for q in (0.01, 0.3, 0.5, 0.8, 0.999):
            assert t_cdf(t_ppf(q, df), df) == pytest.approx(q, abs=1e-13)


def test_t_ppf_rejects_bad_probability():
    with pytest.raises(ValueError):
        t_ppf(1.0, 3)


@given(st.integers(4, 50), st.integers(0, 2**32 - 1))
def test_pearson_against_oracle(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    y = 0.4 * x + rng.normal(size=n)
    res = pearson(x, y)
    r = pearson_direct(x.tolist(), y.tolist())
    assert res.r == pytest.approx(r, abs=1e-12)
    t = r * math.sqrt((n - 2) / (1 - r * r))
    assert res.p_value == pytest.approx(t_two_sided_quad(t, n - 2), abs=1e-9)
    assert res.significant == (res.p_value < 0.05)
    assert 0.0 <= res.p_value <= 1.0


def test_pearson_perfect_correlation():
    x = np.arange(6.0)
    res = pearson(x, x)
    assert res.r == 1.0 and res.p_value == 0.0 and res.significant
    assert pearson(x, -x).r == -1.0


@given(st.floats(0.01, 100), st.floats(-100, 100), st.integers(0, 1000))
def test_pearson_affine_invariance(a, b, seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, 8))
    r = pearson_r(x, y)
    assert pearson_r(a * x + b, y) == pytest.approx(r, abs=1e-12)
    assert pearson_r(-a * x + b, y) == pytest.approx(-r, abs=1e-12)


def test_pearson_errors():
    with pytest.raises(ZeroVariance):
        pearson([1, 1, 1, 1], [1, 2, 3, 4])
    with pytest.raises(LengthMismatch):
        pearson([1, 2, 3], [1, 2])
    with pytest.raises(TooFewPoints):
        pearson([1, 2], [2, 1])


def test_alpha_controls_significance():
    x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    y = [1.2, 1.9, 3.3, 3.7, 5.4, 5.9]
    res = pearson(x, y, alpha=1e-9)
    assert res.p_value > 1e-9 and not res.significant


def test_weighted_pearson_equal_weights_is_pearson():
    rng = np.random.default_rng(4)
    x, y = rng.normal(size=(2, 9))
    assert weighted_pearson_r(x, y, np.full(9, 3.0)) == pytest.approx(pearson_r(x, y), abs=1e-14)
