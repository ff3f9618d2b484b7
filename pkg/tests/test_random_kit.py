import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats
from scipy.special import kv

from galor import random_kit as rk
from galor.random_kit import Rectangle2D


def rng(seed=0):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# streams


def test_streams_reproducible_and_distinct():
    a = rk.make_rng(42, "chain").random(5)
    b = rk.make_rng(42, "chain").random(5)
    c = rk.make_rng(42, "data").random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize(
    "draw",
    [
        lambda g: rk.sample_truncated_normal(np.zeros(20), 1.0, -1.0, 2.0, g),
        lambda g: rk.sample_gig_half(np.ones(20), 2.0, g),
        lambda g: rk.sample_half_normal(2.0, g, 20),
        lambda g: rk.sample_scaled_beta(-1.0, 2.0, 4.0, 4.0, g, 20),
        lambda g: rk.sample_btn([0.1, 0.2], [[1.0, 0.3], [0.3, 0.5]], Rectangle2D(0, np.inf, -1, 1), g),
    ],
)
def test_generators_reproducible(draw):
    assert np.array_equal(draw(rk.make_rng(7, "x")), draw(rk.make_rng(7, "x")))


# ---------------------------------------------------------------------------
# truncated normal


def test_tn_half_line_mean():
    x = rk.sample_truncated_normal(np.zeros(1_000_000), 1.0, 0.0, np.inf, rng(1))
    assert x.min() > 0
    assert abs(x.mean() - math.sqrt(2 / math.pi)) < 0.003


def test_tn_untruncated_is_normal():
    x = rk.sample_truncated_normal(np.zeros(100_000), 1.0, -np.inf, np.inf, rng(2))
    assert stats.kstest(x, "norm").pvalue > 0.01


def test_tn_far_interval():
    x = rk.sample_truncated_normal(np.zeros(200_000), 1.0, 8.0, 9.0, rng(3))
    assert np.all((x > 8) & (x < 9))
    phi, Phi = stats.norm.pdf, stats.norm.sf
    exact = (phi(8) - phi(9)) / (Phi(8) - Phi(9))
    assert x.mean() == pytest.approx(exact, rel=0.01)
    assert rk.truncated_normal_mean(0.0, 1.0, 8.0, 9.0) == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("lo,hi", [(-40.0, -38.5), (38.0, np.inf), (3.0, 3.0001), (-np.inf, -12.0), (-0.5, 0.25)])
def test_tn_hard_intervals(lo, hi):
    x = rk.sample_truncated_normal(np.zeros(20_000), 1.0, lo, hi, rng(4))
    assert np.all((x > lo) & (x < hi))
    assert x.mean() == pytest.approx(rk.truncated_normal_mean(0.0, 1.0, lo, hi), rel=0.01, abs=1e-5)


def test_tn_ks_against_truncated_law():
    a, b = -0.3, 1.7
    x = rk.sample_truncated_normal(np.full(50_000, 0.4), 2.0, a, b, rng(5))
    sd = math.sqrt(2.0)
    law = stats.truncnorm((a - 0.4) / sd, (b - 0.4) / sd, loc=0.4, scale=sd)
    assert stats.kstest(x, law.cdf).pvalue > 0.01


def test_tn_scalar_returns_float():
    v = rk.sample_truncated_normal(0.0, 1.0, 0.0, 1.0, rng())
    assert isinstance(v, float) and 0 < v < 1


def test_tn_rejects_bad_input():
    with pytest.raises(ValueError):
        rk.sample_truncated_normal(0.0, 1.0, 1.0, 1.0, rng())
    with pytest.raises(ValueError):
        rk.sample_truncated_normal(0.0, 0.0, 0.0, 1.0, rng())


@given(st.floats(-50, 50), st.floats(0.01, 100), st.floats(-60, 60), st.floats(1e-3, 20))
@settings(max_examples=200, deadline=None)
def test_tn_support(mean, var, lo, width):
    x = rk.sample_truncated_normal(np.full(10, mean), var, lo, lo + width, rng())
    assert np.all((x > lo) & (x < lo + width))


def test_tn_mean_matches_truncnorm():
    for m, v, lo, hi in [(0.3, 2.0, -1.0, 0.5), (-2.0, 0.5, 1.0, np.inf), (1.0, 1.0, -np.inf, -3.0)]:
        sd = math.sqrt(v)
        ref = stats.truncnorm((lo - m) / sd, (hi - m) / sd, loc=m, scale=sd).mean()
        assert rk.truncated_normal_mean(m, v, lo, hi) == pytest.approx(ref, rel=1e-9)


# ---------------------------------------------------------------------------
# half-normal


@pytest.mark.parametrize("scale_sq", [1.0, 4.0])
def test_half_normal_mean(scale_sq):
    x = rk.sample_half_normal(scale_sq, rng(6), 1_000_000)
    assert np.all(x >= 0)
    sd = math.sqrt(scale_sq * (1 - 2 / math.pi))
    assert abs(x.mean() - math.sqrt(2 * scale_sq / math.pi)) < 4 * sd / 1000


# ---------------------------------------------------------------------------
# GIG(1/2)


def gig_moment_oracle(a, b, r):
    """E[X^r] for GIG(1/2, a, b) via Bessel functions."""
    w = math.sqrt(a * b)
    return (a / b) ** (r / 2) * kv(0.5 + r, w) / kv(0.5, w)


@pytest.mark.parametrize("a,b,expected", [(1.0, 1.0, 2.0), (4.0, 1.0, 3.0)])
def test_gig_bessel_means(a, b, expected):
    x = rk.sample_gig_half(np.full(1_000_000, a), b, rng(7))
    assert x.mean() == pytest.approx(expected, rel=0.01)
    assert rk.gig_half_mean(a, b) == pytest.approx(gig_moment_oracle(a, b, 1), rel=1e-12)


@pytest.mark.parametrize("a,b", [(0.3, 2.5), (5.0, 0.2), (1e-4, 3.0)])
def test_gig_two_moments(a, b):
    x = rk.sample_gig_half(np.full(1_000_000, a), b, rng(8))
    m1 = gig_moment_oracle(a, b, 1)
    m2 = gig_moment_oracle(a, b, 2)
    se = math.sqrt(m2 - m1**2) / 1000
    assert abs(x.mean() - m1) < 4 * se
    assert x.var() == pytest.approx(m2 - m1**2, rel=0.03)


def test_gig_reciprocal_identity():
    # 1/X ~ GIG(-1/2, b, a): E[1/X] = sqrt(b/a)
    a, b = 2.0, 0.5
    x = rk.sample_gig_half(np.full(1_000_000, a), b, rng(9))
    assert (1 / x).mean() == pytest.approx(math.sqrt(b / a), rel=0.01)


def test_gig_zero_a_is_gamma():
    # a -> 0 leaves a Gamma(1/2, rate b/2) law with mean 1/b
    x = rk.sample_gig_half(np.zeros(400_000), 2.0, rng(10))
    assert np.all(x > 0)
    assert x.mean() == pytest.approx(0.5, rel=0.01)


def test_gig_ks_against_density():
    a, b = 1.5, 0.7
    x = rk.sample_gig_half(np.full(50_000, a), b, rng(11))
    law = stats.geninvgauss(0.5, math.sqrt(a * b), scale=math.sqrt(a / b))
    assert stats.kstest(x, law.cdf).pvalue > 0.01


def test_gig_domain():
    with pytest.raises(ValueError):
        rk.sample_gig_half(-1.0, 1.0, rng())
    with pytest.raises(ValueError):
        rk.sample_gig_half(1.0, 0.0, rng())


# ---------------------------------------------------------------------------
# scaled beta


def test_scaled_beta_symmetric_mean():
    x = rk.sample_scaled_beta(-1.0, 1.0, 4.0, 4.0, rng(12), 200_000)
    assert abs(x.mean()) < 4 * math.sqrt(4 / 9 / 4 / 200_000) * 2


def test_scaled_beta_uniform_ks():
    x = rk.sample_scaled_beta(0.0, 1.0, 1.0, 1.0, rng(13), 50_000)
    assert stats.kstest(x, "uniform").pvalue > 0.01


def test_scaled_beta_logpdf_midpoint():
    L, U = -1.3, 0.7
    val = rk.scaled_beta_logpdf((L + U) / 2, L, U, 4.0, 4.0)
    assert val == pytest.approx(stats.beta(4, 4).logpdf(0.5) - math.log(U - L), abs=1e-12)


@pytest.mark.parametrize("L,U,a,b", [(-1.0, 1.0, 4.0, 4.0), (0.0, 3.0, 2.0, 5.0), (-2.4, -0.1, 1.0, 1.0)])
def test_scaled_beta_density_integrates(L, U, a, b):
    total = integrate.quad(lambda x: math.exp(rk.scaled_beta_logpdf(x, L, U, a, b)), L, U)[0]
    assert total == pytest.approx(1.0, abs=1e-6)
    assert rk.scaled_beta_logpdf(U + 0.1, L, U, a, b) == -np.inf


# ---------------------------------------------------------------------------
# bivariate normal rectangles


def bvn_quadrature(mean, cov, rect):
    """Independent oracle: integrate conditional normal probabilities over x1."""
    s1 = math.sqrt(cov[0][0])
    s2 = math.sqrt(cov[1][1])
    r = cov[0][1] / (s1 * s2)
    cs = s2 * math.sqrt(1 - r * r)

    def f(x1):
        cm = mean[1] + r * s2 * (x1 - mean[0]) / s1
        return stats.norm.pdf(x1, mean[0], s1) * (stats.norm.cdf((rect.hi2 - cm) / cs) - stats.norm.cdf((rect.lo2 - cm) / cs))

    return integrate.quad(f, rect.lo1, rect.hi1, epsabs=1e-13, epsrel=1e-12, limit=200)[0]


def test_bvn_quadrant_and_plane():
    I = np.eye(2)
    assert rk.bvn_rectangle_prob([0, 0], I, Rectangle2D(0, np.inf, 0, np.inf)) == pytest.approx(0.25, abs=1e-15)
    assert rk.bvn_rectangle_prob([0, 0], I, Rectangle2D()) == pytest.approx(1.0, abs=1e-15)


def test_bvn_quadrant_closed_form():
    # P(X>0, Y>0) = 1/4 + asin(rho) / (2 pi)
    for rho in (-0.95, -0.5, 0.0, 0.5, 0.99):
        cov = [[1, rho], [rho, 1]]
        val = rk.bvn_rectangle_prob([0, 0], cov, Rectangle2D(0, np.inf, 0, np.inf))
        assert val == pytest.approx(0.25 + math.asin(rho) / (2 * math.pi), abs=1e-14)


@pytest.mark.parametrize(
    "mean,cov,rect",
    [
        ([0, 0], [[1, 0.5], [0.5, 1]], Rectangle2D(0, np.inf, 0, np.inf)),
        ([1.2, -0.3], [[2.0, -0.9], [-0.9, 0.8]], Rectangle2D(0, np.inf, -1.08, 1.09)),
        ([0.05, 1.0], [[0.01, 0.009], [0.009, 0.0095]], Rectangle2D(0, np.inf, -0.8, 0.9)),
        ([3.0, 0.0], [[1.0, 0.2], [0.2, 3.0]], Rectangle2D(-1.0, 0.5, -2.0, 4.0)),
    ],
)
def test_bvn_matches_quadrature(mean, cov, rect):
    assert rk.bvn_rectangle_prob(mean, cov, rect) == pytest.approx(bvn_quadrature(mean, cov, rect), abs=1e-8)


@given(
    st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(-0.98, 0.98),
    st.floats(-4, 4), st.floats(0.05, 5), st.floats(-4, 4), st.floats(0.05, 5),
)
@settings(max_examples=60, deadline=None)
def test_bvn_property_vs_quadrature(m1, m2, s1, s2, r, a1, w1, a2, w2):
    cov = [[s1 * s1, r * s1 * s2], [r * s1 * s2, s2 * s2]]
    rect = Rectangle2D(a1, a1 + w1, a2, a2 + w2)
    assert rk.bvn_rectangle_prob([m1, m2], cov, rect) == pytest.approx(bvn_quadrature([m1, m2], cov, rect), abs=1e-8)


def test_bvn_rejects_non_spd():
    with pytest.raises(ValueError):
        rk.bvn_rectangle_prob([0, 0], [[1, 2], [2, 1]], Rectangle2D())


def test_rectangle_validates():
    with pytest.raises(ValueError):
        Rectangle2D(1.0, 0.0, 0.0, 1.0)


# ---------------------------------------------------------------------------
# truncated bivariate normal


def test_btn_diagonal_factorises():
    g = rng(14)
    rect = Rectangle2D(0.0, np.inf, -1.0, 1.0)
    cov = np.diag([2.0, 0.5])
    x = np.array([rk.sample_btn([0.5, 0.3], cov, rect, g) for _ in range(20_000)])
    l1 = stats.truncnorm((0 - 0.5) / math.sqrt(2), np.inf, loc=0.5, scale=math.sqrt(2))
    l2 = stats.truncnorm((-1 - 0.3) / math.sqrt(0.5), (1 - 0.3) / math.sqrt(0.5), loc=0.3, scale=math.sqrt(0.5))
    assert stats.kstest(x[:, 0], l1.cdf).pvalue > 0.01
    assert stats.kstest(x[:, 1], l2.cdf).pvalue > 0.01


def test_btn_correlated_matches_rejection():
    g = rng(15)
    mean = np.array([0.4, 0.2])
    cov = np.array([[1.0, 0.7], [0.7, 0.8]])
    rect = Rectangle2D(0.0, np.inf, -0.5, 0.6)
    x = np.array([rk.sample_btn(mean, cov, rect, g) for _ in range(20_000)])
    raw = g.multivariate_normal(mean, cov, 400_000)
    inside = raw[(raw[:, 0] > 0) & (raw[:, 1] > -0.5) & (raw[:, 1] < 0.6)]
    assert stats.ks_2samp(x[:, 0], inside[:, 0]).pvalue > 0.01
    assert stats.ks_2samp(x[:, 1], inside[:, 1]).pvalue > 0.01
    assert np.all(x[:, 0] > 0) and np.all((x[:, 1] > -0.5) & (x[:, 1] < 0.6))


def test_btn_rejection_rate_matches_rectangle_prob():
    g = rng(16)
    mean = [0.2, -0.1]
    cov = [[1.5, -0.6], [-0.6, 0.9]]
    rect = Rectangle2D(0.0, np.inf, -0.3, 1.0)
    n = 200_000
    raw = g.multivariate_normal(mean, cov, n)
    frac = np.mean((raw[:, 0] > 0) & (raw[:, 1] > -0.3) & (raw[:, 1] < 1.0))
    p = rk.bvn_rectangle_prob(mean, cov, rect)
    assert abs(frac - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_btn_log_density_normalises():
    mean = [0.3, 0.1]
    cov = np.array([[0.6, 0.2], [0.2, 0.4]])
    rect = Rectangle2D(0.0, 3.0, -1.0, 1.0)
    total = integrate.dblquad(
        lambda x2, x1: math.exp(rk.btn_log_density([x1, x2], mean, cov, rect)), 0.0, 3.0, -1.0, 1.0, epsabs=1e-10
    )[0]
    assert total == pytest.approx(1.0, abs=1e-6)
    assert rk.btn_log_density([-0.1, 0.0], mean, cov, rect) == -np.inf


def test_btn_vanishing_rectangle():
    with pytest.raises(rk.VanishingRegionError, match="tuning"):
        rk.sample_btn([0.0, 0.0], np.eye(2) * 1e-4, Rectangle2D(0.0, np.inf, 50.0, 51.0), rng())
