import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from galor import gal
from galor.model import (
    CutpointSpec,
    OrdinalDataset,
    PriorConfig,
    category_probabilities,
    delta_to_xi,
    log_likelihood,
    log_prior,
    xi_to_delta,
)


def single(y, J=3):
    return OrdinalDataset(X=np.ones((1, 1)), y=[y], J=J)


# ---------------------------------------------------------------------------
# cut-points


def test_xi_from_log_spacing():
    xi = delta_to_xi(CutpointSpec(2.0, [math.log(2.0)]), 4)
    assert xi[0] == -np.inf and xi[-1] == np.inf
    assert np.allclose(xi[1:4], [0.0, 2.0, 4.0], atol=1e-15)


def test_xi_three_categories():
    xi = delta_to_xi(CutpointSpec(3.0), 3)
    assert list(xi) == [-np.inf, 0.0, 3.0, np.inf]


def test_xi_zero_spacing():
    assert delta_to_xi(CutpointSpec(2.0, [0.0]), 4)[3] == 3.0


def test_xi_wrong_length():
    with pytest.raises(ValueError, match="log-spacings"):
        delta_to_xi(CutpointSpec(2.0, [0.0, 0.0]), 4)


def test_cutpoint_requires_positive_c():
    with pytest.raises(ValueError):
        CutpointSpec(0.0)


@given(st.floats(0.1, 10), st.lists(st.floats(-5, 3), min_size=0, max_size=5))
def test_xi_roundtrip_and_monotone(c, delta):
    J = len(delta) + 3
    xi = delta_to_xi(CutpointSpec(c, delta), J)
    assert np.all(np.diff(xi) > 0)
    back = xi_to_delta(xi)
    assert back.c == c
    assert np.allclose(back.delta, delta, atol=1e-9)


# ---------------------------------------------------------------------------
# dataset


def test_dataset_validation():
    with pytest.raises(ValueError, match="rows"):
        OrdinalDataset(np.ones((3, 2)), [1, 2], 3)
    with pytest.raises(ValueError, match="1..3"):
        OrdinalDataset(np.ones((2, 1)), [0, 2], 3)
    with pytest.raises(ValueError, match="J >= 3"):
        OrdinalDataset(np.ones((2, 1)), [1, 2], 2)
    d = OrdinalDataset(np.ones((3, 1)), [1, 1, 3], 3)
    assert list(d.counts()) == [2, 0, 1]
    with pytest.raises(ValueError, match=r"\[2\]"):
        d.validate_categories()


# ---------------------------------------------------------------------------
# likelihood


def test_loglik_lowest_category_is_p0():
    assert log_likelihood([0.0], 1.0, 0.0, CutpointSpec(3.0), single(1), 0.5) == pytest.approx(math.log(0.5), abs=1e-14)


def test_loglik_top_category_closed_form():
    val = log_likelihood([0.0], 1.0, 0.0, CutpointSpec(3.0), single(3), 0.5)
    assert val == pytest.approx(math.log(0.5 * math.exp(-1.5)), abs=1e-13)
    assert val == pytest.approx(-2.19315, abs=1e-5)


def test_category_probabilities_al():
    p = category_probabilities([1.0], [0.0], 1.0, 0.0, CutpointSpec(3.0), 0.5)
    assert np.allclose(p, [0.5, 0.5 - 0.5 * math.exp(-1.5), 0.5 * math.exp(-1.5)], atol=1e-14)
    assert np.allclose(p, [0.5, 0.38843, 0.11157], atol=1e-5)


@given(
    st.floats(0.02, 0.98), st.floats(-0.98, 0.98), st.floats(-20, 20), st.floats(0.05, 10),
    st.floats(0.1, 5), st.lists(st.floats(-3, 2), max_size=3),
)
@settings(max_examples=150)
def test_category_probabilities_partition(p0, frac, eta, sigma, c, delta):
    L, U = gal.gamma_bounds(p0)
    gamma = frac * (U if frac > 0 else -L)
    spec = CutpointSpec(c, delta)
    p = category_probabilities([1.0], [eta], sigma, gamma, spec, p0)
    assert np.all(p >= 0)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    J = len(delta) + 3
    per_cat = [math.exp(log_likelihood([eta], sigma, gamma, spec, single(j, J), p0)) for j in range(1, J + 1)]
    assert sum(per_cat) == pytest.approx(1.0, abs=1e-12)


def test_category_probabilities_large_index_goes_to_top():
    p = category_probabilities([1.0], [200.0], 1.0, 0.5, CutpointSpec(2.0, [0.0]), 0.25)
    assert p[-1] == pytest.approx(1.0, abs=1e-12)


def test_location_shift_invariance():
    p0, gamma, sigma, d = 0.3, 0.4, 1.2, 0.7
    a = category_probabilities([1.0], [0.5 + d], sigma, gamma, CutpointSpec(2.0, [0.3]), p0)
    xi = delta_to_xi(CutpointSpec(2.0, [0.3]), 4)
    # shifting every finite cut-point down by d is the same as shifting x'beta up by d
    shifted = xi - d
    b = np.diff(np.concatenate([[0.0], gal.cdf(shifted[1:4], gal.QuantileGalParams(0.5, sigma, gamma, p0)), [1.0]]))
    assert np.allclose(a, b, atol=1e-14)


def test_matrix_input_rows():
    X = np.array([[1.0, 0.2], [1.0, -0.5], [1.0, 1.5]])
    P = category_probabilities(X, [0.5, 1.0], 0.8, -0.3, CutpointSpec(2.0, [0.1]), 0.6)
    assert P.shape == (3, 4)
    for i in range(3):
        assert np.allclose(P[i], category_probabilities(X[i], [0.5, 1.0], 0.8, -0.3, CutpointSpec(2.0, [0.1]), 0.6))


@pytest.mark.parametrize("p0,gamma", [(0.25, 1.0), (0.5, -0.5), (0.75, -1.1)])
def test_loglik_matches_integrated_pdf(p0, gamma):
    rng = np.random.default_rng(0)
    X = np.column_stack([np.ones(6), rng.uniform(size=6)])
    y = np.array([1, 2, 3, 4, 2, 3])
    data = OrdinalDataset(X, y, 4)
    beta = np.array([1.0, 2.0])
    sigma = 0.9
    spec = CutpointSpec(2.0, [0.4])
    xi = delta_to_xi(spec, 4)
    q = gal.QuantileGalParams(0.0, 1.0, gamma, p0)
    total = 0.0
    for i in range(6):
        eta = X[i] @ beta
        lo, hi = (xi[y[i] - 1] - eta) / sigma, (xi[y[i]] - eta) / sigma
        total += math.log(integrate.quad(lambda t: gal.pdf(t, q), lo, hi, epsabs=1e-14, limit=200)[0])
    assert log_likelihood(beta, sigma, gamma, spec, data, p0) == pytest.approx(total, abs=1e-8)


def test_loglik_permutation_invariant():
    rng = np.random.default_rng(1)
    X = np.column_stack([np.ones(40), rng.normal(size=40)])
    y = rng.integers(1, 5, 40)
    perm = rng.permutation(40)
    args = ([0.3, 1.1], 1.4, -0.2, CutpointSpec(2.0, [0.2]))
    a = log_likelihood(*args, OrdinalDataset(X, y, 4), 0.4)
    b = log_likelihood(*args, OrdinalDataset(X[perm], y[perm], 4), 0.4)
    assert a == pytest.approx(b, rel=1e-13)


def test_loglik_impossible_observation_is_minus_inf():
    val = log_likelihood([1e4], 0.01, 0.0, CutpointSpec(2.0), single(1), 0.5)
    assert val == -np.inf


def test_loglik_dimension_mismatch():
    with pytest.raises(ValueError, match="shape"):
        log_likelihood([0.0, 1.0], 1.0, 0.0, CutpointSpec(2.0), single(1), 0.5)


# ---------------------------------------------------------------------------
# priors


def test_default_priors():
    pr = PriorConfig.default(3, 4)
    assert np.array_equal(pr.B0, 10 * np.eye(3))
    assert (pr.n0, pr.d0, pr.sb_a, pr.sb_b) == (5.0, 8.0, 4.0, 4.0)
    assert pr.delta0.shape == (1,) and np.array_equal(pr.D0, np.eye(1))


def test_beta_prior_mode():
    pr = PriorConfig(beta0=[1.0, -2.0], B0=np.diag([2.0, 0.5]))
    top = pr.log_beta([1.0, -2.0])
    for d in ([0.01, 0], [0, -0.01], [0.3, 0.3]):
        assert pr.log_beta(np.array([1.0, -2.0]) + d) < top
    assert top == pytest.approx(stats.multivariate_normal([1, -2], np.diag([2.0, 0.5])).logpdf([1, -2]), abs=1e-12)


def test_sigma_prior_is_inverse_gamma():
    pr = PriorConfig.default(1, 3)
    ref = stats.invgamma(2.5, scale=4.0)
    for s in (0.3, 1.0, 2.7, 9.0):
        assert pr.log_sigma(s) == pytest.approx(ref.logpdf(s), abs=1e-12)
    mode = pr.d0 / (pr.n0 + 2)
    h = 1e-5
    assert abs(pr.log_sigma(mode + h) - pr.log_sigma(mode - h)) / (2 * h) < 1e-6
    assert pr.log_sigma(-1.0) == -np.inf


def test_gamma_prior_midpoint():
    pr = PriorConfig.default(1, 3)
    L, U = gal.gamma_bounds(0.3)
    assert pr.log_gamma((L + U) / 2, 0.3) == pytest.approx(stats.beta(4, 4).logpdf(0.5) - math.log(U - L), abs=1e-12)


def test_log_prior_sum_and_support():
    pr = PriorConfig.default(2, 4)
    spec = CutpointSpec(2.0, [0.3])
    total = log_prior([0.1, 0.2], 1.5, 0.2, spec, pr, 0.5)
    parts = pr.log_beta([0.1, 0.2]) + pr.log_sigma(1.5) + pr.log_gamma(0.2, 0.5) + pr.log_delta([0.3])
    assert total == pytest.approx(parts, abs=1e-13)
    assert pr.log_delta([0.3]) == pytest.approx(stats.norm.logpdf(0.3), abs=1e-13)
    L, U = gal.gamma_bounds(0.5)
    assert log_prior([0.1, 0.2], 1.5, U + 0.01, spec, pr, 0.5) == -np.inf
    assert log_prior([0.1, 0.2], -1.0, 0.0, spec, pr, 0.5) == -np.inf


def test_log_prior_three_categories_has_no_delta_term():
    pr = PriorConfig.default(1, 3)
    total = log_prior([0.0], 1.0, 0.0, CutpointSpec(3.0), pr, 0.5)
    assert total == pytest.approx(pr.log_beta([0.0]) + pr.log_sigma(1.0) + pr.log_gamma(0.0, 0.5), abs=1e-14)
