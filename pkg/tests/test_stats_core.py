import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from legitgxe.stats_core import (DimensionError, RankDeficientError, gaussian_log_likelihood,
                                 information_criteria, ols_fit, sample_bernoulli, sample_beta,
                                 sample_gaussian, student_t_quantile)


# -- independent oracles --------------------------------------------------------

def _t_pdf(x, df):
    logc = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(logc - (df + 1) / 2 * math.log1p(x * x / df))


def _t_cdf(x, df):
    # symmetric density: F(x) = 1/2 + integral from 0 to x
    val, _ = integrate.quad(_t_pdf, 0.0, x, args=(df,), epsabs=1e-14, epsrel=1e-13, limit=200)
    return 0.5 + val


def _bisect_quantile(p, df, lo=0.0, hi=50.0):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- ols_fit --------------------------------------------------------------------

def test_intercept_only_identity():
    fit = ols_fit(np.ones((3, 1)), [1.0, 1.0, 1.0])
    assert fit.coefficients == pytest.approx([1.0])
    assert fit.r_squared == 0.0


def test_exact_line():
    fit = ols_fit([[1, 1], [1, 2], [1, 3]], [2, 4, 6])
    np.testing.assert_allclose(fit.coefficients, [0, 2], atol=1e-12)
    assert fit.residual_variance == pytest.approx(0.0, abs=1e-20)
    assert fit.r_squared == pytest.approx(1.0)


def test_normal_equations_oracle():
    rng = np.random.default_rng(7)
    X = np.column_stack([np.ones(50), rng.normal(size=(50, 3))])
    y = X @ np.array([1.0, -2.0, 0.5, 3.0]) + rng.normal(scale=0.3, size=50)
    fit = ols_fit(X, y)
    # oracle: solve the normal equations directly
    beta = np.linalg.solve(X.T @ X, X.T @ y)
    np.testing.assert_allclose(fit.coefficients, beta, atol=1e-10)
    resid = y - X @ beta
    s2 = resid @ resid / (50 - 4)
    np.testing.assert_allclose(fit.coefficient_covariance, s2 * np.linalg.inv(X.T @ X), rtol=1e-9)
    assert fit.residual_variance == pytest.approx(s2, rel=1e-10)
    assert fit.n_obs == 50 and fit.n_params == 4 and fit.df_resid == 46


def test_log_likelihood_hand_computation():
    rng = np.random.default_rng(1)
    X = np.column_stack([np.ones(30), rng.normal(size=30)])
    y = rng.normal(size=30)
    fit = ols_fit(X, y)
    n = 30
    sigma2 = fit.rss / n
    resid = y - X @ fit.coefficients
    ll = np.sum(-0.5 * np.log(2 * np.pi * sigma2) - resid**2 / (2 * sigma2))
    assert fit.log_likelihood == pytest.approx(ll, rel=1e-12)
    assert gaussian_log_likelihood(fit.rss, n) == pytest.approx(ll, rel=1e-12)


def test_rank_deficient_names_column():
    rng = np.random.default_rng(0)
    a = rng.normal(size=20)
    X = np.column_stack([np.ones(20), a, 2 * a])
    with pytest.raises(RankDeficientError) as info:
        ols_fit(X, rng.normal(size=20))
    assert info.value.column in (1, 2)
    assert "column" in str(info.value)


def test_too_few_rows():
    with pytest.raises(DimensionError):
        ols_fit(np.ones((2, 2)) + np.eye(2), [1.0, 2.0])


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        ols_fit(np.ones((5, 1)), np.ones(4))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(8, 60), k=st.integers(1, 5), seed=st.integers(0, 2**31 - 1))
def test_residuals_orthogonal_to_design(n, k, seed):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.normal(size=(n, k - 1))]) if k > 1 else np.ones((n, 1))
    y = rng.normal(size=n) * rng.uniform(0.1, 10)
    fit = ols_fit(X, y)
    r = y - X @ fit.coefficients
    assert np.max(np.abs(X.T @ r)) <= 1e-8 * max(1.0, np.abs(y).sum())
    assert 0.0 <= fit.r_squared <= 1.0
    V = fit.coefficient_covariance
    np.testing.assert_allclose(V, V.T, atol=1e-14)
    assert np.linalg.eigvalsh(V).min() >= -1e-12 * max(1.0, np.abs(V).max())


# -- information criteria ---------------------------------------------------------

def test_information_criteria_formulas():
    aic, bic = information_criteria(0.0, 2, 100)
    assert aic == pytest.approx(4.0)
    assert bic == pytest.approx(9.2103, abs=1e-4)
    assert information_criteria(-10.0, 1, 1) == pytest.approx((22.0, 20.0))


@given(ll=st.floats(-1e4, 1e4), k=st.integers(1, 50), n=st.integers(1, 10**6))
def test_bic_step_is_log_n(ll, k, n):
    _, b1 = information_criteria(ll, k, n)
    _, b2 = information_criteria(ll, k + 1, n)
    assert b2 - b1 == pytest.approx(math.log(n), abs=1e-8)


def test_information_criteria_domain():
    with pytest.raises(ValueError):
        information_criteria(0.0, 1, 0)


# -- t quantiles ------------------------------------------------------------------

def test_t_quantile_median_is_zero():
    for df in (1, 3, 30, 1000):
        assert student_t_quantile(0.5, df) == pytest.approx(0.0, abs=1e-12)


def test_t_quantile_quadrature_oracle():
    q = student_t_quantile(0.975, 10)
    assert _t_cdf(q, 10) == pytest.approx(0.975, abs=1e-10)
    assert q == pytest.approx(2.2281, abs=1e-4)


def test_t_quantile_bisection_oracle_small_alpha():
    q = student_t_quantile(0.99995, 200)
    assert q == pytest.approx(_bisect_quantile(0.99995, 200), abs=1e-6)


def test_t_quantile_gaussian_limit():
    assert student_t_quantile(0.975, 10**6) == pytest.approx(1.959964, abs=1e-3)


@given(p=st.floats(1e-6, 1 - 1e-6), df=st.integers(1, 5000))
def test_t_quantile_antisymmetric(p, df):
    assert student_t_quantile(p, df) == pytest.approx(-student_t_quantile(1 - p, df), abs=1e-10, rel=1e-10)


@given(p1=st.floats(0.01, 0.98), dp=st.floats(1e-3, 0.01), df=st.integers(1, 500))
def test_t_quantile_monotone(p1, dp, df):
    assert student_t_quantile(p1 + dp, df) > student_t_quantile(p1, df)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_t_quantile_domain(p):
    with pytest.raises(ValueError):
        student_t_quantile(p, 10)


# -- samplers ----------------------------------------------------------------------

def test_bernoulli_degenerate():
    assert np.all(sample_bernoulli(0.0, 500, 3) == 0)
    assert np.all(sample_bernoulli(1.0, 500, 3) == 1)


def test_bernoulli_frequency():
    x = sample_bernoulli(0.30, 100_000, 11)
    assert set(np.unique(x)) <= {0.0, 1.0}
    assert x.mean() == pytest.approx(0.30, abs=0.01)


@pytest.mark.parametrize("a, b, mean", [(2, 2, 0.5), (2, 4, 1 / 3)])
def test_beta_mean(a, b, mean):
    x = sample_beta(a, b, 100_000, 5)
    assert np.all((x > 0) & (x < 1))
    assert x.mean() == pytest.approx(mean, abs=0.01)
    var = a * b / ((a + b) ** 2 * (a + b + 1))
    assert x.var() == pytest.approx(var, rel=0.05)


def test_gaussian_moments():
    x = sample_gaussian(2.5, 100_000, 9)
    assert x.mean() == pytest.approx(0.0, abs=3 * 2.5 / math.sqrt(100_000))
    assert x.std() == pytest.approx(2.5, rel=0.02)
    assert np.all(sample_gaussian(0.0, 10, 1) == 0)


@pytest.mark.parametrize("draw", [
    lambda s: sample_bernoulli(0.3, 100, s),
    lambda s: sample_beta(2, 4, 100, s),
    lambda s: sample_gaussian(1.0, 100, s),
])
def test_samplers_reproducible(draw):
    np.testing.assert_array_equal(draw(42), draw(42))
    np.testing.assert_array_equal(draw(np.random.SeedSequence([1, 2])), draw(np.random.SeedSequence([1, 2])))
    assert not np.array_equal(draw(42), draw(43))


@pytest.mark.parametrize("call", [
    lambda: sample_bernoulli(1.2, 5, 0),
    lambda: sample_bernoulli(-0.1, 5, 0),
    lambda: sample_beta(0.0, 2.0, 5, 0),
    lambda: sample_beta(2.0, -1.0, 5, 0),
    lambda: sample_gaussian(-1.0, 5, 0),
    lambda: sample_gaussian(1.0, -5, 0),
])
def test_sampler_domain_errors(call):
    with pytest.raises(ValueError):
        call()
