"""
Numerical substrate shared by every fitting routine.

Ordinary least squares with coefficient covariance, information criteria,
Student-t quantiles and seeded samplers for the simulation study.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

RANK_TOLERANCE = 1e-10


class DimensionError(ValueError):
    """Design has too few rows for the number of columns."""


class RankDeficientError(ValueError):
    """Design matrix is (numerically) not of full column rank."""

    def __init__(self, column: int, ratio: float):
        self.column = column
        self.ratio = ratio
        super().__init__(
            f"rank-deficient design: column {column} is linearly dependent "
            f"on the others (relative pivot {ratio:.3g})"
        )


@dataclass(frozen=True)
class OlsFit:
    """Result of an ordinary least squares fit.

    ``residual_variance`` is the unbiased RSS/(n-k); the log-likelihood uses
    the maximum-likelihood variance RSS/n.
    """

    coefficients: np.ndarray
    coefficient_covariance: np.ndarray
    residual_variance: float
    r_squared: float
    log_likelihood: float
    n_obs: int
    n_params: int
    rss: float

    @property
    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.coefficient_covariance))

    @property
    def df_resid(self) -> int:
        return self.n_obs - self.n_params


def gaussian_log_likelihood(rss: float, n_obs: int) -> float:
    """Profile Gaussian log-likelihood at the ML variance ``rss / n``."""
    with np.errstate(divide="ignore"):
        return float(-0.5 * n_obs * (np.log(2.0 * np.pi * rss / n_obs) + 1.0))


def ols_fit(design, response) -> OlsFit:
    """
    Fit ``response ~ design`` by least squares.

    Parameters
    ----------
    design : array_like, shape (n, k)
        Regressors; include a column of ones for an intercept.
    response : array_like, shape (n,)

    Returns
    -------
    OlsFit

    Raises
    ------
    DimensionError
        If ``n <= k``.
    RankDeficientError
        If a column is numerically dependent on the others; the exception
        carries the offending column index.
    """
    X = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.shape != (n,):
        raise DimensionError(f"response has shape {y.shape}, expected ({n},)")
    if n <= k:
        raise DimensionError(f"need more observations than columns (n={n}, k={k})")

    norms = np.linalg.norm(X, axis=0)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise RankDeficientError(int(zero[0]), 0.0)
    Q, R, piv = linalg.qr(X / norms, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    ratio = diag[-1] / diag[0]
    if ratio < RANK_TOLERANCE:
        raise RankDeficientError(int(piv[-1]), float(ratio))

    # solve in the scaled, pivoted basis then undo both transforms
    z = linalg.solve_triangular(R, Q.T @ y)
    Rinv = linalg.solve_triangular(R, np.eye(k))
    coef = np.empty(k)
    coef[piv] = z / norms[piv]
    unscaled = np.empty((k, k))
    unscaled[np.ix_(piv, piv)] = Rinv @ Rinv.T
    unscaled /= np.outer(norms, norms)

    resid = y - X @ coef
    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    if -1e-12 < r2 < 0.0:  # round-off when the fit explains nothing
        r2 = 0.0
    r2 = min(r2, 1.0)
    sigma2 = rss / (n - k)
    return OlsFit(
        coefficients=coef,
        coefficient_covariance=sigma2 * unscaled,
        residual_variance=sigma2,
        r_squared=float(r2),
        log_likelihood=gaussian_log_likelihood(rss, n),
        n_obs=n,
        n_params=k,
        rss=rss,
    )


def information_criteria(log_likelihood: float, n_params: int, n_obs: int) -> tuple[float, float]:
    """Return ``(aic, bic)``."""
    if n_obs < 1:
        raise ValueError("n_obs must be >= 1")
    aic = 2.0 * n_params - 2.0 * log_likelihood
    bic = n_params * np.log(n_obs) - 2.0 * log_likelihood
    return float(aic), float(bic)


def student_t_quantile(probability: float, df: float) -> float:
    """Inverse CDF of Student's t with ``df`` degrees of freedom."""
    if not 0.0 < probability < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {probability}")
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    return float(stats.t.ppf(probability, df))


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_bernoulli(theta: float, n: int, seed) -> np.ndarray:
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    rng = _generator(seed)
    return (rng.random(n) < theta).astype(float)


def sample_beta(alpha: float, beta: float, n: int, seed) -> np.ndarray:
    """Beta variates built as ``X / (X + Y)`` from two Gamma draws."""
    if alpha <= 0 or beta <= 0:
        raise ValueError(f"Beta shape parameters must be positive, got ({alpha}, {beta})")
    rng = _generator(seed)
    x = rng.standard_gamma(alpha, n)
    y = rng.standard_gamma(beta, n)
    return x / (x + y)


def sample_gaussian(sd: float, n: int, seed) -> np.ndarray:
    if sd < 0:
        raise ValueError(f"sd must be non-negative, got {sd}")
    rng = _generator(seed)
    return sd * rng.standard_normal(n)
