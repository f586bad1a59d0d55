import numpy as np
import pytest

from legitgxe import GxEDataset


def make_data(n=500, k=1, s=1, beta=(3.0, 1.0, -1.0, 2.0), p=None, q=None, noise=0.5,
              seed=0, covariates=0):
    """Bernoulli(.3) genes, uniform environments, standard-form outcome."""
    rng = np.random.default_rng(seed)
    G = rng.binomial(1, 0.3, size=(n, k)).astype(float)
    E = rng.uniform(size=(n, s))
    p = np.full(k, 1.0 / k) if p is None else np.asarray(p, float)
    q = np.full(s, 1.0 / s) if q is None else np.asarray(q, float)
    g, e = G @ p, E @ q
    b0, be, bg, beg = beta
    y = b0 + be * e + bg * g + beg * e * g + noise * rng.normal(size=n)
    W = None
    if covariates:
        W = rng.normal(size=(n, covariates))
        y = y + W @ np.linspace(0.5, 1.5, covariates)
    return GxEDataset(y, G, E, W)


@pytest.fixture
def data_factory():
    return make_data


def three_sigma(p1, n1, p2, n2):
    """3 x the standard error of a difference of two proportions (pooled)."""
    pbar = (p1 * n1 + p2 * n2) / (n1 + n2)
    return 3.0 * np.sqrt(max(pbar * (1 - pbar), 1e-12) * (1 / n1 + 1 / n2))
