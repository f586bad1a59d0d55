"""
Latent genetic and environmental score models fitted by alternating optimization.

The model is

    g = G @ p,      e = E @ q,
    y = b0 + be * (e - c) + bg * g + beg * (e - c) * g + W @ gamma + noise

with ``sum(|p|) = 1`` and ``sum(|q|) = 1``.  Three parametrizations share one
fitting loop:

* no crossover: ``c = 0`` and ``bg`` is estimated (the standard G x E model);
* fixed crossover: ``bg`` is dropped and ``c`` is pinned.  The pin is an
  *anchor* point in the space of environment variables, ``c = q @ anchor``,
  so that ``e - c = (E - anchor) @ q`` stays invariant to rescaling ``q``.
  A scalar anchor ``a`` means every environment variable sits at ``a``, which
  gives ``c = a`` whenever the weights are non-negative;
* free crossover: ``bg`` is dropped and ``c`` is estimated as the negated
  coefficient of an extra intercept-like column in the environment step; it
  is left out of the ``sum(|q|) = 1`` normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import math

import numpy as np
from scipy import linalg

from .stats_core import OlsFit, information_criteria, ols_fit

CROSSOVER_GUARD = 100.0


class CrossoverDivergedError(RuntimeError):
    """The free crossover ran away; the interaction is likely too weak to locate."""


@dataclass(frozen=True)
class GxEDataset:
    """Outcome, gene matrix, environment matrix and optional covariates."""

    outcome: np.ndarray
    genes: np.ndarray
    environments: np.ndarray
    covariates: Optional[np.ndarray] = None
    gene_names: Sequence[str] = ()
    env_names: Sequence[str] = ()
    covariate_names: Sequence[str] = ()

    def __post_init__(self):
        y = np.asarray(self.outcome, dtype=float).ravel()
        G = _as_matrix(self.genes)
        E = _as_matrix(self.environments)
        W = None if self.covariates is None else _as_matrix(self.covariates)
        n = y.shape[0]
        if n < 1:
            raise ValueError("dataset needs at least one row")
        for name, M in (("genes", G), ("environments", E), ("covariates", W)):
            if M is None:
                continue
            if M.shape[0] != n:
                raise ValueError(f"{name} has {M.shape[0]} rows, outcome has {n}")
            if not np.all(np.isfinite(M)):
                raise ValueError(f"{name} contains missing or non-finite values")
        if not np.all(np.isfinite(y)):
            raise ValueError("outcome contains missing or non-finite values")
        if W is not None and W.shape[1] == 0:
            W = None
        object.__setattr__(self, "outcome", y)
        object.__setattr__(self, "genes", G)
        object.__setattr__(self, "environments", E)
        object.__setattr__(self, "covariates", W)
        object.__setattr__(self, "gene_names", tuple(self.gene_names) or tuple(f"g{j + 1}" for j in range(G.shape[1])))
        object.__setattr__(self, "env_names", tuple(self.env_names) or tuple(f"e{l + 1}" for l in range(E.shape[1])))
        m = 0 if W is None else W.shape[1]
        object.__setattr__(self, "covariate_names", tuple(self.covariate_names) or tuple(f"w{i + 1}" for i in range(m)))

    @property
    def n(self) -> int:
        return self.outcome.shape[0]

    @property
    def n_genes(self) -> int:
        return self.genes.shape[1]

    @property
    def n_envs(self) -> int:
        return self.environments.shape[1]

    @property
    def n_covariates(self) -> int:
        return 0 if self.covariates is None else self.covariates.shape[1]


def _as_matrix(a) -> np.ndarray:
    M = np.asarray(a, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2 or M.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {M.shape}")
    return M


@dataclass(frozen=True)
class LegitModel:
    beta0: float
    beta_e: float
    beta_g: float
    beta_eg: float
    gene_weights: np.ndarray
    env_weights: np.ndarray
    crossover: Optional[float]
    crossover_mode: str  # "none" | "fixed" | "free"
    beta_e_fixed_zero: bool
    covariate_coefs: np.ndarray
    diagnostics: OlsFit
    n_free_params: int
    iterations_used: int
    converged: bool
    r2_trace: tuple
    env_anchor: Optional[np.ndarray] = None
    crossover_se: Optional[float] = None
    crossover_se_conditional: Optional[float] = None
    aic: float = field(default=np.nan)
    bic: float = field(default=np.nan)

    @property
    def r_squared(self) -> float:
        return self.diagnostics.r_squared

    @property
    def log_likelihood(self) -> float:
        return self.diagnostics.log_likelihood

    @property
    def n_obs(self) -> int:
        return self.diagnostics.n_obs

    def gene_score(self, genes) -> np.ndarray:
        return _as_matrix(genes) @ self.gene_weights

    def env_score(self, environments) -> np.ndarray:
        return _as_matrix(environments) @ self.env_weights

    def coefficient_covariance(self, names=("beta_g", "beta_eg")) -> np.ndarray:
        """Sub-block of the main-model covariance for the named coefficients."""
        idx = [_main_columns(self.crossover_mode, self.beta_e_fixed_zero).index(nm) for nm in names]
        return self.diagnostics.coefficient_covariance[np.ix_(idx, idx)]


def _main_columns(mode: str, beta_e_zero: bool) -> list:
    cols = ["beta0"]
    if not beta_e_zero:
        cols.append("beta_e")
    if mode == "none":
        cols.append("beta_g")
    cols.append("beta_eg")
    return cols


def count_free_params(k: int, s: int, m: int, crossover_mode: str, beta_e_zero: bool) -> int:
    """Free mean parameters; the residual variance is not counted."""
    n = 1 + (0 if beta_e_zero else 1) + 1
    n += 1 if crossover_mode in ("none", "free") else 0
    return n + (k - 1) + (s - 1) + m


def _normalize(w: np.ndarray) -> tuple[np.ndarray, float]:
    """Scale ``w`` to unit L1 norm with its largest-magnitude entry positive.

    Returns the normalized vector and the signed factor it was divided by.
    """
    total = np.sum(np.abs(w))
    if not np.isfinite(total) or total == 0:
        raise FloatingPointError("weights collapsed to zero")
    if w[np.argmax(np.abs(w))] < 0:
        total = -total
    return w / total, float(total)


class _State:
    """Mutable working copy of the parameters inside the fitting loop."""

    def __init__(self, p, q, c, beta_e_zero, mode):
        self.p = p
        self.q = q
        self.c = c  # only used in free mode
        self.b0 = self.be = self.bg = self.beg = 0.0
        self.gamma = np.zeros(0)
        self.beta_e_zero = beta_e_zero
        self.mode = mode


def fit_legit(
    data: GxEDataset,
    crossover=None,
    beta_e_zero: bool = False,
    init=None,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> LegitModel:
    """
    Fit a LEGIT model by alternating least squares.

    Parameters
    ----------
    data : GxEDataset
    crossover : None, "free", float or array_like
        ``None`` fits the standard parametrization with ``beta_g``.
        ``"free"`` estimates the crossover point.  A number or a length-s
        vector fixes the crossover at that anchor (see module docstring).
    beta_e_zero : bool
        Strong model: the environment main effect is fixed at zero.
    init : tuple (p, q) or (p, q, c), optional
        Starting weights (and crossover for ``"free"``).  Defaults to equal
        weights; a free crossover without a start is initialized from the
        standard fit as ``-beta_g / beta_eg``.
    tol : float
        Stop when the main-model R^2 improves by less than this.
    max_iter : int

    Returns
    -------
    LegitModel
        ``converged`` is False if ``max_iter`` was exhausted.

    Raises
    ------
    CrossoverDivergedError
        If a free crossover leaves ``100 x`` the span of the environmental
        score.  Check that the interaction F-ratio is at least 1.
    RankDeficientError
        Propagated from any least-squares step.
    """
    y, G, E, W = data.outcome, data.genes, data.environments, data.covariates
    k, s, m = data.n_genes, data.n_envs, data.n_covariates

    if crossover is None:
        mode, anchor = "none", None
    elif isinstance(crossover, str):
        if crossover != "free":
            raise ValueError(f"unknown crossover specification {crossover!r}")
        mode, anchor = "free", None
    else:
        mode = "fixed"
        anchor = np.broadcast_to(np.asarray(crossover, dtype=float), (s,)).copy()

    c0 = 0.0
    if init is not None:
        p0 = np.asarray(init[0], dtype=float).copy()
        q0 = np.asarray(init[1], dtype=float).copy()
        if len(init) > 2 and init[2] is not None:
            c0 = float(init[2])
        if p0.shape != (k,) or q0.shape != (s,):
            raise ValueError("init weights do not match the number of genes/environments")
    else:
        p0 = np.full(k, 1.0 / k)
        q0 = np.full(s, 1.0 / s)

    if mode == "free" and (init is None or len(init) < 3 or init[2] is None):
        # restart strategy: locate the crossover from the standard parametrization first
        base = fit_legit(data, None, beta_e_zero, init=(p0, q0), tol=tol, max_iter=max_iter)
        if base.beta_eg == 0:
            raise CrossoverDivergedError("interaction estimate is exactly zero; no crossover to locate")
        p0, q0 = base.gene_weights.copy(), base.env_weights.copy()
        c0 = -base.beta_g / base.beta_eg

    p0, _ = _normalize(p0)
    q0, qscale = _normalize(q0)
    c0 = c0 / qscale

    st = _State(p0, q0, c0, beta_e_zero, mode)
    E_eff = E if anchor is None else E - anchor

    fit = _main_step(st, y, G, E_eff, W)
    trace = [fit.r_squared]
    converged = False
    cond_se = None
    it = 0
    for it in range(1, max_iter + 1):
        if k > 1:
            _gene_step(st, y, G, E_eff, W)
        if s > 1 or mode == "free":
            cond_se = _env_step(st, y, G, E_eff, W)
        fit = _main_step(st, y, G, E_eff, W)
        trace.append(fit.r_squared)
        if trace[-1] - trace[-2] < tol:
            converged = True
            break

    if mode == "none":
        c_out = None
    elif mode == "fixed":
        c_out = _anchored_crossover(st.q, anchor)
    else:
        c_out = float(st.c)

    joint_se = None
    if mode == "free":
        joint_se = _crossover_joint_se(st, fit, y, G, E, W)

    n_free = count_free_params(k, s, m, mode, beta_e_zero)
    aic, bic = information_criteria(fit.log_likelihood, n_free, data.n)
    return LegitModel(
        beta0=st.b0,
        beta_e=st.be,
        beta_g=st.bg,
        beta_eg=st.beg,
        gene_weights=st.p.copy(),
        env_weights=st.q.copy(),
        crossover=c_out,
        crossover_mode=mode,
        beta_e_fixed_zero=beta_e_zero,
        covariate_coefs=st.gamma.copy(),
        diagnostics=fit,
        n_free_params=n_free,
        iterations_used=it,
        converged=converged,
        r2_trace=tuple(trace),
        env_anchor=anchor,
        crossover_se=joint_se,
        crossover_se_conditional=cond_se,
        aic=aic,
        bic=bic,
    )


def _anchored_crossover(q: np.ndarray, anchor: np.ndarray) -> float:
    # a common anchor value is returned exactly when all weights share a sign
    if np.all(anchor == anchor[0]):
        return float(anchor[0]) * math.fsum(q) / math.fsum(np.abs(q))
    return float(q @ anchor)


def _centered_env(st: _State, E_eff) -> np.ndarray:
    e = E_eff @ st.q
    if st.mode == "free":
        e = e - st.c
    return e


def _main_step(st: _State, y, G, E_eff, W) -> OlsFit:
    g = G @ st.p
    e = _centered_env(st, E_eff)
    cols = [np.ones_like(y)]
    if not st.beta_e_zero:
        cols.append(e)
    if st.mode == "none":
        cols.append(g)
    cols.append(e * g)
    X = np.column_stack(cols if W is None else cols + [W])
    fit = ols_fit(X, y)
    b = fit.coefficients
    i = 0
    st.b0 = float(b[i]); i += 1
    if not st.beta_e_zero:
        st.be = float(b[i]); i += 1
    else:
        st.be = 0.0
    if st.mode == "none":
        st.bg = float(b[i]); i += 1
    else:
        st.bg = 0.0
    st.beg = float(b[i]); i += 1
    st.gamma = b[i:].copy()
    return fit


def _covariate_part(st: _State, W, n) -> np.ndarray:
    return np.zeros(n) if W is None else W @ st.gamma


def _gene_step(st: _State, y, G, E_eff, W) -> None:
    e = _centered_env(st, E_eff)
    offset = st.b0 + st.be * e + _covariate_part(st, W, y.shape[0])
    slope = st.bg + st.beg * e
    raw = ols_fit(slope[:, None] * G, y - offset).coefficients
    st.p, scale = _normalize(raw)
    st.bg *= scale
    st.beg *= scale


def _env_step(st: _State, y, G, E_eff, W) -> Optional[float]:
    """Refit q (and c when free); return the conditional SE of c, if any."""
    g = G @ st.p
    offset = st.b0 + st.bg * g + _covariate_part(st, W, y.shape[0])
    slope = st.be + st.beg * g
    X = slope[:, None] * E_eff
    if st.mode == "free":
        X = np.column_stack([X, slope])
    fit = ols_fit(X, y - offset)
    raw = fit.coefficients
    s = E_eff.shape[1]
    st.q, scale = _normalize(raw[:s])
    st.be *= scale
    st.beg *= scale
    if st.mode != "free":
        return None
    st.c = -raw[s] / scale
    score = E_eff @ st.q
    span = float(np.ptp(score)) or 1.0
    if not np.isfinite(st.c) or abs(st.c) > CROSSOVER_GUARD * span:
        raise CrossoverDivergedError(
            f"crossover diverged (c = {st.c:.4g}); the interaction is probably too weak "
            "to estimate, check that its F-ratio is at least 1"
        )
    return float(np.sqrt(fit.coefficient_covariance[s, s]) / abs(scale))


def _tangent_basis(w: np.ndarray) -> np.ndarray:
    """Directions that keep ``sum(|w|)`` fixed to first order."""
    if w.shape[0] == 1:
        return np.zeros((1, 0))
    return linalg.null_space(np.sign(w)[None, :])


def _crossover_joint_se(st: _State, fit: OlsFit, y, G, E, W) -> float:
    """Standard error of a free crossover from the full nonlinear least-squares Jacobian."""
    g = G @ st.p
    e = E @ st.q - st.c
    slope_e = st.be + st.beg * g
    cols = [np.ones_like(y)]
    if not st.beta_e_zero:
        cols.append(e)
    cols.append(e * g)
    cols.append(-slope_e)  # d/dc
    c_index = len(cols) - 1
    blocks = [np.column_stack(cols)]
    blocks.append(((st.beg * e)[:, None] * G) @ _tangent_basis(st.p))
    blocks.append((slope_e[:, None] * E) @ _tangent_basis(st.q))
    if W is not None:
        blocks.append(W)
    J = np.hstack(blocks)
    dof = y.shape[0] - J.shape[1]
    sigma2 = fit.rss / dof
    cov = sigma2 * np.linalg.pinv(J.T @ J)
    return float(np.sqrt(cov[c_index, c_index]))


def predict(model: LegitModel, data: GxEDataset) -> np.ndarray:
    """Fitted mean for ``data`` using the stored weights and coefficients."""
    if data.n_genes != model.gene_weights.shape[0] or data.n_envs != model.env_weights.shape[0]:
        raise ValueError(
            f"dataset has {data.n_genes} genes / {data.n_envs} environments, model expects "
            f"{model.gene_weights.shape[0]} / {model.env_weights.shape[0]}"
        )
    g = data.genes @ model.gene_weights
    e = data.environments @ model.env_weights - (model.crossover or 0.0)
    out = model.beta0 + model.beta_e * e + model.beta_g * g + model.beta_eg * e * g
    if model.covariate_coefs.size:
        if data.n_covariates != model.covariate_coefs.shape[0]:
            raise ValueError("covariate count does not match the model")
        out = out + data.covariates @ model.covariate_coefs
    return out
