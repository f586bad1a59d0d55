"""
Competitive-confirmatory classification of the G x E pattern.

Six G x E models (vantage sensitivity, differential susceptibility and
diathesis-stress, each weak or strong) compete by BIC against four models
without an interaction.  Vantage sensitivity pins the crossover at the low
end of the environmental score, diathesis-stress at the high end and
differential susceptibility estimates it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .legit import CrossoverDivergedError, GxEDataset, LegitModel, fit_legit
from .ros import (DIATHESIS_STRESS, DIFFERENTIAL_SUSCEPTIBILITY, NO_EVIDENCE,
                  VANTAGE_SENSITIVITY)
from .stats_core import (DimensionError, OlsFit, RankDeficientError,
                         information_criteria, ols_fit, student_t_quantile)

GXE_MODELS = ("vs_weak", "vs_strong", "ds_weak", "ds_strong", "dst_weak", "dst_strong")
NULL_MODELS = ("intercept_only", "genes_only", "envs_only", "genes_and_envs")

DISPLAY_NAMES = {
    "vs_weak": "Vantage sensitivity WEAK",
    "vs_strong": "Vantage sensitivity STRONG",
    "ds_weak": "Differential susceptibility WEAK",
    "ds_strong": "Differential susceptibility STRONG",
    "dst_weak": "Diathesis-stress WEAK",
    "dst_strong": "Diathesis-stress STRONG",
    "intercept_only": "Intercept only",
    "genes_only": "Genes only",
    "envs_only": "Environments only",
    "genes_and_envs": "Genes and environments",
}

PATTERN_OF = {
    "vs": VANTAGE_SENSITIVITY,
    "ds": DIFFERENTIAL_SUSCEPTIBILITY,
    "dst": DIATHESIS_STRESS,
}

TABLE_COLUMNS = ("BIC", "crossover", "crossover 95%", "Within observable range?")

_FIT_ERRORS = (CrossoverDivergedError, RankDeficientError, DimensionError, FloatingPointError)


def pattern_of(key: str) -> str:
    """Interaction pattern label of a G x E model key, or NO_EVIDENCE for a null model."""
    if key in NULL_MODELS:
        return NO_EVIDENCE
    return PATTERN_OF[key.rsplit("_", 1)[0]]


@dataclass(frozen=True)
class NullFit:
    key: str
    fit: OlsFit
    n_free_params: int
    aic: float
    bic: float


@dataclass
class CompetitiveModelSet:
    gxe: dict
    nulls: dict
    errors: dict
    standard: Optional[LegitModel]
    low_anchor: np.ndarray
    high_anchor: np.ndarray
    bound_mode: str
    n_obs: int
    notes: dict = field(default_factory=dict)

    @property
    def c_low(self) -> float:
        """Low crossover at the weights of the weak vantage-sensitivity fit."""
        m = self.gxe.get("vs_weak")
        return float(m.crossover) if m is not None else float("nan")

    @property
    def c_high(self) -> float:
        m = self.gxe.get("dst_weak")
        return float(m.crossover) if m is not None else float("nan")

    def members(self):
        """Yield ``(key, bic, n_free_params)`` for every successful fit."""
        for key, m in self.gxe.items():
            yield key, m.bic, m.n_free_params
        for key, m in self.nulls.items():
            yield key, m.bic, m.n_free_params


def _anchor(value, s: int, what: str) -> np.ndarray:
    a = np.broadcast_to(np.asarray(value, dtype=float), (s,)).copy()
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} must be finite")
    return a


def _null_fits(data: GxEDataset) -> dict:
    y, n = data.outcome, data.n
    ones = np.ones((n, 1))
    W = data.covariates
    designs = {
        "intercept_only": [ones],
        "genes_only": [ones, data.genes],
        "envs_only": [ones, data.environments],
        "genes_and_envs": [ones, data.genes, data.environments],
    }
    out = {}
    for key, blocks in designs.items():
        X = np.hstack(blocks if W is None else blocks + [W])
        fit = ols_fit(X, y)
        # a latent score with sum(|w|) = 1 and its coefficient span the same
        # space as the unconstrained columns, so the counts coincide
        k = X.shape[1]
        aic, bic = information_criteria(fit.log_likelihood, k, n)
        out[key] = NullFit(key, fit, k, aic, bic)
    return out


def fit_competitive_set(
    data: GxEDataset,
    include_null_models: bool = True,
    bound_mode: str = "expected",
    env_min=None,
    env_max=None,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> CompetitiveModelSet:
    """
    Fit the six G x E models and, optionally, the four null models.

    Parameters
    ----------
    data : GxEDataset
    include_null_models : bool
        Off reproduces the variant that assumes an interaction is present.
    bound_mode : {"expected", "observed"}
        ``"expected"`` pins the vantage-sensitivity / diathesis-stress
        crossovers at the score reached when every environment variable sits
        at its theoretical minimum / maximum (``env_min`` / ``env_max``,
        scalars or per-variable; 0 and 100 under POMP coding).  When they are
        not given the per-variable sample extremes are used.  ``"observed"``
        pins them at the observed extremes of the environmental score.
    env_min, env_max : float or array_like, optional

    Returns
    -------
    CompetitiveModelSet
        Member fits that fail are listed in ``errors`` instead.
    """
    s = data.n_envs
    E = data.environments
    errors = {}

    fits = {}
    standard = {}
    for strong in (False, True):
        tag = "strong" if strong else "weak"
        try:
            standard[tag] = fit_legit(data, None, strong, tol=tol, max_iter=max_iter)
        except _FIT_ERRORS as exc:
            errors[f"standard_{tag}"] = str(exc)

    if bound_mode == "expected":
        low = _anchor(E.min(axis=0) if env_min is None else env_min, s, "env_min")
        high = _anchor(E.max(axis=0) if env_max is None else env_max, s, "env_max")
    elif bound_mode == "observed":
        ref = standard.get("weak")
        q = ref.env_weights if ref is not None else np.full(s, 1.0 / s)
        score = E @ q
        low = E[np.argmin(score)].copy()
        high = E[np.argmax(score)].copy()
    else:
        raise ValueError(f"bound_mode must be 'expected' or 'observed', got {bound_mode!r}")

    for strong in (False, True):
        tag = "strong" if strong else "weak"
        base = standard.get(tag)
        init = None if base is None else (base.gene_weights, base.env_weights)
        specs = {f"vs_{tag}": low, f"dst_{tag}": high}
        for key, anchor in specs.items():
            try:
                fits[key] = fit_legit(data, anchor, strong, init=init, tol=tol, max_iter=max_iter)
            except _FIT_ERRORS as exc:
                errors[key] = str(exc)
        key = f"ds_{tag}"
        try:
            if base is None:
                raise CrossoverDivergedError("standard fit failed; no starting crossover")
            if base.beta_eg == 0:
                raise CrossoverDivergedError("interaction estimate is exactly zero")
            c0 = -base.beta_g / base.beta_eg
            fits[key] = fit_legit(data, "free", strong, init=(*init, c0), tol=tol, max_iter=max_iter)
        except _FIT_ERRORS as exc:
            errors[key] = str(exc)

    ordered = {k: fits[k] for k in GXE_MODELS if k in fits}
    nulls = _null_fits(data) if include_null_models else {}
    return CompetitiveModelSet(
        gxe=ordered,
        nulls=nulls,
        errors=errors,
        standard=standard.get("weak"),
        low_anchor=low,
        high_anchor=high,
        bound_mode=bound_mode,
        n_obs=data.n,
    )


def crossover_from_coefficients(beta_g: float, beta_eg: float) -> float:
    if beta_eg == 0:
        raise ZeroDivisionError("no crossover: interaction effect is nil (beta_eg = 0)")
    return -beta_g / beta_eg


def crossover_interval(model: LegitModel, level: float = 0.95, se: str = "joint") -> tuple:
    """
    Confidence interval ``c +/- t * SE(c)`` for a free crossover.

    ``se="joint"`` takes the standard error from the Jacobian of the whole
    model at convergence; ``se="conditional"`` uses the last environment
    step with every other parameter held fixed.  Degrees of freedom are
    ``n - n_free_params``.
    """
    if model.crossover_mode != "free":
        raise ValueError("crossover interval needs a model with a free crossover")
    if not model.converged:
        raise ValueError("crossover interval requested for a non-converged fit")
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    sd = model.crossover_se if se == "joint" else model.crossover_se_conditional
    if sd is None:
        raise ValueError(f"no {se} standard error stored on the model")
    df = model.n_obs - model.n_free_params
    t = student_t_quantile(1.0 - (1.0 - level) / 2.0, df)
    return (model.crossover - t * sd, model.crossover + t * sd)


def proportion_affected(env_scores, c: float) -> float:
    """Fraction of environmental scores strictly below the crossover."""
    scores = np.asarray(env_scores, dtype=float)
    if scores.size == 0:
        raise ValueError("need at least one score")
    return float(np.mean(scores < c))


def interaction_f_ratio(data: GxEDataset, tol: float = 1e-8, max_iter: int = 100) -> float:
    """F statistic of the interaction term of the standard LEGIT model.

    Compares it with the additive genes-and-environments model.  Competitive
    testing is usually reserved for data with F >= 1.
    """
    full = fit_legit(data, None, False, tol=tol, max_iter=max_iter)
    reduced = _null_fits(data)["genes_and_envs"]
    df_num = full.n_free_params - reduced.n_free_params
    df_den = data.n - full.n_free_params
    rss1 = full.diagnostics.rss
    rss0 = reduced.fit.rss
    return float(((rss0 - rss1) / df_num) / (rss1 / df_den))


@dataclass(frozen=True)
class TableRow:
    key: str
    name: str
    bic: float
    aic: float
    n_free_params: int
    crossover: Optional[float]
    interval: Optional[tuple]
    within_range: Optional[bool]


@dataclass(frozen=True)
class GxEClassification:
    label: str
    strength: Optional[str]
    best_model: str
    crossover: Optional[float]
    crossover_interval: Optional[tuple]
    within_observable_range: Optional[bool]
    proportion_affected: float
    table: tuple

    def format_table(self, digits: int = 6) -> str:
        """Plain-text rendering of the model table, one row per fit sorted by BIC."""
        rows = [("", *TABLE_COLUMNS)]
        for r in self.table:
            rows.append((r.name, *table_cells(r, digits)))
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
        return "\n".join(lines)


def _fmt(x: float, digits: int) -> str:
    return f"{x:.{digits}g}"


def table_cells(row: TableRow, digits: int = 6) -> tuple:
    """String cells for the four output columns of a table row."""
    bic = _fmt(row.bic, digits)
    cross = "" if row.crossover is None else _fmt(row.crossover, digits)
    ci = "" if row.interval is None else f"({_fmt(row.interval[0], digits)} / {_fmt(row.interval[1], digits)})"
    within = "" if row.within_range is None else ("Yes" if row.within_range else "No")
    return bic, cross, ci, within


def _sort_key(key: str, bic: float, n_params: int):
    # BIC ties: fewer parameters first, then fixed crossovers before free ones
    return (bic, n_params, key.startswith("ds_"))


def classify(model_set: CompetitiveModelSet, data: GxEDataset, level: float = 0.95) -> GxEClassification:
    """
    Decide the interaction pattern from a fitted model set.

    A null model with the lowest BIC means no evidence of G x E.  A
    differential-susceptibility winner is accepted only if its crossover
    interval lies inside the observed range of its environmental score;
    otherwise the best of the vantage-sensitivity and diathesis-stress fits
    decides.  Weak/strong is reported but never changes the label.
    """
    members = sorted(model_set.members(), key=lambda t: _sort_key(*t))
    if not members:
        raise ValueError("model set is empty")

    rows = []
    ds_checks = {}
    for key, bic, npar in members:
        if key in model_set.gxe:
            m = model_set.gxe[key]
            interval = within = None
            if m.crossover_mode == "free":
                try:
                    interval = crossover_interval(m, level)
                    score = m.env_score(data.environments)
                    within = bool(score.min() <= interval[0] and interval[1] <= score.max())
                except ValueError:
                    interval, within = None, False
                ds_checks[key] = within
            rows.append(TableRow(key, DISPLAY_NAMES[key], bic, m.aic, npar, m.crossover, interval, within))
        else:
            nf = model_set.nulls[key]
            rows.append(TableRow(key, DISPLAY_NAMES[key], bic, nf.aic, npar, None, None, None))

    best_key = members[0][0]
    gxe_ranked = [k for k, _, _ in members if k in model_set.gxe]
    best_gxe = gxe_ranked[0] if gxe_ranked else None

    if best_key in model_set.nulls:
        label, chosen = NO_EVIDENCE, best_key
    elif best_key.startswith("ds_") and ds_checks.get(best_key):
        label, chosen = DIFFERENTIAL_SUSCEPTIBILITY, best_key
    else:
        fixed = [k for k in gxe_ranked if not k.startswith("ds_")]
        if fixed:
            chosen = fixed[0]
            label = pattern_of(chosen)
        else:
            label, chosen = NO_EVIDENCE, best_key

    strength = chosen.rsplit("_", 1)[1] if chosen in model_set.gxe else None
    ref = model_set.gxe.get(chosen) or (model_set.gxe.get(best_gxe) if best_gxe else None)
    if ref is not None and ref.crossover is not None:
        pa = proportion_affected(ref.env_score(data.environments), ref.crossover)
        cross = ref.crossover
    else:
        pa, cross = float("nan"), None
    row = next((r for r in rows if r.key == chosen), None)
    return GxEClassification(
        label=label,
        strength=strength,
        best_model=chosen,
        crossover=cross,
        crossover_interval=row.interval if row is not None else None,
        within_observable_range=row.within_range if row is not None else None,
        proportion_affected=pa,
        table=tuple(rows),
    )
