"""
Regions of significance for the genetic simple slope (Johnson-Neyman).

The simple slope of the genetic score at environment value ``e`` is
``bg + beg * e`` with variance ``Vg + e^2 Veg + 2 e Cov``.  The bounds are the
roots of ``(bg + beg e)^2 - t^2 (Vg + e^2 Veg + 2 e Cov) = 0``.  Weights of a
LEGIT model are treated as known.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .legit import LegitModel
from .stats_core import student_t_quantile

DIFFERENTIAL_SUSCEPTIBILITY = "differential susceptibility"
DIATHESIS_STRESS = "diathesis-stress"
VANTAGE_SENSITIVITY = "vantage sensitivity"
NO_EVIDENCE = "no evidence of G×E"


@dataclass(frozen=True)
class SimpleSlope:
    slope: float
    variance: float
    t_stat: float


@dataclass(frozen=True)
class RoSResult:
    """Johnson-Neyman bounds.

    ``region`` tells where the slope is significant:

    * ``"outside"``: for ``e < lower`` and ``e > upper`` (the usual case);
    * ``"inside"``: only between the two roots, which are then reported in
      ``roots`` while ``lower``/``upper`` stay ``None``;
    * ``"everywhere"`` / ``"nowhere"``: no real roots.
    """

    lower: Optional[float]
    upper: Optional[float]
    alpha: float
    df: int
    t_crit: float
    region: str
    roots: tuple = ()
    observable_range: Optional[tuple] = None
    label: Optional[str] = None


def _slope_inputs(model: LegitModel):
    if model.crossover_mode != "none":
        raise ValueError("simple slopes need the standard parametrization (no crossover term)")
    V = model.coefficient_covariance(("beta_g", "beta_eg"))
    return model.beta_g, model.beta_eg, V[0, 0], V[1, 1], V[0, 1]


def simple_slope(model: LegitModel, e_value: float) -> SimpleSlope:
    bg, beg, vg, veg, cov = _slope_inputs(model)
    slope = bg + beg * e_value
    var = vg + e_value**2 * veg + 2.0 * e_value * cov
    if not var > 0:
        raise ValueError(
            f"non-positive simple-slope variance {var:.3g} at e={e_value}; "
            "the beta_g/beta_eg coefficient covariance matrix is not positive definite"
        )
    return SimpleSlope(slope, var, slope / np.sqrt(var))


def ros_df(model: LegitModel, convention: str = "residual") -> int:
    """Degrees of freedom for the slope t-test.

    ``"residual"`` is n minus the main-model mean parameters; ``"reduced"``
    subtracts one more (n - 5 for a four-parameter model).
    """
    df = model.diagnostics.df_resid
    if convention == "reduced":
        return df - 1
    if convention != "residual":
        raise ValueError(f"unknown df convention {convention!r}")
    return df


def ros_bounds(model: LegitModel, alpha: float, df: Optional[int] = None) -> RoSResult:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if df is None:
        df = ros_df(model)
    bg, beg, vg, veg, cov = _slope_inputs(model)
    t = student_t_quantile(1.0 - alpha / 2.0, df)
    t2 = t * t
    a = beg**2 - t2 * veg
    b = 2.0 * (bg * beg - t2 * cov)
    c = bg**2 - t2 * vg

    scale = max(beg**2, t2 * veg)
    if scale < 1e-300:
        raise ValueError("no interaction to probe: beta_eg and its variance are both zero")

    def result(lower, upper, region, roots=()):
        return RoSResult(lower, upper, alpha, int(df), t, region, roots)

    if abs(a) <= 1e-12 * scale:
        # linear in e: one boundary, significance on one side
        if b == 0:
            return result(None, None, "everywhere" if c >= 0 else "nowhere")
        root = -c / b
        return result(root, None, "outside") if b < 0 else result(None, root, "outside")

    disc = b * b - 4.0 * a * c
    if disc < 0:
        # no sign change: the value at e = 0 decides
        return result(None, None, "everywhere" if c > 0 else "nowhere")
    sq = np.sqrt(disc)
    # numerically stable pair of roots
    qv = -0.5 * (b + np.copysign(sq, b))
    r1, r2 = sorted((qv / a, c / qv if qv != 0 else -b / (2 * a)))
    if a > 0:
        return result(r1, r2, "outside", (r1, r2))
    return result(None, None, "inside", (r1, r2))


def _within(x: Optional[float], lo: float, hi: float) -> bool:
    return x is not None and lo <= x <= hi


def classify_ros(bounds: RoSResult, observable_range: tuple) -> str:
    """Map the bounds onto an interaction pattern given the observed environment range."""
    lo, hi = observable_range
    if bounds.region != "outside":
        return NO_EVIDENCE
    has_l = _within(bounds.lower, lo, hi)
    has_u = _within(bounds.upper, lo, hi)
    if has_l and has_u:
        return DIFFERENTIAL_SUSCEPTIBILITY
    if has_l:
        return DIATHESIS_STRESS
    if has_u:
        return VANTAGE_SENSITIVITY
    return NO_EVIDENCE


def default_alpha(n_genes: int, n_envs: int) -> float:
    if n_genes < 1 or n_envs < 1:
        raise ValueError("need at least one gene and one environment")
    return 0.05 if n_genes == 1 and n_envs == 1 else 1e-4


def regions_of_significance(model: LegitModel, environments, alpha: Optional[float] = None,
                            df_convention: str = "residual") -> RoSResult:
    """Bounds, observed range of the environmental score and the resulting label."""
    score = model.env_score(environments)
    rng = (float(score.min()), float(score.max()))
    if alpha is None:
        alpha = default_alpha(model.gene_weights.shape[0], model.env_weights.shape[0])
    res = ros_bounds(model, alpha, ros_df(model, df_convention))
    return RoSResult(res.lower, res.upper, res.alpha, res.df, res.t_crit, res.region,
                     res.roots, rng, classify_ros(res, rng))
