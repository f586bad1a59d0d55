"""
Monte Carlo accuracy study for the two classification approaches.

Data follow ``y = 3 + be (e - c) + 2 (e - c) g + noise`` with Bernoulli(.30)
genes, Beta(2, b) environments and equal true weights inside the latent
scores.  The noise SD is solved per replicate so the population R^2 hits the
target effect size.  Null replicates drop the interaction from the same
family, ``y = 3 + e + noise``; a gene main effect can be added through
``Scenario.null_gene_effect``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .competitive import GXE_MODELS, classify, fit_competitive_set, pattern_of
from .legit import GxEDataset, LegitModel, fit_legit
from .ros import (DIATHESIS_STRESS, DIFFERENTIAL_SUSCEPTIBILITY, NO_EVIDENCE,
                  VANTAGE_SENSITIVITY, regions_of_significance)
from .stats_core import sample_bernoulli, sample_beta, sample_gaussian

EFFECT_R2 = {
    "single": {"small": 0.05, "medium": 0.10, "large": 0.15},
    "multi": {"small": 0.10, "medium": 0.20, "large": 0.40},
}
METHODS = ("competitive", "ros")
NULL_MODEL = "null"

BETA0 = 3.0
BETA_EG = 2.0

LABEL_CODES = {
    VANTAGE_SENSITIVITY: "vs",
    DIFFERENTIAL_SUSCEPTIBILITY: "ds",
    DIATHESIS_STRESS: "dst",
    NO_EVIDENCE: "none",
}
PREDICTED_CODES = ("vs", "ds", "dst", "none", "error")


@dataclass(frozen=True)
class Scenario:
    """One cell of the simulation grid.

    ``generative_model`` is one of the six G x E keys or ``"null"``; left as
    ``None`` a study runs all six plus the null model for the cell.
    """

    n_genes: int = 1
    n_envs: int = 1
    sample_size: int = 1000
    env_beta: float = 2.0
    ds_crossover: float = 0.5
    effect_size: str = "large"
    generative_model: Optional[str] = None
    gene_freq: float = 0.30
    target_r2: Optional[float] = None
    null_env_effect: float = 1.0
    null_gene_effect: float = 0.0

    @property
    def setting(self) -> str:
        return "single" if self.n_genes == 1 and self.n_envs == 1 else "multi"

    @property
    def r2(self) -> float:
        if self.target_r2 is not None:
            return self.target_r2
        return EFFECT_R2[self.setting][self.effect_size]

    def crossover_for(self, model: str) -> float:
        family = model.rsplit("_", 1)[0]
        return {"vs": 0.0, "ds": self.ds_crossover, "dst": 1.0}[family]


def true_label(model: str) -> str:
    return NO_EVIDENCE if model == NULL_MODEL else pattern_of(model)


def solve_noise_sd(signal, target_r2: float) -> float:
    """Noise SD giving ``target_r2`` as the share of variance explained by ``signal``."""
    if not 0 < target_r2 < 1:
        raise ValueError(f"target R^2 must lie in (0, 1), got {target_r2}")
    var = float(np.var(np.asarray(signal, dtype=float)))
    if var <= 0:
        raise ValueError("signal has zero variance; no noise level reaches the target R^2")
    return math.sqrt(var * (1.0 - target_r2) / target_r2)


def _child_seeds(seed, count: int) -> list:
    """Independent child seeds; unlike ``SeedSequence.spawn`` this never mutates ``seed``."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return [np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key + (i,)) for i in range(count)]


def generate_dataset(scenario: Scenario, seed) -> tuple[GxEDataset, str]:
    """Draw one replicate; returns the data and the true pattern label."""
    model = scenario.generative_model
    if model is None or (model != NULL_MODEL and model not in GXE_MODELS):
        raise ValueError(f"scenario needs a generative model, got {model!r}")
    if scenario.sample_size < 1 or scenario.n_genes < 1 or scenario.n_envs < 1:
        raise ValueError("sample size and variable counts must be positive")
    n, k, s = scenario.sample_size, scenario.n_genes, scenario.n_envs
    s_gene, s_env, s_noise = _child_seeds(seed, 3)
    G = sample_bernoulli(scenario.gene_freq, n * k, s_gene).reshape(n, k)
    E = sample_beta(2.0, scenario.env_beta, n * s, s_env).reshape(n, s)
    g = G.mean(axis=1)
    e = E.mean(axis=1)
    if model == NULL_MODEL:
        signal = BETA0 + scenario.null_env_effect * e + scenario.null_gene_effect * g
    else:
        c = scenario.crossover_for(model)
        be = 0.0 if model.endswith("_strong") else 1.0
        signal = BETA0 + be * (e - c) + BETA_EG * (e - c) * g
    sd = solve_noise_sd(signal, scenario.r2)
    y = signal + sample_gaussian(sd, n, s_noise)
    return GxEDataset(y, G, E), true_label(model)


@dataclass
class ReplicateOutcome:
    truth: str
    labels: dict
    failures: dict = field(default_factory=dict)
    constraint_error: float = 0.0
    min_r2_step: float = float("inf")


def _check_models(models: Iterable[LegitModel], out: ReplicateOutcome) -> None:
    for m in models:
        err = max(abs(np.abs(m.gene_weights).sum() - 1.0), abs(np.abs(m.env_weights).sum() - 1.0))
        out.constraint_error = max(out.constraint_error, float(err))
        if len(m.r2_trace) > 1:
            out.min_r2_step = min(out.min_r2_step, float(np.min(np.diff(m.r2_trace))))


def evaluate_replicate(
    scenario: Scenario,
    seed,
    methods: Sequence[str] = METHODS,
    alpha: Optional[float] = None,
    include_null_models: bool = True,
    bound_mode: str = "expected",
) -> ReplicateOutcome:
    """Generate one dataset and classify it with each requested method.

    Failures are recorded as an ``"error"`` prediction and never raised.
    """
    data, truth = generate_dataset(scenario, seed)
    out = ReplicateOutcome(truth=truth, labels={})
    model_set = None
    if "competitive" in methods:
        try:
            model_set = fit_competitive_set(data, include_null_models, bound_mode, env_min=0.0, env_max=1.0)
            out.labels["competitive"] = classify(model_set, data).label
            _check_models(model_set.gxe.values(), out)
        except Exception as exc:  # noqa: BLE001 - tallied as a misclassification
            out.labels["competitive"] = "error"
            out.failures["competitive"] = f"{type(exc).__name__}: {exc}"
    if "ros" in methods:
        try:
            standard = model_set.standard if model_set is not None and model_set.standard is not None else None
            if standard is None:
                standard = fit_legit(data)
            _check_models([standard], out)
            out.labels["ros"] = regions_of_significance(standard, data.environments, alpha).label
        except Exception as exc:  # noqa: BLE001
            out.labels["ros"] = "error"
            out.failures["ros"] = f"{type(exc).__name__}: {exc}"
    return out


@dataclass
class AccuracyTable:
    scenario: Scenario
    method: str
    accuracy: float
    false_positive_rate: float
    n_gxe: int
    n_null: int
    n_failed: int
    confusion: dict  # (true code, predicted code) -> count
    max_constraint_error: float = 0.0
    min_r2_step: float = float("inf")

    def count(self, truth: str, predicted: str) -> int:
        return self.confusion.get((truth, predicted), 0)


def scenario_models(scenario: Scenario) -> tuple:
    if scenario.generative_model is not None:
        return (scenario.generative_model,)
    return GXE_MODELS + (NULL_MODEL,)


def replicate_seed(study_seed: int, scenario_index: int, model_index: int, replicate: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([study_seed, scenario_index, model_index, replicate])


def _work(args):
    scenario, seed, methods, alpha, include_null, bound_mode = args
    return evaluate_replicate(scenario, seed, methods, alpha, include_null, bound_mode)


def run_study(
    scenarios: Sequence[Scenario],
    methods: Sequence[str] = METHODS,
    replicates: int = 100,
    parallelism: int = 1,
    seed: int = 0,
    alpha: Optional[float] = None,
    include_null_models: bool = True,
    bound_mode: str = "expected",
) -> list:
    """
    Run every scenario cell and tabulate accuracy per (scenario, method).

    Seeds depend only on ``(seed, scenario index, model index, replicate)``,
    so results do not depend on ``parallelism``.

    Returns
    -------
    list of AccuracyTable
        Empty when ``replicates == 0``.
    """
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    if replicates <= 0:
        return []
    jobs, keys = [], []
    for si, sc in enumerate(scenarios):
        for mi, model in enumerate(scenario_models(sc)):
            cell = replace(sc, generative_model=model)
            for r in range(replicates):
                jobs.append((cell, replicate_seed(seed, si, mi, r), tuple(methods), alpha,
                             include_null_models, bound_mode))
                keys.append(si)
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(_work, jobs, chunksize=max(1, len(jobs) // (8 * parallelism))))
    else:
        outcomes = [_work(j) for j in jobs]

    per_scenario = [[] for _ in scenarios]
    for si, oc in zip(keys, outcomes):
        per_scenario[si].append(oc)
    tables = []
    for sc, ocs in zip(scenarios, per_scenario):
        for method in methods:
            tables.append(_tabulate(sc, method, ocs))
    return tables


def _tabulate(scenario: Scenario, method: str, outcomes: list) -> AccuracyTable:
    confusion = {}
    n_gxe = n_null = correct = fp = failed = 0
    cerr, step = 0.0, float("inf")
    for oc in outcomes:
        pred = oc.labels[method]
        pcode = "error" if pred == "error" else LABEL_CODES[pred]
        tcode = LABEL_CODES[oc.truth]
        confusion[(tcode, pcode)] = confusion.get((tcode, pcode), 0) + 1
        failed += pcode == "error"
        if tcode == "none":
            n_null += 1
            fp += pcode != "none"
        else:
            n_gxe += 1
            correct += pcode == tcode
        cerr = max(cerr, oc.constraint_error)
        step = min(step, oc.min_r2_step)
    return AccuracyTable(
        scenario=scenario,
        method=method,
        accuracy=correct / n_gxe if n_gxe else float("nan"),
        false_positive_rate=fp / n_null if n_null else float("nan"),
        n_gxe=n_gxe,
        n_null=n_null,
        n_failed=failed,
        confusion=confusion,
        max_constraint_error=cerr,
        min_r2_step=step,
    )


def study_grid(
    setting: str = "single",
    sample_sizes=(250, 500, 1000, 2000),
    effect_sizes=("small", "medium", "large"),
    families=((2.0, 0.5), (2.0, 0.25), (4.0, 0.5), (4.0, 0.25)),
) -> list:
    """Scenario cells of the accuracy study: (env Beta shape, DS crossover) x N x effect."""
    k, s = (1, 1) if setting == "single" else (4, 3)
    return [
        Scenario(k, s, n, beta, c, eff)
        for beta, c in families
        for n in sample_sizes
        for eff in effect_sizes
    ]


# -- persistence ---------------------------------------------------------------

SCENARIO_FIELDS = tuple(f.name for f in fields(Scenario))
CONFUSION_COLUMNS = tuple(
    (t, p) for t in ("vs", "ds", "dst", "none") for p in PREDICTED_CODES
)
RESULT_COLUMNS = SCENARIO_FIELDS + (
    "method", "accuracy", "false_positive_rate", "n_gxe", "n_null", "n_failed",
    "max_constraint_error", "min_r2_step",
) + tuple(f"n_{t}_as_{p}" for t, p in CONFUSION_COLUMNS)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def export_results(tables: Sequence[AccuracyTable], path) -> None:
    """Write one row per (scenario, method) with a header row; floats at full precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for t in tables:
            sc = asdict(t.scenario)
            row = [_cell(sc[f]) for f in SCENARIO_FIELDS]
            row += [t.method, _cell(t.accuracy), _cell(t.false_positive_rate), t.n_gxe, t.n_null,
                    t.n_failed, _cell(t.max_constraint_error), _cell(t.min_r2_step)]
            row += [t.count(tc, pc) for tc, pc in CONFUSION_COLUMNS]
            w.writerow(row)


def _parse_scenario_value(name: str, text: str):
    if text == "":
        return None
    if name in ("n_genes", "n_envs", "sample_size"):
        return int(text)
    if name in ("effect_size", "generative_model"):
        return text
    return float(text)


def read_results(path) -> list:
    """Inverse of :func:`export_results`."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise ValueError(f"{path}: unexpected columns")
        for row in reader:
            sc = Scenario(**{f: _parse_scenario_value(f, row[f]) for f in SCENARIO_FIELDS})
            confusion = {}
            for tc, pc in CONFUSION_COLUMNS:
                n = int(row[f"n_{tc}_as_{pc}"])
                if n:
                    confusion[(tc, pc)] = n
            out.append(AccuracyTable(
                scenario=sc,
                method=row["method"],
                accuracy=float(row["accuracy"]),
                false_positive_rate=float(row["false_positive_rate"]),
                n_gxe=int(row["n_gxe"]),
                n_null=int(row["n_null"]),
                n_failed=int(row["n_failed"]),
                confusion=confusion,
                max_constraint_error=float(row["max_constraint_error"]),
                min_r2_step=float(row["min_r2_step"]),
            ))
    return out


def export_long(tables: Sequence[AccuracyTable], path) -> None:
    """Plot-ready long table: one row per scenario, method and metric."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SCENARIO_FIELDS + ("r2", "method", "metric", "value"))
        for t in tables:
            sc = asdict(t.scenario)
            base = [_cell(sc[f]) for f in SCENARIO_FIELDS] + [_cell(t.scenario.r2), t.method]
            w.writerow(base + ["accuracy", _cell(t.accuracy)])
            w.writerow(base + ["false_positive_rate", _cell(t.false_positive_rate)])
