"""CSV ingestion and POMP (percent of maximum possible) rescaling."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .legit import GxEDataset

MISSING = {"", "na", "nan", "null", "."}


class InputError(ValueError):
    """Malformed or incomplete input data."""


@dataclass(frozen=True)
class PompScaling:
    """Per-column bounds used by :func:`pomp_rescale`."""

    lower: np.ndarray
    upper: np.ndarray
    theoretical: tuple  # per column: True if the bounds were supplied

    def apply(self, matrix) -> np.ndarray:
        return 100.0 * (np.asarray(matrix, dtype=float) - self.lower) / (self.upper - self.lower)

    def inverse(self, scaled) -> np.ndarray:
        return self.lower + np.asarray(scaled, dtype=float) * (self.upper - self.lower) / 100.0


def pomp_rescale(matrix, lower=None, upper=None, names: Optional[Sequence[str]] = None):
    """
    Map every column onto [0, 100].

    Parameters
    ----------
    matrix : array_like, shape (n, m)
    lower, upper : float or array_like, optional
        Theoretical bounds per column.  Columns without them use their
        observed minimum / maximum.  Use NaN entries to mix both.
    names : sequence of str, optional
        Column names for error messages.

    Returns
    -------
    scaled : ndarray
    scaling : PompScaling
    """
    X = np.asarray(matrix, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    m = X.shape[1]
    names = list(names) if names is not None else [f"column {j}" for j in range(m)]
    lo_given = np.full(m, np.nan) if lower is None else np.broadcast_to(np.asarray(lower, float), (m,)).copy()
    hi_given = np.full(m, np.nan) if upper is None else np.broadcast_to(np.asarray(upper, float), (m,)).copy()
    lo = np.where(np.isnan(lo_given), X.min(axis=0), lo_given)
    hi = np.where(np.isnan(hi_given), X.max(axis=0), hi_given)
    for j in range(m):
        if not hi[j] > lo[j]:
            raise InputError(f"cannot POMP-rescale {names[j]}: it is constant and no bounds were given")
    theoretical = tuple(bool(a and b) for a, b in zip(~np.isnan(lo_given), ~np.isnan(hi_given)))
    scaling = PompScaling(lo, hi, theoretical)
    return scaling.apply(X), scaling


def _sniff_delimiter(path: Path, sample: str) -> str:
    if path.suffix.lower() in (".tsv", ".tab"):
        return "\t"
    try:
        return csv.Sniffer().sniff(sample, delimiters=",;\t").delimiter
    except csv.Error:
        return ","


def read_table(path, delimiter: Optional[str] = None):
    """Header and raw string rows of a delimited text file."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        text = fh.read()
    if delimiter is None:
        delimiter = _sniff_delimiter(path, text[:4096])
    rows = list(csv.reader(text.splitlines(), delimiter=delimiter))
    if not rows:
        raise InputError(f"{path}: file is empty")
    header = [h.strip() for h in rows[0]]
    return header, rows[1:], delimiter


def ingest_csv(
    path,
    outcome: str,
    genes: Sequence[str],
    envs: Sequence[str],
    covariates: Sequence[str] = (),
    delimiter: Optional[str] = None,
) -> GxEDataset:
    """
    Build a dataset from a delimited text file with a header row.

    Rows with a missing value in any mapped column are dropped and a warning
    gives the count.  Non-numeric cells raise :class:`InputError` naming the
    row (1-based, header excluded) and column.
    """
    genes, envs, covariates = list(genes), list(envs), list(covariates)
    roles = [outcome] + genes + envs + covariates
    if len(set(roles)) != len(roles):
        raise InputError("column roles overlap; each column may play one role only")
    if not genes or not envs:
        raise InputError("need at least one gene column and one environment column")
    header, rows, _ = read_table(path, delimiter)
    missing = [c for c in roles if c not in header]
    if missing:
        raise InputError(f"{path}: missing column(s) {', '.join(missing)}")
    idx = [header.index(c) for c in roles]

    values, dropped = [], 0
    for r, row in enumerate(rows, start=1):
        if not any(cell.strip() for cell in row):
            continue
        cells = [row[i].strip() if i < len(row) else "" for i in idx]
        if any(c.lower() in MISSING for c in cells):
            dropped += 1
            continue
        parsed = []
        for name, cell in zip(roles, cells):
            try:
                v = float(cell)
            except ValueError:
                raise InputError(f"{path}: non-numeric value {cell!r} in row {r}, column {name}") from None
            if not math.isfinite(v):
                raise InputError(f"{path}: non-finite value {cell!r} in row {r}, column {name}")
            parsed.append(v)
        values.append(parsed)
    if dropped:
        warnings.warn(f"dropped {dropped} row(s) with missing values", stacklevel=2)
    if not values:
        raise InputError(f"{path}: no complete rows left")

    A = np.array(values)
    k, s = len(genes), len(envs)
    return GxEDataset(
        outcome=A[:, 0],
        genes=A[:, 1:1 + k],
        environments=A[:, 1 + k:1 + k + s],
        covariates=A[:, 1 + k + s:] if covariates else None,
        gene_names=genes,
        env_names=envs,
        covariate_names=covariates,
    )


def write_dataset(data: GxEDataset, path, outcome: str = "y") -> None:
    """Write a dataset as CSV with full float precision."""
    cols = [outcome, *data.gene_names, *data.env_names, *data.covariate_names]
    blocks = [data.outcome[:, None], data.genes, data.environments]
    if data.covariates is not None:
        blocks.append(data.covariates)
    A = np.hstack(blocks)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        w.writerows([[repr(float(v)) for v in row] for row in A])
