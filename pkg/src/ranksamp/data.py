"""Dataset ingestion and summaries for covariate-ranked sampling workflows.

The canonical input is a CSV with a header, one binary response column
(mapped through a success label) and any number of integer-scored covariate
columns. Covariates also answer to positional aliases Y1, Y2, ... in
mapping order; with the standard nine-covariate breast-cytology layout,
mitoses is the ninth covariate and therefore Y9 (some distributions of
that dataset number their columns with an id column first, which shifts
the labels -- the aliases here always count the mapped covariates only).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Optional, Sequence

import numpy as np
from scipy.stats import spearmanr

from .core import DatasetPopulation

DEFAULT_MISSING_TOKENS = ("", "?", "NA", "NaN")

#: canonical column layout written by scripts/fetch_wbcd.py
WBCD_COVARIATE_COLUMNS = (
    "clump_thickness",
    "cell_size_uniformity",
    "cell_shape_uniformity",
    "marginal_adhesion",
    "epithelial_cell_size",
    "bare_nuclei",
    "bland_chromatin",
    "normal_nucleoli",
    "mitoses",
)
WBCD_RESPONSE_COLUMN = "class"
WBCD_SUCCESS_LABEL = "malignant"


@dataclass(frozen=True)
class ColumnMapping:
    """How raw CSV columns become a Dataset: the response column, which of
    its labels counts as success (everything else must match
    ``failure_label`` when given, or the single other observed label), and
    the covariate columns in alias order."""

    response: str
    success_label: str
    covariates: tuple[str, ...]
    failure_label: Optional[str] = None


@dataclass(frozen=True)
class Dataset:
    """A cleaned finite population: binary response plus ordinal covariates.

    Immutable after load; ``dropped_rows`` records how many raw rows the
    missing-value policy removed (rows kept + dropped = raw rows, nothing
    is ever imputed).
    """

    response: np.ndarray
    covariates: dict[str, np.ndarray]
    source: str
    mapping: ColumnMapping
    dropped_rows: int = 0

    @property
    def n_rows(self) -> int:
        return int(self.response.size)

    def alias(self, name: str) -> str:
        """Resolve a covariate name or a positional alias Y1..Yk."""
        if name in self.covariates:
            return name
        if name.upper().startswith("Y"):
            try:
                idx = int(name[1:])
            except ValueError:
                idx = 0
            if 1 <= idx <= len(self.mapping.covariates):
                return self.mapping.covariates[idx - 1]
        raise ValueError(
            f"unknown covariate {name!r}; dataset has {list(self.mapping.covariates)} "
            f"(aliases Y1..Y{len(self.mapping.covariates)})"
        )

    def column(self, name: str) -> np.ndarray:
        if name == "response":
            return self.response
        return self.covariates[self.alias(name)]

    def population(self) -> DatasetPopulation:
        return DatasetPopulation(response=self.response, covariates=dict(self.covariates))


def load_csv(
    path: str | Path,
    mapping: ColumnMapping,
    missing_policy: str = "drop",
    missing_tokens: Sequence[str] = DEFAULT_MISSING_TOKENS,
) -> Dataset:
    """Parse a delimited file into a Dataset.

    Rows with missing values in any *mapped* column are dropped (and
    counted) under the default policy, or rejected under ``"error"``.
    Response labels other than the success/failure labels, and non-integer
    covariate values, are labeled errors naming the offending row.
    """
    if missing_policy not in ("drop", "error"):
        raise ValueError(f"missing_policy must be 'drop' or 'error', got {missing_policy!r}")
    missing = set(missing_tokens)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (mapping.response, *mapping.covariates):
            if col not in header:
                raise ValueError(f"column {col!r} not in header of {path} (has {header})")
        responses: list[int] = []
        covs: dict[str, list[int]] = {c: [] for c in mapping.covariates}
        dropped = 0
        known_failure = mapping.failure_label
        for line_no, rec in enumerate(reader, start=2):
            cells = {c: (rec[c] or "").strip() for c in (mapping.response, *mapping.covariates)}
            if any(v in missing for v in cells.values()):
                if missing_policy == "error":
                    raise ValueError(f"{path}: missing value in mapped columns at line {line_no}")
                dropped += 1
                continue
            label = cells[mapping.response]
            if label == mapping.success_label:
                responses.append(1)
            elif known_failure is None or label == known_failure:
                if known_failure is None:
                    known_failure = label
                responses.append(0)
            else:
                raise ValueError(
                    f"{path}: unmapped response label {label!r} at line {line_no} "
                    f"(success={mapping.success_label!r}, failure={known_failure!r})"
                )
            for c in mapping.covariates:
                try:
                    covs[c].append(int(cells[c]))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-integer covariate {c}={cells[c]!r} at line {line_no}"
                    ) from None
    if not responses:
        raise ValueError(f"{path}: no usable rows after cleaning")
    return Dataset(
        response=np.asarray(responses, dtype=np.int8),
        covariates={c: np.asarray(v, dtype=np.int64) for c, v in covs.items()},
        source=str(path),
        mapping=mapping,
        dropped_rows=dropped,
    )


def load_wbcd(
    path: str | Path,
    covariates: Sequence[str] = WBCD_COVARIATE_COLUMNS,
    missing_policy: str = "drop",
) -> Dataset:
    """Load a canonically formatted breast-cytology CSV (see the fetch
    script). Map only the covariates you will use: the missing-value policy
    looks at mapped columns alone, so leaving the bare-nuclei column out
    keeps all rows."""
    mapping = ColumnMapping(
        response=WBCD_RESPONSE_COLUMN,
        success_label=WBCD_SUCCESS_LABEL,
        covariates=tuple(covariates),
    )
    return load_csv(path, mapping, missing_policy=missing_policy)


def write_csv(ds: Dataset, path: str | Path) -> None:
    """Serialize a Dataset back to CSV (response labels preserved)."""
    failure = ds.mapping.failure_label or "failure"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*ds.mapping.covariates, ds.mapping.response])
        for i in range(ds.n_rows):
            label = ds.mapping.success_label if ds.response[i] else failure
            w.writerow([*(int(ds.covariates[c][i]) for c in ds.mapping.covariates), label])


def population_proportion(ds: Dataset) -> float:
    """Mean of the response column: the dataset's true proportion."""
    return float(ds.response.mean())


def spearman(ds: Dataset, first: str, second: str = "response") -> float:
    """Spearman rank correlation between two named columns ("response" is
    the response), with midrank (average) handling of ties."""
    a = np.asarray(ds.column(first), dtype=np.float64)
    b = np.asarray(ds.column(second), dtype=np.float64)
    if ds.n_rows < 2:
        raise ValueError("Spearman correlation needs at least 2 rows")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        flat = first if np.ptp(a) == 0 else second
        raise ValueError(f"column {flat!r} has zero variance; its rank correlation is undefined")
    return float(spearmanr(a, b).statistic)


def summary(ds: Dataset, covariates: Optional[Sequence[str]] = None) -> dict:
    """Dataset summary: row count, proportion, and response-covariate
    Spearman correlations (None where undefined)."""
    names = list(covariates) if covariates is not None else list(ds.mapping.covariates)
    rho: dict[str, Optional[float]] = {}
    for name in names:
        try:
            rho[name] = spearman(ds, name)
        except ValueError:
            rho[name] = None
    return {
        "n_rows": ds.n_rows,
        "dropped_rows": ds.dropped_rows,
        "p": population_proportion(ds),
        "spearman": rho,
    }


def write_summary_json(ds: Dataset, fh: IO[str], covariates: Optional[Sequence[str]] = None) -> None:
    json.dump(summary(ds, covariates), fh, indent=2)
    fh.write("\n")
