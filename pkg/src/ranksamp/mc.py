"""Seeded, reproducible Monte Carlo engine for design-efficiency studies.

The engine simulates whole batches of staged samples as arrays rather than
looping over cycles. Because every identified unit is an iid
with-replacement draw, the "random division into sets" is an exchangeable
relabeling: reshaping a freshly drawn batch into sets has exactly the same
joint law as shuffling first (the object-level procedures in
:mod:`ranksamp.designs` do shuffle explicitly; the two routes are checked
against each other and against the exact oracle in the test suite).

Reproducibility contract: every replication batch draws from a
counter-based stream keyed by (seed, grid-point index, batch index), and
batch sizes are a fixed function of the design, so results are bitwise
identical for any worker count on one platform.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Optional, Sequence

import numpy as np

from . import __version__
from .core import (
    BernoulliPopulation,
    CovariateRanking,
    DatasetPopulation,
    DellClutterRanking,
    PerfectRanking,
    PopulationModel,
    RandomRanking,
    RankingStrategy,
    stream,
)
from .estimate import EfficiencyReport, efficiency_report

#: units simulated per batch; fixed so that stream layout (and therefore
#: output) never depends on workers or available memory
BATCH_UNIT_CAP = 2_000_000

DEFAULT_REPLICATIONS = 100_000


def _canonical(strategy: RankingStrategy) -> RankingStrategy:
    """Collapse the correlation endpoints onto their exact equivalents."""
    if isinstance(strategy, DellClutterRanking):
        if strategy.correlation == 1.0:
            return PerfectRanking()
        if strategy.correlation == 0.0:
            return RandomRanking()
    return strategy


def _draw_responses(pop: PopulationModel, shape: tuple[int, ...], rng) -> np.ndarray:
    if isinstance(pop, BernoulliPopulation):
        return (rng.random(shape) < pop.p).astype(np.int8)
    idx = rng.integers(0, pop.n_rows, size=shape)
    return pop.response[idx]


def _batch_perfect(pop: PopulationModel, m: int, r: int, rows: int, rng) -> np.ndarray:
    # Under perfect ranking only the 0/1 values matter, and the sorted value
    # at rank k of a binary m-set is 1 iff the set holds >= m - k successes
    # (0-based k), for every tie-break. Each stage is then a reshape + sum.
    state = _draw_responses(pop, (rows, m**r, m), rng)
    thresh = (m - np.arange(m)).astype(np.int16)
    for _ in range(r):
        b, k, _ = state.shape
        sums = state.reshape(b, k // m, m, m).sum(axis=3, dtype=np.int16)
        state = (sums >= thresh).astype(np.int8)
    return state[:, 0, :]


def _batch_scored(
    x: np.ndarray, y: np.ndarray, m: int, r: int, rng, tie_break: bool
) -> np.ndarray:
    # General staged selection on persistent per-unit scores. At every stage
    # each set of m is sorted by score (fresh exchangeable tie-break keys
    # when scores can tie) and the new set's rank-k element is the rank-k
    # unit of the group's k-th set.
    rows = x.shape[0]
    sx = x.reshape(rows, m**r, m)
    sy = y.reshape(rows, m**r, m)
    diag = np.arange(m)
    for _ in range(r):
        b, k, _ = sx.shape
        gx = sx.reshape(b, k // m, m, m)
        gy = sy.reshape(b, k // m, m, m)
        if tie_break:
            order = np.lexsort((rng.random(gy.shape), gy), axis=-1)
        else:
            order = np.argsort(gy, axis=-1, kind="stable")
        sel = order[:, :, diag, diag][..., None]
        sx = np.take_along_axis(gx, sel, axis=3)[..., 0]
        sy = np.take_along_axis(gy, sel, axis=3)[..., 0]
    return sx[:, 0, :]


def _batch_values(
    pop: PopulationModel, strategy: RankingStrategy, m: int, r: int, rows: int, rng
) -> np.ndarray:
    strategy = _canonical(strategy)
    if isinstance(strategy, PerfectRanking):
        return _batch_perfect(pop, m, r, rows, rng)
    shape = (rows, m ** (r + 1))
    if isinstance(strategy, RandomRanking):
        x = _draw_responses(pop, shape, rng)
        y = rng.random(shape)
        return _batch_scored(x, y, m, r, rng, tie_break=False)
    if isinstance(strategy, DellClutterRanking):
        if not isinstance(pop, BernoulliPopulation) or not 0.0 < pop.p < 1.0:
            raise ValueError(
                "the synthetic-covariate ranking model requires a Bernoulli "
                "population with p strictly in (0, 1)"
            )
        p, lam = pop.p, strategy.correlation
        x = _draw_responses(pop, shape, rng)
        z = rng.standard_normal(shape)
        y = lam * (x - p) / math.sqrt(p * (1.0 - p)) + math.sqrt(1.0 - lam * lam) * z
        return _batch_scored(x, y, m, r, rng, tie_break=False)
    if isinstance(strategy, CovariateRanking):
        if not isinstance(pop, DatasetPopulation):
            raise ValueError("covariate ranking requires a dataset population")
        if strategy.column not in pop.covariates:
            raise ValueError(
                f"ranking covariate {strategy.column!r} not found; "
                f"dataset has {sorted(pop.covariates)}"
            )
        idx = rng.integers(0, pop.n_rows, size=shape)
        x = pop.response[idx]
        y = pop.covariates[strategy.column][idx]
        return _batch_scored(x, y, m, r, rng, tie_break=True)
    raise TypeError(f"unknown ranking strategy: {strategy!r}")


def sample_values(
    pop: PopulationModel,
    strategy: RankingStrategy,
    m: int,
    r: int,
    rows: int,
    seed: int,
    stream_path: tuple[int, ...] = (),
) -> np.ndarray:
    """Simulate ``rows`` independent stage-r ranked sets of size m.

    Returns an int8 array of shape (rows, m); row t holds the measured
    values of one cycle, indexed by judgment rank. Row t is produced by the
    stream (seed, *stream_path, batch(t)), so any slice of the output is
    reproducible without simulating the rest.
    """
    units_per_row = m ** (r + 1)
    batch_rows = max(1, BATCH_UNIT_CAP // units_per_row)
    out = np.empty((rows, m), dtype=np.int8)
    done = 0
    batch_index = 0
    while done < rows:
        take = min(batch_rows, rows - done)
        rng = stream(seed, *stream_path, batch_index)
        out[done : done + take] = _batch_values(pop, strategy, m, r, take, rng)
        done += take
        batch_index += 1
    return out


def stratum_means_mc(
    pop: PopulationModel,
    strategy: RankingStrategy,
    m: int,
    r: int,
    replications: int,
    seed: int,
    stream_path: tuple[int, ...] = (),
) -> np.ndarray:
    """Monte Carlo estimate of the per-rank stratum proportions."""
    vals = sample_values(pop, strategy, m, r, replications, seed, stream_path)
    return vals.mean(axis=0)


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridPoint:
    """One cell of a sweep: set size, stages, and the ranking scenario
    (a correlation for generative populations, a covariate name for
    dataset populations)."""

    m: int
    r: int
    p: Optional[float] = None
    lam: Optional[float] = None
    covariate: Optional[str] = None

    def strategy(self) -> RankingStrategy:
        if self.covariate is not None:
            return CovariateRanking(self.covariate)
        if self.lam is None or self.lam == 1.0:
            return PerfectRanking()
        if self.lam == 0.0:
            return RandomRanking()
        return DellClutterRanking(self.lam)


@dataclass
class PointResult:
    """Result for one grid point; ``error`` is set (and ``report`` None)
    when the point failed. ``elapsed`` is bookkeeping only and never
    serialized, to keep output files byte-stable."""

    point: GridPoint
    report: Optional[EfficiencyReport]
    mean_estimate: Optional[float]
    replications: int
    elapsed: float
    error: Optional[str] = None


@dataclass(frozen=True)
class SimulationConfig:
    """Grid specification for a sweep over a generative or dataset population.

    Exactly one of ``p_values`` (with optional ``lambda_values``) or
    ``dataset`` + ``covariates`` must be given. The grid is enumerated in a
    fixed order (p/covariate, then m, then r, then lambda), and the result
    is a deterministic function of (seed, grid) for any worker count.
    """

    m_values: tuple[int, ...]
    r_values: tuple[int, ...]
    p_values: Optional[tuple[float, ...]] = None
    lambda_values: Optional[tuple[float, ...]] = None
    dataset: Optional[DatasetPopulation] = None
    covariates: Optional[tuple[str, ...]] = None
    replications: int = DEFAULT_REPLICATIONS
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.replications < 2:
            raise ValueError("need at least 2 replications to form a sample variance")
        if not self.m_values or not self.r_values:
            raise ValueError("grid must name at least one set size and stage count")
        generative = self.p_values is not None
        if generative == (self.dataset is not None):
            raise ValueError("configure either p_values or a dataset, not both")
        if generative and not self.p_values:
            raise ValueError("empty p grid")
        if self.dataset is not None and not self.covariates:
            raise ValueError("dataset sweeps need at least one ranking covariate")

    def points(self) -> list[GridPoint]:
        pts = []
        if self.p_values is not None:
            lams = self.lambda_values if self.lambda_values else (1.0,)
            for p, m, r, lam in itertools.product(self.p_values, self.m_values, self.r_values, lams):
                pts.append(GridPoint(m=m, r=r, p=p, lam=lam))
        else:
            for cov, m, r in itertools.product(self.covariates, self.m_values, self.r_values):
                pts.append(GridPoint(m=m, r=r, p=self.dataset.proportion, covariate=cov))
        return pts

    def population(self, point: GridPoint) -> PopulationModel:
        if self.dataset is not None:
            return self.dataset
        return BernoulliPopulation(point.p)

    def digest(self) -> str:
        """Stable hash of everything that determines the output values.

        Excludes the worker count (scheduling must not change results) and
        any timing. Dataset populations hash their actual column bytes.
        """
        h = hashlib.sha256()
        desc: dict = {
            "m": list(self.m_values),
            "r": list(self.r_values),
            "p": list(self.p_values) if self.p_values is not None else None,
            "lambda": list(self.lambda_values) if self.lambda_values is not None else None,
            "covariates": list(self.covariates) if self.covariates is not None else None,
            "replications": self.replications,
            "seed": self.seed,
            "engine_batch_cap": BATCH_UNIT_CAP,
        }
        h.update(json.dumps(desc, sort_keys=True).encode())
        if self.dataset is not None:
            h.update(self.dataset.response.tobytes())
            for name in self.dataset.covariates:
                h.update(name.encode())
                h.update(self.dataset.covariates[name].tobytes())
        return h.hexdigest()[:16]


@dataclass
class SweepResult:
    rows: list[PointResult]
    seed: int
    config_digest: str
    replications: int


def simulate_efficiency(
    pop: PopulationModel,
    point: GridPoint,
    replications: int,
    seed: int,
    point_index: int = 0,
) -> PointResult:
    """Estimate the efficiency report for one grid point by simulation.

    Draws ``replications`` independent single-cycle samples, takes the
    sample variance of the estimator as the design variance, and uses the
    closed form p(1-p)/m for the SRS variance (simulating it would only add
    noise). The RE standard error comes from the delta method with the
    empirical fourth central moment of the estimator.
    """
    t0 = time.perf_counter()
    p = pop.p if isinstance(pop, BernoulliPopulation) else pop.proportion
    var_srs = p * (1.0 - p) / point.m
    if var_srs == 0.0:
        raise ValueError(f"degenerate population proportion p={p}; nothing to compare")
    vals = sample_values(pop, point.strategy(), point.m, point.r, replications, seed, (point_index,))
    phat = vals.mean(axis=1)
    mean_est = float(phat.mean())
    var_design = float(phat.var(ddof=1))
    centered = phat - mean_est
    mu4 = float((centered**4).mean())
    n = replications
    var_of_var = (mu4 - (n - 3) / (n - 1) * var_design**2) / n
    se_var = math.sqrt(max(var_of_var, 0.0))
    se_re = var_srs * se_var / var_design**2 if var_design > 0 else math.nan
    report = efficiency_report(var_srs, var_design, mc_stderr=se_re, provenance="monte-carlo")
    return PointResult(
        point=point,
        report=report,
        mean_estimate=mean_est,
        replications=replications,
        elapsed=time.perf_counter() - t0,
    )


def _run_point(args: tuple[SimulationConfig, int, GridPoint]) -> PointResult:
    config, index, point = args
    try:
        return simulate_efficiency(
            config.population(point), point, config.replications, config.seed, index
        )
    except Exception as exc:  # keep sweeping; the cell is marked failed
        return PointResult(
            point=point,
            report=None,
            mean_estimate=None,
            replications=config.replications,
            elapsed=0.0,
            error=str(exc),
        )


def run_sweep(config: SimulationConfig) -> SweepResult:
    """Evaluate every grid point; deterministic given (seed, grid) for any
    worker count. Per-point failures are recorded on their rows and do not
    abort the sweep."""
    points = config.points()
    jobs = [(config, i, pt) for i, pt in enumerate(points)]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_run_point, jobs))
    else:
        rows = [_run_point(job) for job in jobs]
    return SweepResult(
        rows=rows,
        seed=config.seed,
        config_digest=config.digest(),
        replications=config.replications,
    )


def dataset_sweep(
    dataset: DatasetPopulation,
    covariates: Sequence[str],
    m_values: Sequence[int],
    r_values: Sequence[int],
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = 0,
    workers: int = 1,
) -> SweepResult:
    """Covariate-ranked sweep over a finite dataset sampled with replacement.

    The SRS baseline uses the dataset's true proportion in p(1-p)/m.
    """
    config = SimulationConfig(
        m_values=tuple(m_values),
        r_values=tuple(r_values),
        dataset=dataset,
        covariates=tuple(covariates),
        replications=replications,
        seed=seed,
        workers=workers,
    )
    return run_sweep(config)


# --- serialization ----------------------------------------------------------

SWEEP_CSV_FIELDS = ("p", "m", "r", "lambda", "covariate", "re", "pssr", "stderr", "reps")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf"
        return format(x, ".12g")
    return str(x)


def metadata_line(seed: int, digest: str) -> str:
    return f"# seed={seed} config={digest} version={__version__}"


def write_sweep_csv(result: SweepResult, fh: IO[str]) -> None:
    fh.write(metadata_line(result.seed, result.config_digest) + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_CSV_FIELDS)
    for row in result.rows:
        pt, rep = row.point, row.report
        w.writerow(
            [
                _fmt(pt.p),
                pt.m,
                pt.r,
                _fmt(pt.lam),
                pt.covariate or "",
                _fmt(rep.re if rep else None),
                _fmt(rep.pssr if rep else None),
                _fmt(rep.mc_stderr if rep else None),
                row.replications,
            ]
        )


def sweep_to_json_dict(result: SweepResult) -> dict:
    rows = []
    for row in result.rows:
        rec = {
            "p": row.point.p,
            "m": row.point.m,
            "r": row.point.r,
            "lambda": row.point.lam,
            "covariate": row.point.covariate,
            "reps": row.replications,
        }
        if row.report is not None:
            rec.update(row.report.to_json_dict())
        if row.error is not None:
            rec["error"] = row.error
        rows.append(rec)
    return {
        "meta": {"seed": result.seed, "config": result.config_digest, "version": __version__},
        "rows": rows,
    }


def write_sweep_json(result: SweepResult, fh: IO[str]) -> None:
    json.dump(sweep_to_json_dict(result), fh, indent=2, allow_nan=True)
    fh.write("\n")
