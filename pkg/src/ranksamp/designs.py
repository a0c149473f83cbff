"""The three sampling procedures: SRS, RSS, and multistage RSS.

RSS identifies m^2 units per cycle, ranks disjoint sets of m without
measuring anything, and quantifies one judgment order statistic per set.
The multistage design iterates the ranking-and-selection construction r
times over m^(r+1) identified units per cycle, measuring only the final m.
A single stage is exactly RSS, and both run through the same code path
here.

The draw functions are pure in (population, spec, strategy, RNG stream);
independent draws on distinct streams may run concurrently.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    DesignSpec,
    PopulationModel,
    RankingStrategy,
    Unit,
    draw_units,
    rank_set,
    sample_responses,
)

#: refuse cycles identifying more units than this (m**(r+1) guard)
DEFAULT_UNIT_CAP = 10_000_000


@dataclass(frozen=True)
class RankedSample:
    """The quantified measurements of one sample.

    ``values[i-1, j-1]`` is the 0/1 measurement with judgment rank i in
    cycle j. ``units_identified`` is the bookkeeping cost of the draw: N
    for SRS, n m^2 for RSS, n m^(r+1) for MSRSS. Only m*n responses are
    ever read; all other identified units contribute ranking scores alone.
    """

    design: DesignSpec
    values: np.ndarray
    units_identified: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int8)
        if vals.shape != (self.design.m, self.design.n):
            raise ValueError(
                f"values must have shape (m, n) = ({self.design.m}, {self.design.n}), "
                f"got {vals.shape}"
            )
        if vals.size and not np.isin(vals, (0, 1)).all():
            raise ValueError("measured values must be exactly 0 or 1")
        expected = self.design.n * self.design.units_per_cycle
        if self.units_identified != expected:
            raise ValueError(
                f"units_identified={self.units_identified} does not match the "
                f"design formula ({expected})"
            )
        object.__setattr__(self, "values", vals)


def draw_srs(pop: PopulationModel, total: int, rng: np.random.Generator) -> RankedSample:
    """Simple random sample of N measured units (one cycle, m = N, ranks
    carry no meaning)."""
    if total < 1:
        raise ValueError("sample size must be >= 1")
    responses = sample_responses(pop, total, rng)
    design = DesignSpec(kind="srs", m=total, n=1)
    return RankedSample(design=design, values=responses.reshape(total, 1), units_identified=total)


def _staged_cycle(
    pop: PopulationModel,
    m: int,
    r: int,
    strategy: RankingStrategy,
    rng: np.random.Generator,
) -> list[int]:
    """One cycle of the staged construction; returns the m measured values
    in judgment-rank order."""
    units = draw_units(pop, m ** (r + 1), strategy, rng)
    order = rng.permutation(len(units))  # random division into sets
    shuffled = [units[i] for i in order]
    # m**r disjoint sets of m; consecutive groups of m sets feed each stage
    rows: list[list[Unit]] = [shuffled[i * m : (i + 1) * m] for i in range(m**r)]
    for _ in range(r):
        nxt = []
        for g in range(len(rows) // m):
            group = rows[g * m : (g + 1) * m]
            # the new set's rank-k element is the judgment-rank-k unit of
            # the group's k-th set (same ranking mechanism at every stage)
            nxt.append([group[k][rank_set(group[k], rng)[k]] for k in range(m)])
        rows = nxt
    return [u.response for u in rows[0]]


def draw_rss(
    pop: PopulationModel,
    m: int,
    n: int,
    strategy: RankingStrategy,
    rng: np.random.Generator,
) -> RankedSample:
    """Ranked set sample: n cycles, each identifying m^2 units and
    measuring the i-th judgment order statistic of set i."""
    if m < 1 or n < 1:
        raise ValueError("set size and cycle count must be >= 1")
    values = np.empty((m, n), dtype=np.int8)
    for j in range(n):
        values[:, j] = _staged_cycle(pop, m, 1, strategy, rng)
    design = DesignSpec(kind="rss", m=m, n=n)
    return RankedSample(design=design, values=values, units_identified=n * m * m)


def draw_msrss(
    pop: PopulationModel,
    m: int,
    r: int,
    n: int,
    strategy: RankingStrategy,
    rng: np.random.Generator,
    unit_cap: int = DEFAULT_UNIT_CAP,
) -> RankedSample:
    """Multistage ranked set sample: n cycles, each identifying m^(r+1)
    units, applying the ranking-and-selection construction r times, and
    measuring the final set of m.

    Units for each cycle are drawn with replacement up front (fresh
    randomness per cycle), which keeps the quantified units independent.
    """
    if m < 1 or r < 1 or n < 1:
        raise ValueError("set size, stages and cycles must all be >= 1")
    per_cycle = m ** (r + 1)
    if per_cycle > unit_cap:
        raise ValueError(
            f"m**(r+1) = {per_cycle} units per cycle exceeds the cap of {unit_cap}; "
            "raise unit_cap explicitly if this is intentional"
        )
    values = np.empty((m, n), dtype=np.int8)
    for j in range(n):
        values[:, j] = _staged_cycle(pop, m, r, strategy, rng)
    design = DesignSpec(kind="msrss", m=m, n=n, r=r)
    return RankedSample(design=design, values=values, units_identified=n * per_cycle)


# --- flat CSV serialization: stage_r, rank_i, cycle_j, value ---------------
#
# stage_r is 0 for SRS (no ranking stages) and r otherwise. Reading maps
# stage 0 back to SRS and any positive stage to the staged design, so an
# RSS sample round-trips as the behaviorally identical single-stage design.

CSV_FIELDS = ("stage_r", "rank_i", "cycle_j", "value")


def write_sample_csv(sample: RankedSample, path: str | Path) -> None:
    d = sample.design
    stage = 0 if d.kind == "srs" else d.r
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for i in range(d.m):
            for j in range(d.n):
                w.writerow([stage, i + 1, j + 1, int(sample.values[i, j])])


def read_sample_csv(path: str | Path) -> RankedSample:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != list(CSV_FIELDS):
            raise ValueError(
                f"sample file must have header {','.join(CSV_FIELDS)}, "
                f"got {reader.fieldnames}"
            )
        for rec in reader:
            rows.append((int(rec["stage_r"]), int(rec["rank_i"]), int(rec["cycle_j"]), int(rec["value"])))
    if not rows:
        raise ValueError(f"no sample rows in {path}")
    stages = {s for s, *_ in rows}
    if len(stages) != 1:
        raise ValueError(f"mixed stage values in {path}: {sorted(stages)}")
    stage = stages.pop()
    m = max(i for _, i, _, _ in rows)
    n = max(j for _, _, j, _ in rows)
    if len(rows) != m * n:
        raise ValueError(f"expected {m * n} rows for an m={m}, n={n} sample, got {len(rows)}")
    values = np.zeros((m, n), dtype=np.int8)
    for _, i, j, v in rows:
        values[i - 1, j - 1] = v
    if stage == 0:
        design = DesignSpec(kind="srs", m=m, n=n)
    elif stage == 1:
        design = DesignSpec(kind="rss", m=m, n=n)
    else:
        design = DesignSpec(kind="msrss", m=m, n=n, r=stage)
    return RankedSample(
        design=design, values=values, units_identified=n * design.units_per_cycle
    )
