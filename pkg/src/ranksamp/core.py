"""Domain types shared by every module: populations, ranking strategies, units,
design specifications, and the reproducible RNG stream contract.

All types are immutable after construction. Every operation takes an explicit
``numpy.random.Generator``; there is no hidden global RNG state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt
from typing import NamedTuple, Union

import numpy as np

DESIGN_KINDS = ("srs", "rss", "msrss")


def stream(seed: int, *path: int) -> np.random.Generator:
    """Derive an independent, reproducible RNG stream from (seed, *path).

    Uses the counter-based Philox generator keyed through a SeedSequence
    spawn key, so any (seed, index...) tuple maps to the same stream on
    every platform and regardless of how many other streams exist. This
    is what makes Monte Carlo results independent of worker scheduling.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=path)))


class Unit(NamedTuple):
    """One identified population unit: binary response plus the score used
    for judgment ordering (covariate value, response, or uniform key)."""

    response: int
    ranking_score: float


@dataclass(frozen=True)
class BernoulliPopulation:
    """Generative population: units are iid Bernoulli(p)."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"success probability must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class DatasetPopulation:
    """Finite population sampled uniformly with replacement.

    ``response`` is a 0/1 vector; ``covariates`` maps column name to an
    equal-length vector of ordinal scores (compared as real numbers).
    """

    response: np.ndarray
    covariates: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        resp = np.asarray(self.response, dtype=np.int8)
        if resp.size == 0:
            raise ValueError("dataset population is empty")
        if not np.isin(resp, (0, 1)).all():
            raise ValueError("dataset responses must be exactly 0 or 1")
        object.__setattr__(self, "response", resp)
        covs = {}
        for name, col in self.covariates.items():
            arr = np.asarray(col, dtype=np.float64)
            if arr.shape != resp.shape:
                raise ValueError(
                    f"covariate {name!r} has length {arr.size}, response has {resp.size}"
                )
            covs[name] = arr
        object.__setattr__(self, "covariates", covs)

    @property
    def n_rows(self) -> int:
        return int(self.response.size)

    @property
    def proportion(self) -> float:
        return float(self.response.mean())


PopulationModel = Union[BernoulliPopulation, DatasetPopulation]


@dataclass(frozen=True)
class PerfectRanking:
    """Rank by the true binary response; ties broken at random."""


@dataclass(frozen=True)
class RandomRanking:
    """Rank by an iid uniform score per unit (a useless covariate)."""


@dataclass(frozen=True)
class DellClutterRanking:
    """Rank by a synthetic covariate correlated with the response.

    The score for a unit with response x is

        lam * (x - p) / sqrt(p (1 - p)) + sqrt(1 - lam^2) * Z,   Z ~ N(0, 1),

    so ``correlation`` (lam) is exactly corr(response, score). lam = 0 is
    random ranking, lam = 1 is perfect ranking. Requires a Bernoulli
    population with p strictly inside (0, 1): at p in {0, 1} the
    standardization is undefined and the model is rejected loudly rather
    than silently degrading to random ranking.
    """

    correlation: float

    def __post_init__(self):
        if not 0.0 <= self.correlation <= 1.0:
            raise ValueError(f"ranking correlation must lie in [0, 1], got {self.correlation}")


@dataclass(frozen=True)
class CovariateRanking:
    """Rank by a named dataset covariate; ties broken at random."""

    column: str


RankingStrategy = Union[PerfectRanking, RandomRanking, DellClutterRanking, CovariateRanking]


@dataclass(frozen=True)
class DesignSpec:
    """Sampling design: kind, set size m, stages r (MSRSS only), cycles n.

    The measured sample size is N = m * n for every kind (SRS stores N as
    m with a single cycle). MSRSS with r = 1 is behaviorally identical to
    RSS; both are produced by the same staged construction.
    """

    kind: str
    m: int
    n: int
    r: int = 1

    def __post_init__(self):
        if self.kind not in DESIGN_KINDS:
            raise ValueError(f"design kind must be one of {DESIGN_KINDS}, got {self.kind!r}")
        if self.m < 1 or self.n < 1 or self.r < 1:
            raise ValueError("set size, cycles and stages must all be >= 1")
        if self.kind in ("srs", "rss") and self.r != 1:
            raise ValueError(f"stages r={self.r} is only meaningful for msrss")

    @property
    def total(self) -> int:
        """Measured sample size N = m * n."""
        return self.m * self.n

    @property
    def units_per_cycle(self) -> int:
        """Units identified (not necessarily measured) per cycle."""
        if self.kind == "srs":
            return self.m
        return self.m ** (self.r + 1)


def gen_dell_clutter_score(x: int, p: float, lam: float, z: float) -> float:
    """Synthetic ranking covariate for one unit under the imperfect-ranking model.

    Parameters
    ----------
    x : response in {0, 1}
    p : population success probability, strictly inside (0, 1)
    lam : target correlation between response and score, in [0, 1]
    z : a standard-normal draw

    Returns
    -------
    lam * (x - p) / sqrt(p (1 - p)) + sqrt(1 - lam^2) * z
    """
    if not 0.0 < p < 1.0:
        raise ValueError(
            "the score model standardizes by sqrt(p(1-p)); p must lie strictly in (0, 1)"
        )
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"ranking correlation must lie in [0, 1], got {lam}")
    return lam * (x - p) / sqrt(p * (1.0 - p)) + sqrt(1.0 - lam * lam) * z


def sample_responses(pop: PopulationModel, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` iid responses (with replacement) from the population."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if isinstance(pop, BernoulliPopulation):
        return (rng.random(count) < pop.p).astype(np.int8)
    idx = rng.integers(0, pop.n_rows, size=count)
    return pop.response[idx]


def draw_units(
    pop: PopulationModel,
    count: int,
    strategy: RankingStrategy,
    rng: np.random.Generator,
) -> list[Unit]:
    """Identify ``count`` units and attach the ranking score each would carry.

    Bernoulli populations yield iid responses; dataset populations draw rows
    uniformly with replacement (a drawn unit always equals some dataset row).
    Scores: perfect ranking scores by the response itself, random ranking by
    an iid uniform, the correlated-covariate model by its synthetic score,
    and dataset-covariate ranking by the named column.
    """
    if isinstance(strategy, CovariateRanking):
        if not isinstance(pop, DatasetPopulation):
            raise ValueError("covariate ranking requires a dataset population")
        if strategy.column not in pop.covariates:
            raise ValueError(
                f"ranking covariate {strategy.column!r} not found; "
                f"dataset has {sorted(pop.covariates)}"
            )
        if count < 1:
            raise ValueError("count must be >= 1")
        idx = rng.integers(0, pop.n_rows, size=count)
        responses = pop.response[idx]
        scores = pop.covariates[strategy.column][idx]
        return [Unit(int(x), float(s)) for x, s in zip(responses, scores)]

    responses = sample_responses(pop, count, rng)
    if isinstance(strategy, PerfectRanking):
        scores = responses.astype(np.float64)
    elif isinstance(strategy, RandomRanking):
        scores = rng.random(count)
    elif isinstance(strategy, DellClutterRanking):
        if not isinstance(pop, BernoulliPopulation):
            raise ValueError("the synthetic-covariate ranking model requires a Bernoulli population")
        p, lam = pop.p, strategy.correlation
        if not 0.0 < p < 1.0:
            raise ValueError(
                "the score model standardizes by sqrt(p(1-p)); p must lie strictly in (0, 1)"
            )
        z = rng.standard_normal(count)
        scores = lam * (responses - p) / sqrt(p * (1.0 - p)) + sqrt(1.0 - lam * lam) * z
    else:
        raise TypeError(f"unknown ranking strategy: {strategy!r}")
    return [Unit(int(x), float(s)) for x, s in zip(responses, scores)]


def rank_set(units: list[Unit], rng: np.random.Generator) -> list[int]:
    """Judgment-order a set: indices of ``units`` sorted ascending by score.

    Ties are broken by an exchangeable random key drawn fresh at each
    ranking event, so every ordering of tied units is equally likely and
    no deterministic input-order bias can creep in.
    """
    if not units:
        raise ValueError("cannot rank an empty set")
    jitter = rng.random(len(units))
    return sorted(range(len(units)), key=lambda i: (units[i].ranking_score, jitter[i]))
