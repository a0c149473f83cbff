"""Rank-based sampling designs for binary data: SRS, RSS and multistage RSS,
with proportion estimators, an exact efficiency oracle, and a reproducible
Monte Carlo engine."""

__version__ = "0.1.0"

from .core import (
    BernoulliPopulation,
    CovariateRanking,
    DatasetPopulation,
    DellClutterRanking,
    DesignSpec,
    PerfectRanking,
    RandomRanking,
    Unit,
    draw_units,
    gen_dell_clutter_score,
    rank_set,
    stream,
)
from .designs import RankedSample, draw_msrss, draw_rss, draw_srs, read_sample_csv, write_sample_csv
from .estimate import (
    EfficiencyReport,
    StratumProportions,
    efficiency_report,
    estimate_proportion,
    stratum_estimates,
    variance_design,
    variance_srs,
    wald_interval,
    z_quantile,
)
from .oracle import (
    ExactStrata,
    brute_force_enumerate,
    exact_efficiency,
    msrss_strata,
    poisson_binomial_tail,
    stage1_strata,
)

__all__ = [
    "BernoulliPopulation",
    "CovariateRanking",
    "DatasetPopulation",
    "DellClutterRanking",
    "DesignSpec",
    "EfficiencyReport",
    "ExactStrata",
    "PerfectRanking",
    "RandomRanking",
    "RankedSample",
    "StratumProportions",
    "Unit",
    "brute_force_enumerate",
    "draw_msrss",
    "draw_rss",
    "draw_srs",
    "draw_units",
    "efficiency_report",
    "estimate_proportion",
    "exact_efficiency",
    "gen_dell_clutter_score",
    "msrss_strata",
    "poisson_binomial_tail",
    "rank_set",
    "read_sample_csv",
    "stage1_strata",
    "stratum_estimates",
    "stream",
    "variance_design",
    "variance_srs",
    "wald_interval",
    "write_sample_csv",
    "z_quantile",
]
