import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ranksamp.core import (
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


def test_dell_clutter_score_lambda_one_kills_noise():
    assert gen_dell_clutter_score(1, 0.5, 1.0, z=123.4) == pytest.approx(1.0)


def test_dell_clutter_score_lambda_zero_is_noise_only():
    assert gen_dell_clutter_score(0, 0.5, 0.0, z=0.37) == pytest.approx(0.37)


def test_dell_clutter_score_arithmetic():
    assert gen_dell_clutter_score(1, 0.5, 0.6, z=0.0) == pytest.approx(0.6)


@pytest.mark.parametrize("p", [0.0, 1.0])
def test_dell_clutter_score_rejects_degenerate_p(p):
    with pytest.raises(ValueError):
        gen_dell_clutter_score(1, p, 0.5, z=0.0)


def test_dell_clutter_correlation_matches_lambda():
    # the defining property of the model: corr(X, Y) = lambda
    rng = stream(101)
    p = 0.5
    for lam in (0.3, 0.7, 1.0):
        x = (rng.random(100_000) < p).astype(float)
        z = rng.standard_normal(100_000)
        y = np.array([gen_dell_clutter_score(int(xi), p, lam, zi) for xi, zi in zip(x, z)])
        assert abs(np.corrcoef(x, y)[0, 1] - lam) < 0.01


def test_rank_set_strict_scores():
    units = [Unit(0, 3.0), Unit(0, 1.0), Unit(0, 2.0)]
    assert rank_set(units, stream(0)) == [1, 2, 0]


def test_rank_set_perfect_scores_orders_zero_before_one():
    units = [Unit(1, 1.0), Unit(0, 0.0)]
    assert rank_set(units, stream(0)) == [1, 0]


def test_rank_set_tie_break_is_fair():
    units = [Unit(0, 2.0), Unit(1, 2.0)]
    rng = stream(7)
    first = sum(rank_set(units, rng)[0] == 0 for _ in range(100_000))
    assert abs(first / 100_000 - 0.5) < 0.01


def test_rank_set_empty_rejected():
    with pytest.raises(ValueError):
        rank_set([], stream(0))


@given(st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=1, max_size=12),
       st.integers(min_value=0, max_value=2**31 - 1))
def test_rank_set_returns_sorted_permutation(scores, seed):
    units = [Unit(0, s) for s in scores]
    order = rank_set(units, stream(seed))
    assert sorted(order) == list(range(len(units)))
    ranked = [scores[i] for i in order]
    assert ranked == sorted(ranked)


def test_draw_units_bernoulli_endpoints():
    rng = stream(1)
    ones = draw_units(BernoulliPopulation(1.0), 5, RandomRanking(), rng)
    zeros = draw_units(BernoulliPopulation(0.0), 5, RandomRanking(), rng)
    assert [u.response for u in ones] == [1] * 5
    assert [u.response for u in zeros] == [0] * 5


def test_draw_units_singleton_dataset_with_replacement():
    pop = DatasetPopulation(response=np.array([1]), covariates={"score": np.array([4])})
    units = draw_units(pop, 3, CovariateRanking("score"), stream(2))
    assert [u.response for u in units] == [1, 1, 1]
    assert [u.ranking_score for u in units] == [4.0, 4.0, 4.0]


def test_draw_units_never_fabricates_dataset_values():
    rng = stream(3)
    resp = np.array([0, 1, 1, 0, 1])
    cov = np.array([2, 9, 5, 3, 7])
    pop = DatasetPopulation(response=resp, covariates={"c": cov})
    seen = set(zip(resp.tolist(), cov.tolist()))
    for u in draw_units(pop, 500, CovariateRanking("c"), rng):
        assert (u.response, int(u.ranking_score)) in seen


def test_draw_units_missing_covariate_column():
    pop = DatasetPopulation(response=np.array([0, 1]), covariates={"a": np.array([1, 2])})
    with pytest.raises(ValueError, match="not found"):
        draw_units(pop, 2, CovariateRanking("b"), stream(0))


def test_covariate_ranking_needs_dataset():
    with pytest.raises(ValueError, match="dataset"):
        draw_units(BernoulliPopulation(0.5), 2, CovariateRanking("a"), stream(0))


def test_dell_clutter_ranking_needs_nondegenerate_bernoulli():
    with pytest.raises(ValueError):
        draw_units(BernoulliPopulation(1.0), 2, DellClutterRanking(0.5), stream(0))
    with pytest.raises(ValueError):
        draw_units(
            DatasetPopulation(response=np.array([0, 1])), 2, DellClutterRanking(0.5), stream(0)
        )


def test_perfect_scores_are_responses():
    units = draw_units(BernoulliPopulation(0.5), 50, PerfectRanking(), stream(4))
    assert all(u.ranking_score == float(u.response) for u in units)


def test_population_validation():
    with pytest.raises(ValueError):
        BernoulliPopulation(1.5)
    with pytest.raises(ValueError):
        DatasetPopulation(response=np.array([0, 2]))
    with pytest.raises(ValueError):
        DatasetPopulation(response=np.array([0, 1]), covariates={"a": np.array([1])})
    with pytest.raises(ValueError):
        DellClutterRanking(1.2)


def test_design_spec_validation():
    spec = DesignSpec(kind="msrss", m=3, n=2, r=2)
    assert spec.total == 6
    assert spec.units_per_cycle == 27
    assert DesignSpec(kind="srs", m=7, n=1).units_per_cycle == 7
    assert DesignSpec(kind="rss", m=3, n=4).units_per_cycle == 9
    with pytest.raises(ValueError):
        DesignSpec(kind="rss", m=3, n=1, r=2)
    with pytest.raises(ValueError):
        DesignSpec(kind="quota", m=3, n=1)
    with pytest.raises(ValueError):
        DesignSpec(kind="srs", m=0, n=1)


def test_streams_are_reproducible_and_independent():
    a1 = stream(42, 1, 2).random(4)
    a2 = stream(42, 1, 2).random(4)
    b = stream(42, 1, 3).random(4)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, b)
