import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ranksamp.oracle import (
    brute_force_enumerate,
    exact_efficiency,
    msrss_strata,
    poisson_binomial_tail,
    stage1_strata,
)

HALF = Fraction(1, 2)


class TestStage1:
    def test_fair_coin_m3(self):
        # brute force over the 2**3 equally likely outcomes
        assert stage1_strata(HALF, 3).probs == (Fraction(1, 8), HALF, Fraction(7, 8))

    @pytest.mark.parametrize("m", [1, 2, 5])
    def test_degenerate_populations(self, m):
        assert stage1_strata(Fraction(0), m).probs == (Fraction(0),) * m
        assert stage1_strata(Fraction(1), m).probs == (Fraction(1),) * m

    def test_quarter_m2(self):
        assert stage1_strata(Fraction(1, 4), 2).probs == (Fraction(1, 16), Fraction(7, 16))

    def test_float_input_stays_float(self):
        probs = stage1_strata(0.34, 3).probs
        assert all(isinstance(q, float) for q in probs)
        assert sum(probs) / 3 == pytest.approx(0.34, abs=1e-12)

    def test_rejects_bad_p(self):
        with pytest.raises(ValueError):
            stage1_strata(1.2, 3)


class TestPoissonBinomialTail:
    def test_fair_coin_order_stat_probs(self):
        # enumeration over the 8 outcomes of (1/8, 1/2, 7/8)
        assert poisson_binomial_tail((Fraction(1, 8), HALF, Fraction(7, 8)), 1) == Fraction(121, 128)

    def test_threshold_zero_is_certain(self):
        assert poisson_binomial_tail((0.3, 0.9), 0) == 1

    def test_all_zero_probs(self):
        assert poisson_binomial_tail((0, 0, 0), 1) == 0

    def test_binomial_special_case(self):
        # iid probs reduce to a binomial tail
        assert poisson_binomial_tail((HALF,) * 4, 2) == Fraction(11, 16)

    def test_range_checks(self):
        with pytest.raises(ValueError):
            poisson_binomial_tail((0.5, 1.5), 1)
        with pytest.raises(ValueError):
            poisson_binomial_tail((0.5,), 3)


class TestMsrssStrata:
    def test_stage2_fair_coin(self):
        assert msrss_strata(HALF, 3, 2).probs == (
            Fraction(7, 128),
            Fraction(64, 128),
            Fraction(121, 128),
        )

    def test_stage1_base_case(self):
        for p in (Fraction(1, 10), Fraction(3, 4)):
            assert msrss_strata(p, 4, 1) == stage1_strata(p, 4)

    def test_mean_identity_exact_full_grid(self):
        # consistent-ranking identity: the strata average to p, exactly
        for num in range(1, 10):
            p = Fraction(num, 10)
            for m in range(1, 7):
                for r in range(1, 6):
                    assert msrss_strata(p, m, r).mean() == p

    def test_nondecreasing_in_rank(self):
        for p in (Fraction(1, 10), HALF, Fraction(9, 10)):
            for m, r in ((2, 3), (5, 2), (6, 5)):
                probs = msrss_strata(p, m, r).probs
                assert all(a <= b for a, b in zip(probs, probs[1:]))

    def test_symmetry_complement_reverse(self):
        for num in (1, 3, 5, 7):
            p = Fraction(num, 10)
            for m, r in ((3, 2), (4, 3), (5, 4)):
                probs = msrss_strata(p, m, r).probs
                flipped = tuple(1 - q for q in reversed(msrss_strata(1 - p, m, r).probs))
                assert flipped == probs

    def test_variance_strictly_decreasing_in_stages(self):
        for num in range(1, 10):
            p = Fraction(num, 10)
            for m in range(2, 7):
                variances = [
                    sum(q * (1 - q) for q in msrss_strata(p, m, r).probs)
                    for r in range(1, 6)
                ]
                assert all(a > b for a, b in zip(variances, variances[1:]))


class TestBruteForce:
    def test_m2_single_stage_16_cases(self):
        assert brute_force_enumerate(HALF, 2, 1).probs == (Fraction(1, 4), Fraction(3, 4))

    def test_set_size_one_is_srs(self):
        for p in (Fraction(2, 5), 0.31):
            assert brute_force_enumerate(p, 1, 2).probs == (p,)

    def test_m2_two_stages_256_cases(self):
        assert brute_force_enumerate(HALF, 2, 2).probs == msrss_strata(HALF, 2, 2).probs

    def test_size_guard(self):
        with pytest.raises(ValueError, match="guard"):
            brute_force_enumerate(HALF, 3, 2)  # 27 units > 20

    @given(st.integers(min_value=1, max_value=19), st.sampled_from([(2, 1), (3, 1), (2, 2)]))
    @settings(max_examples=15, deadline=None)
    def test_matches_recursion_exactly(self, num, mr):
        p = Fraction(num, 20)
        m, r = mr
        assert brute_force_enumerate(p, m, r).probs == msrss_strata(p, m, r).probs


class TestExactEfficiency:
    def test_single_stage_fair_coin(self):
        report = exact_efficiency(0.5, 3, 1)
        assert report.pssr == pytest.approx(37.5, abs=1e-10)
        assert report.re == pytest.approx(1.6, abs=1e-10)
        assert report.provenance == "exact"
        assert report.mc_stderr is None

    def test_two_stage_fair_coin(self):
        report = exact_efficiency(0.5, 3, 2)
        assert report.var_design == pytest.approx(5790 / 147456, abs=1e-12)
        assert report.pssr == pytest.approx(52.880859375, abs=1e-9)

    def test_degenerate_population_flagged(self):
        report = exact_efficiency(0.0, 3, 1)
        assert report.degenerate
        assert report.var_srs == 0.0 and report.var_design == 0.0
        assert math.isnan(report.re)

    def test_headline_cell(self):
        report = exact_efficiency(0.5, 5, 4)
        assert report.pssr == pytest.approx(76.9408, abs=1e-3)
