import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ranksamp.core import BernoulliPopulation, DesignSpec, PerfectRanking, stream
from ranksamp.designs import RankedSample, draw_msrss, read_sample_csv
from ranksamp.estimate import (
    efficiency_report,
    estimate_proportion,
    stratum_estimates,
    variance_design,
    variance_srs,
    wald_interval,
    z_quantile,
)
from ranksamp.oracle import exact_efficiency, msrss_strata


def sample_from(values, kind="msrss", r=2):
    vals = np.asarray(values, dtype=np.int8)
    m, n = vals.shape
    spec = DesignSpec(kind=kind, m=m, n=n, r=r if kind == "msrss" else 1)
    return RankedSample(design=spec, values=vals, units_identified=n * spec.units_per_cycle)


class TestEstimateProportion:
    def test_all_zero(self):
        assert estimate_proportion(sample_from([[0], [0], [0]])) == 0.0

    def test_worked_single_cycle_sample(self, example_sample_csv):
        # bundled single-cycle file with measured values 0, 0, 1
        sample = read_sample_csv(example_sample_csv)
        assert estimate_proportion(sample) == pytest.approx(1 / 3)

    def test_mean_of_two_cycles(self):
        assert estimate_proportion(sample_from([[1, 1], [0, 1]])) == 0.75


class TestVarianceFormulas:
    def test_variance_srs_values(self):
        assert variance_srs(0.5, 5) == pytest.approx(0.05)
        assert variance_srs(0.0, 10) == 0.0
        assert variance_srs(0.34, 699) == pytest.approx(0.34 * 0.66 / 699)

    def test_variance_design_fair_coin_stage1(self):
        assert variance_design((1 / 8, 1 / 2, 7 / 8), 1, 3) == pytest.approx(30 / 576)

    def test_variance_design_zero_strata(self):
        assert variance_design((0.0, 0.0), 1, 2) == 0.0

    def test_variance_design_stage2(self):
        assert variance_design((7 / 128, 1 / 2, 121 / 128), 1, 3) == pytest.approx(
            5790 / 147456, abs=1e-12
        )

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="stratum"):
            variance_design((0.5, 0.5), 1, 3)

    @given(
        st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=8),
        st.integers(min_value=1, max_value=50),
    )
    @settings(max_examples=200)
    def test_never_beats_srs_at_equal_size(self, probs, n):
        # algebraic consequence of the variance decomposition: for any
        # stratum vector averaging to p, the design variance is <= p(1-p)/(nm)
        m = len(probs)
        p = sum(probs) / m
        assert variance_design(probs, n, m) <= variance_srs(p, n * m) + 1e-15


class TestWaldInterval:
    def test_degenerate_strata_collapse_interval(self):
        sample = sample_from([[1, 1], [0, 0], [1, 1]])
        lo, hi = wald_interval(sample, 0.95)
        assert (lo, hi) == (pytest.approx(2 / 3), pytest.approx(2 / 3))

    def test_all_ones(self):
        sample = sample_from([[1, 1], [1, 1], [1, 1]])
        assert wald_interval(sample, 0.95) == (1.0, 1.0)

    def test_single_cycle_needs_fallback(self):
        sample = sample_from([[1], [0], [1]])
        with pytest.raises(ValueError, match="n >= 2"):
            wald_interval(sample, 0.95)
        lo, hi = wald_interval(sample, 0.95, fallback_variance=True)
        p_hat = 2 / 3
        half = z_quantile(0.95) * math.sqrt(p_hat * (1 - p_hat) / 3)
        assert lo == pytest.approx(max(0.0, p_hat - half))
        assert hi == pytest.approx(min(1.0, p_hat + half))

    def test_clipped_to_unit_interval(self):
        sample = sample_from([[0, 0, 1], [1, 1, 1], [1, 1, 1]])
        lo, hi = wald_interval(sample, 0.999)
        assert 0.0 <= lo <= hi <= 1.0

    def test_interval_narrows_with_cycles(self):
        pop = BernoulliPopulation(0.5)
        small = draw_msrss(pop, 3, 1, 10, PerfectRanking(), stream(1))
        big = draw_msrss(pop, 3, 1, 1000, PerfectRanking(), stream(2))
        lo1, hi1 = wald_interval(small)
        lo2, hi2 = wald_interval(big)
        assert hi2 - lo2 < hi1 - lo1


class TestZQuantile:
    def test_known_values(self):
        assert z_quantile(0.95) == pytest.approx(1.959963985, abs=1e-8)
        assert z_quantile(0.99) == pytest.approx(2.575829304, abs=1e-8)

    def test_domain(self):
        with pytest.raises(ValueError):
            z_quantile(1.0)


class TestEfficiencyReport:
    def test_stage1_exact_cell(self):
        report = efficiency_report(0.0833333333333, 0.0520833333333)
        assert report.re == pytest.approx(1.6, abs=1e-9)
        assert report.pssr == pytest.approx(37.5, abs=1e-7)
        assert report.provenance == "exact"

    def test_equal_variances(self):
        report = efficiency_report(0.01, 0.01)
        assert report.re == 1.0
        assert report.pssr == 0.0

    def test_stage2_exact_cell(self):
        report = efficiency_report(1 / 12, 5790 / 147456)
        assert report.pssr == pytest.approx(52.880859375, abs=1e-9)

    def test_zero_design_variance_is_infinite_re(self):
        report = efficiency_report(0.01, 0.0)
        assert math.isinf(report.re)
        assert report.pssr == 100.0

    def test_double_zero_flagged_degenerate(self):
        report = efficiency_report(0.0, 0.0)
        assert report.degenerate
        assert math.isnan(report.re)

    def test_provenance_follows_stderr(self):
        assert efficiency_report(0.02, 0.01, mc_stderr=0.001).provenance == "monte-carlo"

    def test_json_fields_exact(self):
        report = efficiency_report(0.02, 0.01, mc_stderr=0.001)
        assert list(report.to_json_dict()) == [
            "var_srs", "var_design", "re", "pssr", "mc_stderr", "provenance",
        ]

    def test_re_invariant_to_cycle_count(self):
        probs = msrss_strata(0.3, 4, 2).as_floats()
        for n in (1, 2, 8):
            report = efficiency_report(variance_srs(0.3, 4 * n), variance_design(probs, n, 4))
            assert report.re == pytest.approx(
                efficiency_report(variance_srs(0.3, 4), variance_design(probs, 1, 4)).re
            )

    def test_re_symmetric_in_p(self):
        for m, r in ((3, 1), (4, 2), (5, 3)):
            for p in (0.1, 0.25, 0.45):
                a = exact_efficiency(p, m, r)
                b = exact_efficiency(1 - p, m, r)
                assert a.re == pytest.approx(b.re, rel=1e-9)


class TestStratumEstimates:
    def test_row_means(self):
        sample = sample_from([[1, 1], [0, 1], [0, 0]])
        assert stratum_estimates(sample).tolist() == [1.0, 0.5, 0.0]
