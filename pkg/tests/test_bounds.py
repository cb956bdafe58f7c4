import math

import numpy as np
import pytest

from entropx.bounds import (
    BoundReport,
    check_min_probability_bound,
    check_moment_bound,
    concentration_margin,
    conditioned_ratio,
    fuzz_bounds,
    high_entropy_ratio_bound,
    low_entropy_moment_bound,
    moments,
    tightness_construction,
)

# Frozen at 50-digit precision: ratio of the m=16, gamma=0.5 construction.
TIGHTNESS_RATIO_M16 = 4.1882557549691044


class TestMoments:
    def test_uniform_four(self):
        assert moments([0.25] * 4) == (2.0, 4.0)

    def test_point_mass(self):
        assert moments([1.0]) == (0.0, 0.0)

    def test_two_point_base_case(self):
        # the minimal-support case: the ratio is forced to 1
        h, m2 = moments([0.5, 0.5])
        assert (h, m2) == (1.0, 1.0)
        assert m2 / h ** 2 == 1.0

    def test_ignores_zeros(self):
        assert moments([0.5, 0.5, 0.0]) == (1.0, 1.0)

    def test_sub_distribution_allowed(self):
        h, m2 = moments([0.25, 0.25])
        assert h == pytest.approx(1.0)
        assert m2 == pytest.approx(2.0)

    def test_jensen(self):
        gen = np.random.Generator(np.random.PCG64(0))
        for _ in range(50):
            p = gen.standard_exponential(int(gen.integers(1, 200)))
            p /= p.sum()
            h, m2 = moments(p)
            assert m2 >= h * h - 1e-12

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            moments([0.5, -0.1])

    def test_rejects_excess_mass(self):
        with pytest.raises(ValueError):
            moments([0.9, 0.9])


class TestMomentBound:
    def test_uniform_high_entropy(self):
        report = check_moment_bound([2.0 ** -10] * (2 ** 10), m=10)
        assert report.satisfied is True
        assert report.ratio == pytest.approx(1.0)
        assert report.bound_high_entropy == high_entropy_ratio_bound(10)

    def test_boundary_entropy_runs_both_checks(self):
        report = check_moment_bound([0.5, 0.5], m=2)
        assert report.entropy == 1.0
        assert report.satisfied is True

    def test_low_entropy_regime(self):
        report = check_moment_bound([0.9, 0.05, 0.05], m=2)
        assert report.entropy < 1.0
        assert report.satisfied is True
        assert report.second_moment <= low_entropy_moment_bound(2)

    def test_out_of_scope(self):
        report = check_moment_bound([0.9, 0.1], m=1)
        assert report.satisfied is None
        assert "m >= 2" in report.note

    def test_sub_distribution_low_entropy(self):
        gen = np.random.Generator(np.random.PCG64(5))
        for _ in range(200):
            r = 0.5 + 0.5 * gen.random()
            size = int(gen.integers(1, 64))
            q = gen.standard_exponential(size)
            p = (1 - r) * q / q.sum()
            h, m2 = moments(p)
            if h <= 1.0:
                report = check_moment_bound(p, m=max(2, math.ceil(math.log2(size + 1))))
                assert report.satisfied is True


class TestMinProbabilityBound:
    def test_uniform_equality(self):
        n = 8
        report = check_min_probability_bound([2.0 ** -n] * (2 ** n), n)
        assert report.satisfied is True
        assert report.second_moment == pytest.approx(n * n)
        assert report.qif_bound == pytest.approx(n * n)

    def test_two_point(self):
        report = check_min_probability_bound([0.5, 0.5], 1)
        assert report.satisfied is True
        assert report.second_moment == pytest.approx(report.qif_bound)

    def test_precondition_violation(self):
        report = check_min_probability_bound([0.9, 0.1], 2)
        assert report.satisfied is None
        assert "precondition" in report.note

    def test_count_tables(self):
        gen = np.random.Generator(np.random.PCG64(9))
        for _ in range(200):
            n = int(gen.integers(1, 12))
            q = int(gen.integers(1, 2 ** n + 1))
            size = int(gen.integers(1, q + 1))
            cuts = np.sort(gen.choice(q - 1, size=size - 1, replace=False)) + 1 \
                if size > 1 else np.array([], dtype=int)
            counts = np.diff(np.concatenate(([0], cuts, [q])))
            report = check_min_probability_bound(counts / q, n)
            assert report.satisfied is True


class TestConditionedRatio:
    def test_single_remaining_outcome(self):
        assert conditioned_ratio([0.75, 0.25], exclude_index=0) == 1.0

    def test_everything_excluded(self):
        assert conditioned_ratio([1.0], exclude_index=0) is None

    def test_unconditioned_matches_moments(self):
        p = [0.5, 0.3, 0.2]
        h, m2 = moments(p)
        assert conditioned_ratio(p) == pytest.approx(m2 / h ** 2)


class TestConcentrationMargin:
    @pytest.mark.parametrize("eps", [0.8, 0.3])
    def test_uniform(self, eps):
        margin = concentration_margin([2.0 ** -8] * 256, m=8, epsilon=eps)
        assert margin is not None and margin <= 1 / 6

    @pytest.mark.parametrize("eps", [0.8, 0.3])
    def test_dominated(self, eps):
        p = [0.75] + [0.25 / 255] * 255
        margin = concentration_margin(p, m=8, epsilon=eps)
        assert margin is not None and margin <= 1 / 6

    def test_point_mass_degenerate(self):
        assert concentration_margin([1.0], m=1, epsilon=0.5) is None

    def test_qif_sizing(self):
        p = np.full(16, 1 / 16)
        assert concentration_margin(p, m=4, epsilon=0.5, n=4) <= 1 / 6


class TestFuzz:
    @pytest.mark.parametrize("regime", ["high_entropy", "low_entropy_sub", "min_prob"])
    def test_no_violations_quick(self, regime):
        summary = fuzz_bounds(regime, 2000, seed=3)
        assert summary.ok, summary.violations[:3]

    def test_unknown_regime(self):
        with pytest.raises(ValueError):
            fuzz_bounds("nope", 10, seed=0)

    def test_reports_collected_on_request(self):
        summary = fuzz_bounds("high_entropy", 50, seed=1, collect_reports=True)
        assert len(summary.reports) == 50
        assert all(isinstance(c.report, BoundReport) for c in summary.reports)

    def test_deterministic_for_seed(self):
        a = fuzz_bounds("min_prob", 100, seed=8, collect_reports=True)
        b = fuzz_bounds("min_prob", 100, seed=8, collect_reports=True)
        assert [c.report.entropy for c in a.reports] == [c.report.entropy for c in b.reports]


class TestTightnessConstruction:
    def test_entropy_hits_target(self):
        for m in (8, 12, 16):
            c = tightness_construction(m, 0.5)
            assert abs(c.entropy - (1.0 + c.delta_target)) < 1e-9
            h, m2 = moments(c.probabilities())
            assert abs(h - c.entropy) < 1e-9
            assert abs(m2 - c.second_moment) < 1e-9

    def test_mass_sums_to_one(self):
        for m in (3, 8, 16, 20):
            c = tightness_construction(m, 0.5)
            total = math.fsum(p * count for p, count in c.weights)
            assert abs(total - 1.0) < 1e-12

    def test_frozen_ratio_regression(self):
        c = tightness_construction(16, 0.5)
        assert c.ratio == pytest.approx(TIGHTNESS_RATIO_M16, rel=1e-8)
        assert c.ratio > 0.5 * math.sqrt(16)

    def test_monotone_in_m(self):
        ratios = [tightness_construction(m, 0.5).ratio for m in (8, 12, 16, 20)]
        assert ratios == sorted(ratios)
        assert ratios[0] < ratios[-1]

    def test_gamma_sweep_converges(self):
        for gamma in (0.1, 0.25, 0.5, 0.75, 0.9):
            for m in (3, 4, 10, 24):
                c = tightness_construction(m, gamma)
                assert abs(c.entropy - (1.0 + c.delta_target)) < 1e-9

    def test_domain(self):
        with pytest.raises(ValueError):
            tightness_construction(2, 0.5)
        with pytest.raises(ValueError):
            tightness_construction(8, 0.0)
        with pytest.raises(ValueError):
            tightness_construction(8, 1.0)

    def test_materialization_cap(self):
        c = tightness_construction(24, 0.5)
        with pytest.raises(ResourceWarning):
            c.probabilities()
