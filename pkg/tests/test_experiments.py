"""Metrics, significance tests, and the batch runner."""

import numpy as np
import pytest

from millibots.errors import ScenarioError
from millibots.experiments import (
    compare_conditions,
    displacement_metrics,
    records_to_jsonl,
    run_experiment,
    tukey_hsd,
    welch_t_test,
)


class TestDisplacementMetrics:
    def test_three_four_five(self):
        m = displacement_metrics([(0.0, 0.0), (3e-3, 4e-3)])
        assert m["euclidean_mm"] == pytest.approx(5.0)
        assert m["x_mm"] == pytest.approx(3.0)
        assert m["y_mm"] == pytest.approx(4.0)

    def test_l_path_manhattan(self):
        m = displacement_metrics([(0.0, 0.0), (3e-3, 0.0), (3e-3, 4e-3)])
        assert m["manhattan_mm"] == pytest.approx(7.0)
        assert m["euclidean_mm"] == pytest.approx(5.0)
        assert m["endpoint_l1_mm"] == pytest.approx(7.0)

    def test_backtracking_inflates_path_manhattan(self):
        straight = displacement_metrics([(0.0, 0.0), (5e-3, 0.0)])
        zigzag = displacement_metrics(
            [(0.0, 0.0), (3e-3, 0.0), (2e-3, 0.0), (5e-3, 0.0)]
        )
        assert zigzag["manhattan_mm"] > straight["manhattan_mm"]
        assert zigzag["euclidean_mm"] == straight["euclidean_mm"]
        # sum-over-samples oracle
        pts = np.array([(0.0, 0.0), (3e-3, 0.0), (2e-3, 0.0), (5e-3, 0.0)])
        oracle = np.abs(np.diff(pts, axis=0)).sum() * 1e3
        assert zigzag["manhattan_mm"] == pytest.approx(oracle)

    def test_single_sample_degenerate(self):
        m = displacement_metrics([(1e-3, 1e-3)])
        assert m["degenerate"]
        assert m["euclidean_mm"] == 0.0

    def test_metric_inequalities(self, rng):
        for _ in range(50):
            pts = rng.normal(0.0, 5e-3, (10, 2))
            m = displacement_metrics(pts)
            assert m["euclidean_mm"] <= m["endpoint_l1_mm"] + 1e-12
            assert m["endpoint_l1_mm"] <= np.sqrt(2.0) * m["euclidean_mm"] + 1e-12
            assert m["endpoint_l1_mm"] <= m["manhattan_mm"] + 1e-12
            assert m["x_mm"] <= m["euclidean_mm"] + 1e-12
            assert m["y_mm"] <= m["euclidean_mm"] + 1e-12


class TestSignificance:
    def test_same_distribution_rarely_significant(self):
        rejections = 0
        for seed in range(50):
            r = np.random.default_rng(seed)
            p = compare_conditions(r.normal(0, 1, 100), r.normal(0, 1, 100))
            if p <= 0.05:
                rejections += 1
        assert rejections <= 5  # >= 90% of repetitions give p > 0.05

    def test_five_sigma_effect(self):
        r = np.random.default_rng(0)
        p = compare_conditions(r.normal(0, 1, 100), r.normal(5, 1, 100))
        assert p < 1e-3

    def test_identical_samples_p_one(self):
        x = np.arange(10.0)
        assert compare_conditions(x, x.copy()) == pytest.approx(1.0)

    def test_zero_variance_cases(self):
        same = np.full(5, 2.0)
        other = np.full(5, 3.0)
        assert compare_conditions(same, same.copy()) == 1.0
        assert compare_conditions(same, other) == 0.0

    def test_multiway_tukey_keys(self):
        r = np.random.default_rng(3)
        p = tukey_hsd({"a": r.normal(0, 1, 30), "b": r.normal(0, 1, 30),
                       "c": r.normal(4, 1, 30)})
        assert set(p) == {"a|b", "a|c", "b|c"}
        assert p["a|b"] > 0.05
        assert p["a|c"] < 1e-3

    def test_welch_agrees_directionally(self):
        r = np.random.default_rng(5)
        a, b = r.normal(0, 1, 60), r.normal(2, 1, 60)
        assert welch_t_test(a, b) < 1e-3
        assert welch_t_test(a, a.copy()) == 1.0

    def test_minimum_sample_size(self):
        with pytest.raises(ScenarioError):
            tukey_hsd({"a": np.array([1.0]), "b": np.array([1.0, 2.0])})


class TestRunExperiment:
    def test_gait_experiment_significance_pattern(self):
        summary, records = run_experiment(
            {"scenario": "gait", "trials": 60, "seed": 0,
             "conditions": ["fixed:H", "fixed:HM", "free:H", "free:HM"]}
        )
        assert summary.p_values["fixed:H|fixed:HM"] < 0.05
        assert summary.p_values["free:H|free:HM"] > 0.05
        means = {c.condition: c.mean for c in summary.conditions}
        assert means["fixed:HM"] > means["fixed:H"]
        assert len(records) == 240

    def test_records_reproducible_bit_for_bit(self):
        spec = {"scenario": "gait", "trials": 10, "seed": 42,
                "conditions": ["fixed:H"]}
        _, r1 = run_experiment(spec)
        _, r2 = run_experiment(spec)
        assert records_to_jsonl(r1) == records_to_jsonl(r2)

    def test_assembly_experiment_monotone_medians(self):
        summary, records = run_experiment(
            {"scenario": "assembly", "trials": 3, "seed": 1,
             "separations_mm": [3.5, 5.5], "timeout_s": 30}
        )
        by_cond = {}
        for r in records:
            by_cond.setdefault(r.condition, []).append(r.assembly_time_s)
        med = {c: np.median(v) for c, v in by_cond.items()}
        assert med["3.5mm"] < med["5.5mm"]

    def test_reconfiguration_rates_and_times_ordered(self):
        summary, records = run_experiment(
            {"scenario": "reconfiguration", "trials": 12, "seed": 0}
        )
        by = {c.condition: c for c in summary.conditions}
        grip = by["chain_to_gripper"]
        square = by["chain_to_square"]
        assert grip.success_rate >= 0.85
        assert square.success_rate < grip.success_rate
        assert grip.mean_completion_s < square.mean_completion_s

    def test_too_few_trials_rejected(self):
        with pytest.raises(ScenarioError):
            run_experiment({"scenario": "gait", "trials": 1})

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ScenarioError):
            run_experiment({"scenario": "teleport", "trials": 5})

    def test_trial_record_invariants(self):
        _, records = run_experiment(
            {"scenario": "gait", "trials": 20, "seed": 3, "conditions": ["fixed:HM"]}
        )
        for r in records:
            assert r.euclidean_mm <= r.endpoint_l1_mm + 1e-9
            assert r.endpoint_l1_mm <= np.sqrt(2.0) * r.euclidean_mm + 1e-9
            assert r.x_mm <= r.euclidean_mm + 1e-9
            assert r.y_mm <= r.euclidean_mm + 1e-9
