import dataclasses

import numpy as np
import pytest

from edabench.harness import (
    AlgorithmSpec,
    ConfigError,
    ExperimentSpec,
    ObjectiveSpec,
    RunRecord,
    SweepSpec,
    default_eval_cap,
    default_generation_cap,
    nearest_rank,
    run_experiment,
    run_sweep,
    summarize,
    write_runs_csv,
    write_summary_csv,
)


def make_spec(**overrides) -> ExperimentSpec:
    data = {
        "objective": {"name": "onemax", "n": 20},
        "algorithm": {"kind": "smart-restart", "kernel": "cga", "budget_factor": 16},
        "repetitions": 6,
        "base_seed": 91,
        "eval_cap": None,
    }
    data.update(overrides)
    return ExperimentSpec.from_dict(data)


class TestSummaries:
    def _records(self, values, axis="a", successes=None):
        successes = successes or [True] * len(values)
        return [
            RunRecord(axis, i + 1, ok, v, v // 2, 0.0)
            for i, (v, ok) in enumerate(zip(values, successes))
        ]

    def test_three_points(self):
        rows = summarize(self._records([10, 20, 30]))
        assert (rows[0].median, rows[0].q1, rows[0].q3) == (20, 10, 30)

    def test_twenty_points_nearest_rank(self):
        rows = summarize(self._records(list(range(1, 21))))
        assert (rows[0].median, rows[0].q1, rows[0].q3) == (10, 5, 15)

    def test_all_censored_at_cap(self):
        rows = summarize(self._records([1000] * 5, successes=[False] * 5))
        assert rows[0].median == 1000
        assert rows[0].successes == 0 and rows[0].censored == 5

    def test_success_plus_censored_is_repetitions(self):
        rows = summarize(self._records([5, 6, 7, 8], successes=[True, False, True, False]))
        assert rows[0].successes + rows[0].censored == 4

    def test_quartile_order(self):
        rows = summarize(self._records([3, 1, 4, 1, 5, 9, 2, 6]))
        assert rows[0].q1 <= rows[0].median <= rows[0].q3

    def test_empty_group_rejected(self):
        with pytest.raises(ValueError):
            nearest_rank([], 0.5)


class TestCaps:
    def test_onemax_formula(self):
        assert default_generation_cap("onemax", 100) == int(np.ceil(100**4 * np.log(100)))

    def test_jump_cap_conversion(self):
        spec = ObjectiveSpec(name="jump", n=50, k=10)
        assert default_eval_cap(spec, 2) == 2 * 50**5 == 625_000_000

    def test_combinatorial_caps(self):
        assert default_eval_cap(ObjectiveSpec(name="maxcut", instance="x"), 2) == 15_000_000
        assert default_eval_cap(ObjectiveSpec(name="bipartition", instance="x"), 2) == 3_000_000

    def test_dlb_and_leadingones(self):
        assert default_generation_cap("leadingones", 50) == 50**5
        assert default_generation_cap("dlb", 30) == 10 * 30**5


class TestConfigValidation:
    def test_missing_sections(self):
        with pytest.raises(ConfigError):
            ExperimentSpec.from_dict({"objective": {"name": "onemax", "n": 5}})

    def test_unknown_objective(self):
        with pytest.raises(ConfigError):
            ObjectiveSpec.from_dict({"name": "needle", "n": 5})

    def test_jump_needs_k(self):
        with pytest.raises(ConfigError):
            ObjectiveSpec.from_dict({"name": "jump", "n": 5})

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            AlgorithmSpec.from_dict({"kind": "cmaes"})

    def test_kernel_needs_parameters(self):
        with pytest.raises(ConfigError):
            AlgorithmSpec.from_dict({"kind": "cga"})
        with pytest.raises(ConfigError):
            AlgorithmSpec.from_dict({"kind": "pbil", "lambda": 10})
        with pytest.raises(ConfigError):
            AlgorithmSpec.from_dict({"kind": "smart-restart"})

    def test_budget_factor_names(self):
        spec = AlgorithmSpec.from_dict(
            {"kind": "smart-restart", "kernel": "cga", "budget_factor": "conservative"}
        )
        assert spec.budget_factor == "conservative"
        with pytest.raises(ConfigError):
            AlgorithmSpec.from_dict(
                {"kind": "smart-restart", "kernel": "cga", "budget_factor": "bold"}
            )

    def test_sweep_values_must_be_sorted_distinct(self):
        base = {
            "objective": {"name": "onemax", "n": 10},
            "algorithm": {"kind": "cga", "mu": 4},
            "repetitions": 2,
        }
        with pytest.raises(ConfigError):
            SweepSpec.from_dict({**base, "sweep": {"parameter": "mu", "values": [4, 2]}})
        with pytest.raises(ConfigError):
            SweepSpec.from_dict({**base, "sweep": {"parameter": "mu", "values": [2, 2]}})


class TestRunExperiment:
    def test_deterministic_records(self):
        spec = make_spec()
        a = run_experiment(spec)
        b = run_experiment(spec)
        strip = lambda recs: [dataclasses.replace(r, wall_time=0.0) for r in recs]
        assert strip(a) == strip(b)

    def test_worker_pool_matches_serial(self):
        serial = run_experiment(make_spec(workers=1))
        parallel = run_experiment(make_spec(workers=4))
        assert [dataclasses.replace(r, wall_time=0.0) for r in serial] == [
            dataclasses.replace(r, wall_time=0.0) for r in parallel
        ]

    def test_byte_identical_csv(self, tmp_path):
        spec = make_spec()
        for name, workers in (("a", 1), ("b", 3)):
            records = run_experiment(dataclasses.replace(spec, workers=workers))
            write_runs_csv(records, tmp_path / f"{name}.csv")
            write_summary_csv(summarize(records), tmp_path / f"{name}.sum.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.sum.csv").read_bytes() == (tmp_path / "b.sum.csv").read_bytes()

    def test_zero_cap_censors_at_zero(self):
        spec = make_spec(
            algorithm={"kind": "cga", "mu": 8}, repetitions=1, eval_cap=0
        )
        records = run_experiment(spec)
        assert len(records) == 1
        assert not records[0].success
        assert records[0].evaluations == 0

    def test_censored_records_report_cap(self):
        spec = make_spec(
            objective={"name": "jump", "n": 30, "k": 15},
            algorithm={"kind": "cga", "mu": 4},
            repetitions=3,
            eval_cap=500,
        )
        records = run_experiment(spec)
        for rec in records:
            assert not rec.success
            assert rec.evaluations == 500

    def test_success_records_keep_exact_counts(self):
        records = run_experiment(make_spec(eval_cap=10**7))
        assert all(rec.success for rec in records)
        assert all(rec.evaluations < 10**7 for rec in records)

    def test_axis_defaults(self):
        records = run_experiment(make_spec(repetitions=1))
        assert records[0].axis == "smart-restart"
        records = run_experiment(
            make_spec(algorithm={"kind": "cga", "mu": 32}, repetitions=1)
        )
        assert records[0].axis == 32


class TestSweep:
    def test_sweep_rows(self):
        sweep = SweepSpec.from_dict(
            {
                "objective": {"name": "onemax", "n": 12},
                "algorithm": {"kind": "cga", "mu": 2},
                "repetitions": 3,
                "base_seed": 5,
                "eval_cap": 20000,
                "sweep": {"parameter": "mu", "values": [4, 8, 16]},
            }
        )
        records, rows = run_sweep(sweep)
        assert len(records) == 9
        assert [row.axis for row in rows] == [4, 8, 16]
        for row in rows:
            assert row.successes + row.censored == 3

    def test_power_of_two_sweep_has_one_row_per_value(self):
        values = [2**j for j in range(1, 11)]
        sweep = SweepSpec.from_dict(
            {
                "objective": {"name": "onemax", "n": 30},
                "algorithm": {"kind": "cga", "mu": 2},
                "repetitions": 2,
                "base_seed": 17,
                "eval_cap": 20000,
                "sweep": {"parameter": "mu", "values": values},
            }
        )
        _, rows = run_sweep(sweep)
        assert [row.axis for row in rows] == values

    def test_lambda_alias(self):
        sweep = SweepSpec.from_dict(
            {
                "objective": {"name": "onemax", "n": 10},
                "algorithm": {"kind": "umda", "lambda": 10, "mu": 5},
                "repetitions": 1,
                "eval_cap": 50000,
                "sweep": {"parameter": "lambda", "values": [10, 20]},
            }
        )
        points = sweep.points()
        assert [p.algorithm.lam for p in points] == [10, 20]
