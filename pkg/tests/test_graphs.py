import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import edabench.graphs as graphs_module
from edabench.core import MarginPolicy, RngStream, uniform_frequencies
from edabench.graphs import (
    BipartitionConstraint,
    WeightedGraph,
    bipartition_objective,
    constrained_partition_sample,
    cut_value,
    exhaustive_max_cut,
    load_instance,
    maxcut_objective,
    planted_maxcut,
    save_instance,
)
from edabench.kernels import PbilConfig, new_run_state, pbil_step, run_kernel


def triangle():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])


class TestCutValue:
    def test_triangle(self):
        assert cut_value(triangle(), np.array([1, 0, 0])) == 2.0

    def test_constant_assignment_cuts_nothing(self):
        inst = planted_maxcut(10, 0.8, RngStream(1))
        assert cut_value(inst.graph, np.zeros(10, np.uint8)) == 0.0
        assert cut_value(inst.graph, np.ones(10, np.uint8)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cut_value(triangle(), np.array([1, 0]))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**10 - 1), st.integers(0, 10**6))
    def test_complement_symmetry(self, code, seed):
        inst = planted_maxcut(10, 0.7, RngStream(seed % 7))
        x = np.array([(code >> j) & 1 for j in range(10)], dtype=np.uint8)
        assert cut_value(inst.graph, x) == cut_value(inst.graph, 1 - x)


class TestGraphValidation:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            WeightedGraph.from_edges(3, [(1, 1, 1.0)])

    def test_rejects_duplicate(self):
        with pytest.raises(ValueError):
            WeightedGraph.from_edges(3, [(0, 1, 1.0), (0, 1, 2.0)])

    def test_rejects_negative_weight(self):
        with pytest.raises(ValueError):
            WeightedGraph.from_edges(3, [(0, 1, -1.0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            WeightedGraph.from_edges(3, [(0, 3, 1.0)])


class TestPlantedInstances:
    def test_planted_value_is_total_weight(self):
        inst = planted_maxcut(20, 0.6, RngStream(4))
        assert inst.optimal_value == inst.graph.total_weight
        assert cut_value(inst.graph, inst.planted_assignment) == inst.optimal_value

    def test_complement_attains_optimum(self):
        inst = planted_maxcut(14, 0.9, RngStream(5))
        assert cut_value(inst.graph, 1 - inst.planted_assignment) == inst.optimal_value

    def test_exhaustive_certification(self):
        for seed in range(5):
            inst = planted_maxcut(12, 0.5 + 0.1 * seed, RngStream(seed))
            brute, _ = exhaustive_max_cut(inst.graph)
            assert brute == inst.optimal_value

    def test_validation(self):
        with pytest.raises(ValueError):
            planted_maxcut(11, 0.5, RngStream(1))
        with pytest.raises(ValueError):
            planted_maxcut(12, 0.0, RngStream(1))

    def test_exhaustive_size_guard(self):
        inst = planted_maxcut(24, 0.5, RngStream(2))
        with pytest.raises(ValueError):
            exhaustive_max_cut(inst.graph)


class TestConstrainedSampler:
    def test_all_ones_quota(self):
        p = np.full(6, 0.01)
        x = constrained_partition_sample(p, 6, RngStream(1))
        assert x.tolist() == [1] * 6

    def test_all_zeros_quota(self):
        p = np.full(6, 0.99)
        x = constrained_partition_sample(p, 0, RngStream(1))
        assert x.tolist() == [0] * 6

    def test_exact_ones_count_always(self):
        gen = RngStream(77).generator()
        for trial in range(1000):
            n = int(gen.integers(1, 16))
            m = int(gen.integers(0, n + 1))
            p = gen.random(n)
            x = constrained_partition_sample(p, m, gen)
            assert int(x.sum()) == m

    def test_constraint_object_accepted(self):
        x = constrained_partition_sample(
            uniform_frequencies(8), BipartitionConstraint(3), RngStream(2)
        )
        assert int(x.sum()) == 3

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            constrained_partition_sample(uniform_frequencies(4), 5, RngStream(1))

    def test_python_fallback_matches_compiled(self, monkeypatch):
        p = RngStream(3).generator().random(12)
        fast = constrained_partition_sample(p, 5, RngStream(9))
        monkeypatch.setattr(graphs_module, "HAVE_FAST", False)
        slow = constrained_partition_sample(p, 5, RngStream(9))
        assert np.array_equal(fast, slow)


class TestBipartitionObjective:
    def test_balanced_constraint_attains_planted(self):
        inst = planted_maxcut(12, 0.7, RngStream(6))
        obj = bipartition_objective(inst, BipartitionConstraint(6))
        assert obj.is_optimum(inst.planted_assignment)

    def test_feasible_enumeration_matches_optimum(self):
        inst = planted_maxcut(12, 0.7, RngStream(8))
        obj = bipartition_objective(inst, BipartitionConstraint(6))
        best = -1.0
        for ones in itertools.combinations(range(12), 6):
            x = np.zeros(12, np.uint8)
            x[list(ones)] = 1
            best = max(best, cut_value(inst.graph, x))
        assert best == inst.optimal_value

    def test_zero_constraint_single_point(self):
        inst = planted_maxcut(8, 0.9, RngStream(9))
        obj = bipartition_objective(inst, BipartitionConstraint(0))
        x = obj.sampler(uniform_frequencies(8), RngStream(1).generator())
        assert x.tolist() == [0] * 8
        assert obj.evaluate_true(x) == 0.0

    def test_pbil_respects_constraint_and_margins(self):
        inst = planted_maxcut(12, 0.7, RngStream(10))
        obj = bipartition_objective(inst, BipartitionConstraint(6))
        config = PbilConfig(30, 0.2, 0.8)
        state = new_run_state(config, obj, RngStream(11))
        lo, hi = MarginPolicy.STANDARD.bounds(12)
        for _ in range(15):
            pbil_step(state, config, obj)
            if state.success:
                break
            assert np.all((state.p >= lo) & (state.p <= hi))

    def test_pbil_finds_planted_partition(self):
        inst = planted_maxcut(12, 0.7, RngStream(12))
        obj = bipartition_objective(inst, BipartitionConstraint(6))
        out = run_kernel(PbilConfig(60, 0.1, 1.0), obj, eval_cap=100_000, rng=RngStream(13))
        assert out.success

    def test_constraint_validated(self):
        inst = planted_maxcut(8, 0.9, RngStream(14))
        with pytest.raises(ValueError):
            bipartition_objective(inst, BipartitionConstraint(9))


class TestInstanceFiles:
    def test_round_trip(self, tmp_path):
        inst = planted_maxcut(16, 0.5, RngStream(15))
        path = tmp_path / "inst.txt"
        save_instance(inst, path)
        loaded = load_instance(path)
        assert loaded.optimal_value == inst.optimal_value
        assert np.array_equal(loaded.planted_assignment, inst.planted_assignment)
        assert np.array_equal(loaded.graph.weights, inst.graph.weights)
        assert np.array_equal(loaded.graph.edge_u, inst.graph.edge_u)

    def test_truncated_file_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("4 2\n0 1 1.0\n")
        with pytest.raises(ValueError):
            load_instance(path)

    def test_inconsistent_optimum_rejected(self, tmp_path):
        inst = planted_maxcut(8, 0.9, RngStream(16))
        path = tmp_path / "tampered.txt"
        save_instance(inst, path)
        lines = path.read_text().splitlines()
        lines[-1] = "999.0"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError):
            load_instance(path)

    def test_malformed_assignment_rejected(self, tmp_path):
        inst = planted_maxcut(8, 0.9, RngStream(17))
        path = tmp_path / "badbits.txt"
        save_instance(inst, path)
        lines = path.read_text().splitlines()
        lines[-2] = "01x10101"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError):
            load_instance(path)
