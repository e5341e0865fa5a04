import numpy as np
import pytest

from conftest import random_labeled_digraph, solve_fixed_point
from lapseg import (
    ConvergenceState,
    DominationMatrix,
    LabelMap,
    ParameterError,
    SparseDigraph,
    argmax_label,
    avg_max_domination,
    init_domination,
    propagation_step,
    run_stage,
    threshold_label,
)


def path_graph_v1_v4():
    """v1(labeled c1) - v2 - v3 - v4(labeled c2), unit weights."""
    indptr = np.array([0, 0, 2, 4, 4])
    targets = np.array([0, 2, 1, 3])
    return SparseDigraph(4, indptr, targets, np.ones(4))


class TestInit:
    def test_labeled_one_hot(self):
        dom = init_domination([1, 0], 2)
        assert dom.rows[0].tolist() == [1.0, 0.0]
        assert dom.labeled_mask.tolist() == [True, False]

    def test_unlabeled_uniform(self):
        dom = init_domination([0], 4)
        assert dom.rows[0].tolist() == [0.25, 0.25, 0.25, 0.25]

    def test_empty(self):
        dom = init_domination([], 2)
        assert dom.rows.shape == (0, 2)

    def test_zero_classes_rejected(self):
        with pytest.raises(ParameterError):
            init_domination([0], 0)


class TestStep:
    def two_neighbor_graph(self, w1, w2):
        indptr = np.array([0, 2, 2, 2])
        targets = np.array([1, 2])
        return SparseDigraph(3, indptr, targets, np.array([w1, w2], dtype=float))

    def test_identical_neighbors(self):
        g = self.two_neighbor_graph(0.3, 1.7)
        dom = DominationMatrix(
            np.array([[0.5, 0.5], [1.0, 0.0], [1.0, 0.0]]),
            np.array([False, True, True]),
        )
        out = propagation_step(g, dom)
        assert out.rows[0].tolist() == [1.0, 0.0]

    def test_equal_weights_average(self):
        g = self.two_neighbor_graph(1.0, 1.0)
        dom = DominationMatrix(
            np.array([[0.5, 0.5], [1.0, 0.0], [0.0, 1.0]]),
            np.array([False, True, True]),
        )
        out = propagation_step(g, dom)
        assert out.rows[0].tolist() == [0.5, 0.5]

    def test_weighted_average(self):
        g = self.two_neighbor_graph(3.0, 1.0)
        dom = DominationMatrix(
            np.array([[0.5, 0.5], [1.0, 0.0], [0.0, 1.0]]),
            np.array([False, True, True]),
        )
        out = propagation_step(g, dom)
        assert out.rows[0].tolist() == [0.75, 0.25]

    def test_zero_degree_copied_through(self):
        g = SparseDigraph(2, np.array([0, 0, 0]), np.empty(0, int), np.empty(0))
        dom = init_domination([0, 2], 2)
        out = propagation_step(g, dom)
        assert (out.rows == dom.rows).all()

    def test_labeled_rows_untouched_even_with_edges(self):
        # a labeled row stays clamped even if a graph gives it out-edges
        indptr = np.array([0, 1, 1])
        g = SparseDigraph(2, indptr, np.array([1]), np.array([1.0]))
        dom = DominationMatrix(np.array([[1.0, 0.0], [0.0, 1.0]]),
                               np.array([True, True]))
        out = propagation_step(g, dom)
        assert out.rows[0].tolist() == [1.0, 0.0]


class TestAvgMax:
    def test_mixed(self):
        dom = DominationMatrix(np.array([[1.0, 0.0], [0.5, 0.5]]), np.zeros(2, bool))
        assert avg_max_domination(dom) == 0.75

    def test_uniform(self):
        dom = init_domination([0, 0, 0], 2)
        assert avg_max_domination(dom) == 0.5

    def test_one_hot(self):
        dom = DominationMatrix(np.eye(3), np.zeros(3, bool))
        assert avg_max_domination(dom) == 1.0

    def test_no_unlabeled_signals(self):
        dom = init_domination([1, 2], 2)
        with pytest.raises(ParameterError):
            avg_max_domination(dom)


class TestRunStage:
    def test_path_fixed_point(self):
        g = path_graph_v1_v4()
        dom = init_domination([1, 0, 0, 2], 2)
        result = run_stage(g, dom, ConvergenceState(omega=1e-10))
        assert np.abs(result.dom.rows[1] - [2 / 3, 1 / 3]).max() < 1e-6
        assert np.abs(result.dom.rows[2] - [1 / 3, 2 / 3]).max() < 1e-6
        assert result.dom.rows[1].argmax() == 0
        assert result.dom.rows[2].argmax() == 1
        assert result.converged

    def test_single_source_saturates(self):
        rng = np.random.default_rng(21)
        g, labels = random_labeled_digraph(40, 1, rng)
        dom = init_domination(labels, 1)
        result = run_stage(g, dom, ConvergenceState(omega=1e-10))
        assert np.abs(result.dom.rows - 1.0).max() < 1e-6

    def test_zero_unlabeled_returns_immediately(self):
        g = SparseDigraph(2, np.zeros(3, dtype=int), np.empty(0, int), np.empty(0))
        dom = init_domination([1, 2], 2)
        result = run_stage(g, dom, ConvergenceState())
        assert result.iterations == 0 and result.converged

    def test_matches_linear_system(self):
        rng = np.random.default_rng(22)
        for _ in range(10):
            n = int(rng.integers(10, 80))
            c = int(rng.integers(2, 5))
            g, labels = random_labeled_digraph(n, c, rng)
            expected = solve_fixed_point(g, labels, c)
            result = run_stage(g, init_domination(labels, c),
                               ConvergenceState(omega=1e-10))
            assert result.converged
            assert np.abs(result.dom.rows - expected).max() <= 1e-5
            assert (result.dom.rows.argmax(1) == expected.argmax(1)).all()

    def test_iteration_count_multiple_of_interval(self):
        g = path_graph_v1_v4()
        result = run_stage(g, init_domination([1, 0, 0, 2], 2),
                           ConvergenceState(check_interval=10, omega=1e-10))
        assert result.iterations % 10 == 0

    def test_cap_reached_flags_nonconverged(self):
        g = path_graph_v1_v4()
        result = run_stage(g, init_domination([1, 0, 0, 2], 2),
                           ConvergenceState(omega=1e-30, max_iterations=25))
        assert result.iterations == 25
        assert not result.converged


class TestInvariants:
    def test_rows_stochastic_and_seeds_frozen_through_iterations(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            n = int(rng.integers(8, 60))
            c = int(rng.integers(2, 4))
            g, labels = random_labeled_digraph(n, c, rng)
            dom = init_domination(labels, c)
            initial_seed_rows = dom.rows[dom.labeled_mask].copy()
            for _ in range(30):
                dom = propagation_step(g, dom)
                assert np.abs(dom.rows.sum(axis=1) - 1.0).max() <= 1e-9
                assert (dom.rows[dom.labeled_mask] == initial_seed_rows).all()

    def test_step_bit_deterministic(self):
        rng = np.random.default_rng(24)
        g, labels = random_labeled_digraph(50, 3, rng)
        dom = init_domination(labels, 3)
        a = propagation_step(g, dom)
        b = propagation_step(g, dom)
        assert (a.rows == b.rows).all()

    def test_converged_avg_max_not_below_initial(self):
        rng = np.random.default_rng(25)
        g, labels = random_labeled_digraph(60, 3, rng)
        dom = init_domination(labels, 3)
        initial = avg_max_domination(dom)
        result = run_stage(g, dom, ConvergenceState(omega=1e-10))
        assert avg_max_domination(result.dom) >= initial - 1e-12


class TestLabeling:
    def make_labels(self, values, c=2):
        return LabelMap(np.array([values]), c)

    def test_threshold_assigns_confident(self):
        dom = DominationMatrix(np.array([[0.9995, 0.0005]]), np.zeros(1, bool))
        out = threshold_label(dom, self.make_labels([0]), 0.999)
        assert out.labels.tolist() == [[1]]

    def test_threshold_leaves_uncertain(self):
        dom = DominationMatrix(np.array([[0.95, 0.05], [0.5, 0.5]]), np.zeros(2, bool))
        out = threshold_label(dom, self.make_labels([0, 0]), 0.999)
        assert out.labels.tolist() == [[0, 0]]

    def test_threshold_respects_existing(self):
        dom = DominationMatrix(np.array([[0.0, 1.0]]), np.ones(1, bool))
        out = threshold_label(dom, self.make_labels([1]), 0.999)
        assert out.labels.tolist() == [[1]]

    def test_argmax_assigns(self):
        dom = DominationMatrix(np.array([[0.3, 0.7]]), np.zeros(1, bool))
        out = argmax_label(dom, self.make_labels([0]))
        assert out.labels.tolist() == [[2]]

    def test_argmax_tie_lowest_class(self):
        dom = DominationMatrix(np.array([[0.5, 0.5]]), np.zeros(1, bool))
        out = argmax_label(dom, self.make_labels([0]))
        assert out.labels.tolist() == [[1]]

    def test_argmax_keeps_labeled(self):
        dom = DominationMatrix(np.array([[1.0, 0.0, 0.0]]), np.ones(1, bool))
        out = argmax_label(dom, self.make_labels([3], c=3))
        assert out.labels.tolist() == [[3]]

    def test_argmax_leaves_no_zeros(self):
        rng = np.random.default_rng(26)
        rows = rng.random((20, 3))
        rows /= rows.sum(1, keepdims=True)
        dom = DominationMatrix(rows, np.zeros(20, bool))
        out = argmax_label(dom, LabelMap(np.zeros((4, 5), dtype=int), 3))
        assert (out.labels > 0).all()

    def test_threshold_tau_range(self):
        dom = DominationMatrix(np.array([[1.0, 0.0]]), np.zeros(1, bool))
        with pytest.raises(ParameterError):
            threshold_label(dom, self.make_labels([0]), 0.0)
        with pytest.raises(ParameterError):
            threshold_label(dom, self.make_labels([0]), 1.5)
