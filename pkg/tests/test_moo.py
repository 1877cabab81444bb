import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flpareto.moo import (
    Archive,
    ConstraintSpec,
    aggregate_objective,
    crowding_distance,
    dominates,
    hypervolume,
    nondominated_sort,
    pareto_front_mask,
    penalize,
)

from conftest import mc_hypervolume, oracle_dominates, oracle_front_partition

vec2 = st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=2)


class TestDominates:
    def test_strict_improvement_one_coordinate(self):
        assert dominates([1, 2], [2, 2]) is True

    def test_identical_vectors_never_dominate(self):
        assert dominates([1, 2, 3], [1, 2, 3]) is False

    def test_incomparable_pair(self):
        # brute-force check of the definition: 1<=2 but 3>1 fails "<= everywhere"
        assert oracle_dominates([1, 3], [2, 1]) is False
        assert dominates([1, 3], [2, 1]) is False

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            dominates([1, 2], [1, 2, 3])

    @given(vec2, vec2)
    @settings(max_examples=200, deadline=None)
    def test_antisymmetry_and_oracle(self, a, b):
        assert dominates(a, b) == oracle_dominates(a, b)
        if dominates(a, b):
            assert not dominates(b, a)

    @given(vec2)
    @settings(max_examples=100, deadline=None)
    def test_irreflexive(self, a):
        assert not dominates(a, a)


class TestNondominatedSort:
    def test_three_point_example(self):
        fronts = nondominated_sort([[1, 2], [2, 1], [2, 2]])
        assert [sorted(f) for f in fronts] == [[0, 1], [2]]

    def test_single_element(self):
        assert nondominated_sort([[3.0, 4.0]]) == [[0]]

    def test_all_identical(self):
        fronts = nondominated_sort([[1, 1]] * 5)
        assert len(fronts) == 1 and sorted(fronts[0]) == [0, 1, 2, 3, 4]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            nondominated_sort([])

    def test_matches_peeling_oracle_random(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 40))
            m = int(rng.integers(2, 4))
            Y = rng.integers(0, 6, size=(n, m)).astype(float)
            got = [sorted(f) for f in nondominated_sort(Y)]
            want = [sorted(f) for f in oracle_front_partition(Y)]
            assert got == want


class TestCrowdingDistance:
    def test_two_points_boundary_rule(self):
        assert np.all(np.isinf(crowding_distance([[0, 1], [1, 0]])))

    def test_middle_point_normalized_gaps(self):
        d = crowding_distance([[0, 2], [1, 1], [2, 0]])
        assert np.isinf(d[0]) and np.isinf(d[2])
        assert d[1] == pytest.approx(2.0)

    def test_all_identical_degenerate_ranges(self):
        d = crowding_distance([[1, 1]] * 5)
        assert np.isinf(d).sum() == 2
        assert np.all(d[~np.isinf(d)] == 0.0)


class TestHypervolume:
    def test_inclusion_exclusion_example(self):
        assert hypervolume([[1, 2], [2, 1]], [3, 3]) == pytest.approx(3.0)

    def test_unit_box(self):
        assert hypervolume([[0, 0]], [1, 1]) == pytest.approx(1.0)

    def test_empty(self):
        assert hypervolume([], [1, 1]) == 0.0

    def test_unsupported_dimension(self):
        with pytest.raises(ValueError):
            hypervolume([[1, 1, 1, 1]], [2, 2, 2, 2])

    def test_points_above_reference_excluded(self):
        assert hypervolume([[0, 0], [5, 5]], [1, 1]) == pytest.approx(1.0)

    def test_3d_by_inclusion_exclusion(self):
        # two boxes: 4 + 2 - 1 overlap = 5
        got = hypervolume([[0, 1, 0], [1, 0, 1]], [2, 2, 2])
        assert got == pytest.approx(5.0)

    @pytest.mark.parametrize("m", [2, 3])
    def test_monte_carlo_agreement(self, m, rng):
        for trial in range(6):
            n = int(rng.integers(1, 15))
            Y = rng.random((n, m)) * 2.0
            z = np.full(m, 2.5)
            exact = hypervolume(Y, z)
            est, se = mc_hypervolume(Y, z, n_samples=200_000, seed=trial)
            assert abs(exact - est) <= 3.0 * se + 1e-9

    @pytest.mark.parametrize("m", [2, 3])
    def test_monotone_in_points(self, m, rng):
        Y = rng.random((8, m))
        z = np.full(m, 1.5)
        base = hypervolume(Y, z)
        extra = rng.random(m)
        assert hypervolume(np.vstack([Y, extra]), z) >= base - 1e-12
        dominated = Y[0] + 0.1  # strictly worse than an existing point
        assert hypervolume(np.vstack([Y, dominated]), z) == pytest.approx(base)


class TestPenalize:
    SPEC = ConstraintSpec(bounds=(None, 0.8), penalties=(0.0, 20.0))

    def test_violation_example(self):
        out = penalize([0.3, 0.9], self.SPEC)
        assert out[1] == pytest.approx(0.9 + 20 * 0.1)

    def test_boundary_unchanged(self):
        assert penalize([0.3, 0.8], self.SPEC)[1] == pytest.approx(0.8)

    def test_unconstrained_coordinate_unchanged(self):
        assert penalize([0.3, 0.5], self.SPEC)[0] == pytest.approx(0.3)

    @given(st.floats(0, 2, allow_nan=False))
    @settings(max_examples=100, deadline=None)
    def test_feasibility_classification(self, v):
        out = penalize([0.0, v], self.SPEC)
        if v > 0.8:
            assert out[1] > v
        else:
            assert out[1] == v

    def test_preserves_dominance_between_feasible(self, rng):
        for _ in range(200):
            a = rng.random(2) * 0.8
            b = rng.random(2) * 0.8
            pa, pb = penalize(a, self.SPEC), penalize(b, self.SPEC)
            assert dominates(a, b) == dominates(pa, pb)

    def test_idempotent_only_when_feasible(self):
        feas = penalize([0.1, 0.5], self.SPEC)
        assert np.allclose(penalize(feas, self.SPEC), feas)
        infeas = np.array([0.1, 0.9])
        once = penalize(infeas, self.SPEC)
        assert not np.allclose(penalize(once, self.SPEC), once)


class TestAggregate:
    def test_weighted_mean(self):
        assert aggregate_objective([0.2, 0.4], [0.5, 0.5], "average") == pytest.approx(0.3)

    def test_worst(self):
        assert aggregate_objective([0.2, 0.4], mode="worst") == pytest.approx(0.4)

    def test_single_client_both_modes(self):
        assert aggregate_objective([0.7], mode="average") == pytest.approx(0.7)
        assert aggregate_objective([0.7], mode="worst") == pytest.approx(0.7)

    def test_weight_sum_violated(self):
        with pytest.raises(ValueError):
            aggregate_objective([0.2, 0.4], [0.6, 0.6], "average")


class TestArchive:
    def test_bookkeeping(self):
        cs = ConstraintSpec(bounds=(None, 0.8), penalties=(0.0, 20.0))
        a = Archive(constraints=cs)
        a.append_batch(
            np.array([[0.1, 0.2], [0.3, 0.4]]),
            np.array([[0.5, 0.9], [0.2, 0.3]]),
            generation=0,
        )
        assert len(a) == 2
        assert [e.feasible for e in a.entries] == [False, True]
        assert a.entries[0].penalized[1] == pytest.approx(2.9)
        assert [e.index for e in a.entries] == [0, 1]
        assert a.front_indices() == [1]

    def test_front_mask_keeps_duplicates(self):
        mask = pareto_front_mask([[1, 1], [1, 1], [2, 2]])
        assert mask.tolist() == [True, True, False]
