import numpy as np
import pytest

from cfire.boxes import (
    Box,
    BoxParams,
    CandidateTerm,
    covers_many,
    learn_terms,
    minimal_box,
    term_covers,
)
from cfire.errors import ConfigError, DataError
from cfire.itemsets import ClosedSet


def closed(features, support_indices):
    return ClosedSet(frozenset(features), len(support_indices), tuple(support_indices))


def col(*values):
    return np.asarray(values, dtype=np.float64).reshape(-1, 1)


class TestMinimalBox:
    def test_single_point_degenerates(self):
        x = np.array([[1.0, 2.0, 3.0]])
        box = minimal_box(x, {2})
        assert box.constraints == {2: (3.0, 3.0)}

    def test_hand_min_max(self):
        box = minimal_box(np.array([[1.0, 5.0], [3.0, 2.0]]), {0, 1})
        assert box.constraints == {0: (1.0, 3.0), 1: (2.0, 5.0)}

    def test_containment_by_construction(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(30, 4))
        box = minimal_box(X, {0, 2, 3})
        assert covers_many(box, X).all()

    def test_empty_inputs_rejected(self):
        with pytest.raises(DataError):
            minimal_box(np.empty((0, 2)), {0})
        with pytest.raises(DataError):
            minimal_box(np.ones((1, 2)), set())


class TestTermCovers:
    def test_unconstrained_dims_ignored(self):
        assert term_covers(Box({0: (1.0, 3.0)}), np.array([2.0, 99.0]))

    def test_closed_upper_bound(self):
        assert term_covers(Box({0: (1.0, 3.0)}), np.array([3.0, 0.0]))

    def test_one_violated_constraint(self):
        assert not term_covers(Box({0: (1.0, 3.0), 1: (0.0, 1.0)}), np.array([2.0, 2.0]))

    def test_box_validation(self):
        with pytest.raises(DataError):
            Box({0: (2.0, 1.0)})
        with pytest.raises(DataError):
            Box({0: (0.0, np.inf)})


class TestLearnTerms:
    def test_consistent_envelope_needs_no_refinement(self):
        positives = np.array([[0.0, 0.0], [1.0, 1.0]])
        negatives = np.array([[5.0, 5.0]])
        f = closed({0, 1}, [0, 1])
        terms = learn_terms(f, positives, negatives, BoxParams())
        assert len(terms) == 1
        assert terms[0].box.constraints == {0: (0.0, 1.0), 1: (0.0, 1.0)}
        assert terms[0].precision_on_input == 1.0
        assert terms[0].covered_positive_indices == (0, 1)

    def test_hand_traced_tree_refinement(self):
        positives = col(1.0, 2.0, 8.0, 9.0)
        negatives = col(5.0)
        f = closed({0}, [0, 1, 2, 3])
        terms = learn_terms(f, positives, negatives, BoxParams())
        boxes = sorted(t.box.constraints[0] for t in terms)
        assert boxes == [(1.0, 2.0), (8.0, 9.0)]
        for t in terms:
            assert t.precision_on_input == 1.0

    def test_coincident_opposite_labels_yield_nothing(self):
        # every region is exactly half positive: no split has gain, purity 0.5
        values = np.arange(20, dtype=np.float64)
        f = closed({0}, list(range(20)))
        terms = learn_terms(f, col(*values), col(*values), BoxParams(max_depth=7))
        assert terms == []

    def test_support_restricts_the_positives(self):
        # only supporting positives shape the boxes; coverage is over all
        positives = col(0.0, 1.0, 10.0)
        negatives = col(50.0)
        f = closed({0}, [0, 1])
        terms = learn_terms(f, positives, negatives, BoxParams())
        assert len(terms) == 1
        assert terms[0].box.constraints[0] == (0.0, 1.0)
        assert terms[0].covered_positive_indices == (0, 1)

    def test_empty_support_rejected(self):
        with pytest.raises(DataError):
            learn_terms(closed({0}, []), col(1.0), col(2.0), BoxParams())

    def test_purity_one_consistency(self):
        rng = np.random.default_rng(4)
        params = BoxParams(max_depth=12, purity_threshold=1.0)
        for _ in range(20):
            pos = rng.normal(size=(rng.integers(3, 25), 3))
            neg = rng.normal(size=(rng.integers(3, 25), 3))
            f = closed({0, 1, 2}, list(range(len(pos))))
            for t in learn_terms(f, pos, neg, params):
                assert not covers_many(t.box, neg).any()

    def test_lower_purity_never_covers_fewer(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            pos = rng.normal(size=(20, 2))
            neg = rng.normal(size=(20, 2))
            f = closed({0, 1}, list(range(20)))
            covered = {}
            for purity in (1.0, 0.9, 0.8, 0.7, 0.6):
                terms = learn_terms(f, pos, neg, BoxParams(purity_threshold=purity))
                covered[purity] = set(
                    i for t in terms for i in t.covered_positive_indices
                )
            thresholds = sorted(covered, reverse=True)
            for hi, lo in zip(thresholds, thresholds[1:]):
                assert covered[hi] <= covered[lo]

    def test_specificity_boxes_hug_their_support(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            pos = rng.normal(size=(25, 3))
            neg = rng.normal(size=(25, 3))
            support = sorted(rng.choice(25, size=12, replace=False).tolist())
            f = closed({0, 2}, support)
            x_prime = pos[support]
            for t in learn_terms(f, pos, neg, BoxParams()):
                inside = covers_many(t.box, x_prime)
                assert inside.any()
                for feat, (lo, hi) in t.box.constraints.items():
                    assert lo == x_prime[inside][:, feat].min()
                    assert hi == x_prime[inside][:, feat].max()

    def test_all_bounds_finite(self):
        rng = np.random.default_rng(7)
        pos = rng.normal(size=(15, 2))
        neg = rng.normal(size=(15, 2))
        f = closed({0, 1}, list(range(15)))
        for t in learn_terms(f, pos, neg, BoxParams(purity_threshold=0.6)):
            for lo, hi in t.box.constraints.values():
                assert np.isfinite(lo) and np.isfinite(hi)

    def test_depth_limit_respected(self):
        # alternating blocks force deep trees; max_depth=1 allows one split
        pos = col(*np.arange(0, 40, 2, dtype=np.float64))
        neg = col(*np.arange(1, 41, 2, dtype=np.float64))
        f = closed({0}, list(range(20)))
        deep = learn_terms(f, pos, neg, BoxParams(max_depth=7, purity_threshold=1.0))
        shallow = learn_terms(f, pos, neg, BoxParams(max_depth=1, purity_threshold=1.0))
        assert len(shallow) <= 2
        assert len(shallow) <= len(deep)


class TestCandidateTerm:
    def test_count_derived_from_indices(self):
        t = CandidateTerm(Box({0: (0.0, 1.0)}), frozenset({0}), (3, 4), 0.5)
        assert t.covered_count == 2

    def test_count_required_without_indices(self):
        with pytest.raises(DataError):
            CandidateTerm(Box({0: (0.0, 1.0)}), frozenset({0}), None, 0.5)
        t = CandidateTerm(Box({0: (0.0, 1.0)}), frozenset({0}), None, 0.5, covered_count=7)
        assert t.covered_count == 7

    def test_precision_range(self):
        with pytest.raises(DataError):
            CandidateTerm(Box({0: (0.0, 1.0)}), frozenset({0}), (), 1.5)


def test_box_params_validation():
    with pytest.raises(ConfigError):
        BoxParams(max_depth=0)
    with pytest.raises(ConfigError):
        BoxParams(purity_threshold=0.5)
    with pytest.raises(ConfigError):
        BoxParams(purity_threshold=1.2)
    with pytest.raises(ConfigError):
        BoxParams(min_leaf_positives=0)
