"""Candidate terms: axis-aligned boxes over a closed feature set, refined by a
depth-limited decision tree when the minimal bounding box is inconsistent."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .itemsets import ClosedSet


@dataclass(frozen=True)
class Box:
    """Conjunction of closed interval constraints, at most one per feature."""

    constraints: dict[int, tuple[float, float]]

    def __post_init__(self):
        cleaned = {}
        for feat, (lo, hi) in self.constraints.items():
            lo, hi = float(lo), float(hi)
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise DataError(f"feature {feat}: interval bounds must be finite")
            if lo > hi:
                raise DataError(f"feature {feat}: empty interval [{lo}, {hi}]")
            cleaned[int(feat)] = (lo, hi)
        object.__setattr__(self, "constraints", cleaned)

    @property
    def features(self) -> frozenset[int]:
        return frozenset(self.constraints)

    def __eq__(self, other):
        return isinstance(other, Box) and self.constraints == other.constraints


def term_covers(box: Box, x: np.ndarray) -> bool:
    """True iff x satisfies every interval constraint; other dims are free."""
    x = np.asarray(x, dtype=np.float64)
    return all(lo <= x[i] <= hi for i, (lo, hi) in box.constraints.items())


def covers_many(box: Box, X: np.ndarray) -> np.ndarray:
    """Vectorized term_covers over the rows of X."""
    X = np.asarray(X, dtype=np.float64)
    mask = np.ones(len(X), dtype=bool)
    for i, (lo, hi) in box.constraints.items():
        mask &= (X[:, i] >= lo) & (X[:, i] <= hi)
    return mask


@dataclass(frozen=True)
class CandidateTerm:
    """A box plus its bookkeeping for greedy selection and tie-breaking.

    covered_positive_indices index into the class block (samples predicted as
    the term's class); precision_on_input is measured over all input samples
    the box covers, regardless of class. Terms rebuilt from a serialized
    document carry only the coverage count (indices are build-time data and
    not part of the document), so covered_positive_indices may be None.
    """

    box: Box
    source_set: frozenset[int]
    covered_positive_indices: tuple[int, ...] | None
    precision_on_input: float
    covered_count: int = -1

    def __post_init__(self):
        if not 0.0 <= self.precision_on_input <= 1.0:
            raise DataError(f"precision {self.precision_on_input} outside [0,1]")
        if self.covered_positive_indices is not None:
            n = len(self.covered_positive_indices)
            if self.covered_count not in (-1, n):
                raise DataError("covered_count disagrees with covered_positive_indices")
            object.__setattr__(self, "covered_count", n)
        elif self.covered_count < 0:
            raise DataError("covered_count required when indices are absent")


@dataclass(frozen=True)
class BoxParams:
    max_depth: int = 7
    purity_threshold: float = 0.95
    min_leaf_positives: int = 1

    def __post_init__(self):
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be positive, got {self.max_depth}")
        if not 0.5 < self.purity_threshold <= 1.0:
            raise ConfigError(
                f"purity_threshold must lie in (0.5,1], got {self.purity_threshold}"
            )
        if self.min_leaf_positives < 1:
            raise ConfigError("min_leaf_positives must be positive")


def minimal_box(samples: np.ndarray, f: Iterable[int]) -> Box:
    """Per-feature [min, max] envelope of the samples, restricted to f."""
    samples = np.asarray(samples, dtype=np.float64)
    feats = sorted(set(int(i) for i in f))
    if samples.size == 0:
        raise DataError("minimal_box of an empty sample set")
    if not feats:
        raise DataError("minimal_box over an empty feature set")
    return Box(
        {i: (samples[:, i].min(), samples[:, i].max()) for i in feats}
    )


def _gini(n_pos: int, n_neg: int) -> float:
    total = n_pos + n_neg
    if total == 0:
        return 0.0
    p = n_pos / total
    return 2.0 * p * (1.0 - p)


def _best_split(P: np.ndarray, N: np.ndarray, feats: Sequence[int]):
    """Midpoint split maximizing Gini gain; ties go to the lower feature,
    then the lower threshold. Returns (feature, threshold) or None."""
    n_pos, n_neg = len(P), len(N)
    parent = _gini(n_pos, n_neg)
    total = n_pos + n_neg
    best = None
    best_gain = 0.0
    for feat in feats:
        values = np.concatenate([P[:, feat], N[:, feat]])
        labels = np.concatenate([np.ones(n_pos, dtype=np.intp), np.zeros(n_neg, dtype=np.intp)])
        order = np.argsort(values, kind="stable")
        values, labels = values[order], labels[order]
        distinct = np.unique(values)
        if len(distinct) < 2:
            continue
        thresholds = (distinct[:-1] + distinct[1:]) / 2.0
        cum_pos = np.cumsum(labels)
        left_n = np.searchsorted(values, thresholds, side="right")
        # a midpoint can round onto the upper value and leave the right side empty
        valid = left_n < total
        if not valid.any():
            continue
        thresholds, left_n = thresholds[valid], left_n[valid]
        left_pos = cum_pos[left_n - 1]
        right_n = total - left_n
        right_pos = n_pos - left_pos
        pl = left_pos / left_n
        pr = right_pos / right_n
        child = (left_n * 2.0 * pl * (1.0 - pl) + right_n * 2.0 * pr * (1.0 - pr)) / total
        gains = parent - child
        j = int(np.argmax(gains))
        if gains[j] > best_gain:
            best_gain = float(gains[j])
            best = (feat, float(thresholds[j]))
    return best


def learn_terms(
    f: ClosedSet,
    class_samples: np.ndarray,
    negatives: np.ndarray,
    p: BoxParams,
) -> list[CandidateTerm]:
    """Candidate terms for one closed feature set.

    The supporting positives X' are the class samples whose transactions
    contain f (f.support_indices index into class_samples). If their minimal
    box over f's features excludes every negative, it becomes a single term.
    Otherwise a depth-limited tree on f's features carves the space; each
    sufficiently pure leaf emits the minimal box of its X' members, so no
    emitted box extrapolates beyond observed positives. X' samples that end
    up only in impure leaves are left uncovered.
    """
    class_samples = np.asarray(class_samples, dtype=np.float64)
    negatives = np.asarray(negatives, dtype=np.float64)
    if negatives.size == 0:
        negatives = negatives.reshape(0, class_samples.shape[1])
    support = np.asarray(f.support_indices, dtype=np.intp)
    if support.size == 0:
        raise DataError("closed set has no supporting positives")
    if not f.features:
        raise DataError("cannot learn terms for the empty feature set")
    feats = sorted(f.features)
    X_prime = class_samples[support]

    def make_term(box: Box) -> CandidateTerm:
        covered = covers_many(box, class_samples)
        n_pos_cov = int(covered.sum())
        n_neg_cov = int(covers_many(box, negatives).sum()) if len(negatives) else 0
        precision = n_pos_cov / (n_pos_cov + n_neg_cov) if n_pos_cov + n_neg_cov else 0.0
        return CandidateTerm(
            box=box,
            source_set=f.features,
            covered_positive_indices=tuple(np.flatnonzero(covered).tolist()),
            precision_on_input=precision,
        )

    envelope = minimal_box(X_prime, feats)
    if len(negatives) == 0 or not covers_many(envelope, negatives).any():
        return [make_term(envelope)]

    terms: list[CandidateTerm] = []

    def grow(pos_idx: np.ndarray, neg_idx: np.ndarray, depth: int):
        n_pos, n_neg = len(pos_idx), len(neg_idx)
        split = None
        if n_pos > 0 and n_neg > 0 and depth < p.max_depth:
            split = _best_split(X_prime[pos_idx], negatives[neg_idx], feats)
        if split is None:
            if (
                n_pos >= p.min_leaf_positives
                and n_pos / (n_pos + n_neg) >= p.purity_threshold
            ):
                terms.append(make_term(minimal_box(X_prime[pos_idx], feats)))
            return
        feat, t = split
        pos_left = X_prime[pos_idx, feat] <= t
        neg_left = negatives[neg_idx, feat] <= t
        grow(pos_idx[pos_left], neg_idx[neg_left], depth + 1)
        grow(pos_idx[~pos_left], neg_idx[~neg_left], depth + 1)

    grow(np.arange(len(X_prime)), np.arange(len(negatives)), 0)
    return terms
