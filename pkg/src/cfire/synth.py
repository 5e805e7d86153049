"""Synthetic datasets with known box-shaped ground truth, used by the test
suite and handy for demo runs."""

from __future__ import annotations

import numpy as np

from .dataset import Dataset

TWO_BOX_DIMS = (0, 1)
# class 1 is the union of two axis-aligned corner boxes in dims 0 and 1
TWO_BOX_A = ((0.0, 0.4), (0.0, 0.4))
TWO_BOX_B = ((0.6, 1.0), (0.6, 1.0))


def _in_box(X: np.ndarray, dims, box) -> np.ndarray:
    mask = np.ones(len(X), dtype=bool)
    for dim, (lo, hi) in zip(dims, box):
        mask &= (X[:, dim] >= lo) & (X[:, dim] <= hi)
    return mask


def two_box_labels(X: np.ndarray) -> np.ndarray:
    in_a = _in_box(X, TWO_BOX_DIMS, TWO_BOX_A)
    in_b = _in_box(X, TWO_BOX_DIMS, TWO_BOX_B)
    return (in_a | in_b).astype(int)


def two_box_dataset(n: int, d: int = 8, seed: int = 0, margin: float = 0.03) -> Dataset:
    """Uniform points in [0,1]^d; class 1 iff dims (0,1) fall in one of two
    disjoint corner boxes. Points within `margin` of any box edge are
    resampled so the classes are cleanly separable."""
    rng = np.random.default_rng(seed)
    rows = []
    while len(rows) < n:
        batch = rng.uniform(size=(max(64, n), d))
        near_edge = np.zeros(len(batch), dtype=bool)
        for dims, box in ((TWO_BOX_DIMS, TWO_BOX_A), (TWO_BOX_DIMS, TWO_BOX_B)):
            inner = _in_box(batch, dims, [(lo + margin, hi - margin) for lo, hi in box])
            outer = _in_box(batch, dims, [(lo - margin, hi + margin) for lo, hi in box])
            near_edge |= outer & ~inner
        rows.extend(batch[~near_edge])
    X = np.asarray(rows[:n])
    labels = two_box_labels(X)
    names = tuple(f"f{i}" for i in range(d))
    return Dataset(X, names, tuple(int(y) for y in labels))


def two_cluster_dataset(n: int, d: int = 2, seed: int = 0, gap: float = 6.0) -> Dataset:
    """Two well-separated Gaussian blobs; linearly separable."""
    rng = np.random.default_rng(seed)
    half = n // 2
    a = rng.normal(0.0, 1.0, size=(half, d))
    b = rng.normal(gap, 1.0, size=(n - half, d))
    X = np.vstack([a, b])
    labels = np.array([0] * half + [1] * (n - half))
    perm = rng.permutation(n)
    names = tuple(f"f{i}" for i in range(d))
    return Dataset(X[perm], names, tuple(int(y) for y in labels[perm]))


def wide_threshold_dataset(n: int, d: int = 57, n_informative: int = 6, seed: int = 0) -> Dataset:
    """High-dimensional binary task: the label is a weighted-sum threshold
    over a few informative dims, the rest is uniform noise. Points close to
    the decision surface are resampled."""
    rng = np.random.default_rng(seed)
    weights = np.linspace(1.0, 2.0, n_informative)
    cut = weights.sum() / 2.0
    rows, labs = [], []
    while len(rows) < n:
        batch = rng.uniform(size=(2 * n, d))
        score = batch[:, :n_informative] @ weights
        keep = np.abs(score - cut) > 0.1
        rows.extend(batch[keep])
        labs.extend((score[keep] > cut).astype(int))
    X = np.asarray(rows[:n])
    names = tuple(f"f{i}" for i in range(d))
    return Dataset(X, names, tuple(int(y) for y in labs[:n]))


def dataset_to_csv(ds: Dataset, label_column: str = "label") -> str:
    """CSV text with header, suitable for Dataset.load_csv round-trips."""
    header = list(ds.feature_names) + ([label_column] if ds.labels is not None else [])
    lines = [",".join(header)]
    for i in range(ds.n_samples):
        cells = [repr(float(v)) for v in ds.samples[i]]
        if ds.labels is not None:
            cells.append(str(ds.labels[i]))
        lines.append(",".join(cells))
    return "\n".join(lines)
