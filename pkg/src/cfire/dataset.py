"""Tabular numeric datasets, reproducible three-way splits, per-class blocks."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class Dataset:
    """An immutable (n, d) matrix of finite reals with named features.

    Labels are optional; the extraction pipeline works off black-box
    predictions, labels are only needed to train a black-box.
    """

    samples: np.ndarray
    feature_names: tuple[str, ...]
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2:
            raise DataError(f"samples must be a 2-d matrix, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise DataError("samples contain non-finite values")
        if len(self.feature_names) != samples.shape[1]:
            raise DataError(
                f"{len(self.feature_names)} feature names for {samples.shape[1]} columns"
            )
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DataError("feature names are not unique")
        if self.labels is not None and len(self.labels) != samples.shape[0]:
            raise DataError(
                f"{len(self.labels)} labels for {samples.shape[0]} samples"
            )
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(int(y) for y in self.labels))

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = list(indices)
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return Dataset(self.samples[idx], self.feature_names, labels)

    def fingerprint(self) -> str:
        """Stable content hash used in rule-model provenance."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.samples).tobytes())
        h.update("\x1f".join(self.feature_names).encode("utf-8"))
        if self.labels is not None:
            h.update(",".join(str(y) for y in self.labels).encode("ascii"))
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class SplitSpec:
    """Fractions for the train / input / test partition plus the shuffle seed."""

    train_fraction: float
    input_fraction: float
    test_fraction: float
    seed: int = 0

    def __post_init__(self):
        fractions = (self.train_fraction, self.input_fraction, self.test_fraction)
        for f in fractions:
            if not 0.0 < f < 1.0:
                raise ConfigError(f"split fractions must lie in (0,1), got {f}")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ConfigError(f"split fractions must sum to 1, got {sum(fractions)}")


@dataclass(frozen=True)
class ClassBlock:
    """Indices of the samples a black-box assigned to one class."""

    class_id: int
    indices: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise DataError("class block indices are not distinct")

    def __len__(self) -> int:
        return len(self.indices)


def load_csv(path: str | Path, label_column: str | None = None) -> Dataset:
    """Load a comma-separated file with a header row into a Dataset.

    All non-label cells must parse as finite reals ('.' decimal separator).
    The optional label column is parsed as integer class ids.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise DataError(f"{path}: file is empty")
    header = [name.strip() for name in rows[0]]
    if len(set(header)) != len(header):
        dupes = sorted({n for n in header if header.count(n) > 1})
        raise DataError(f"{path}: duplicate header names {dupes}")
    if label_column is not None and label_column not in header:
        raise DataError(f"{path}: label column {label_column!r} not in header {header}")
    label_idx = header.index(label_column) if label_column is not None else None
    feature_names = tuple(n for i, n in enumerate(header) if i != label_idx)
    if not feature_names:
        raise DataError(f"{path}: no feature columns")
    if len(rows) == 1:
        raise DataError(f"{path}: no data rows")

    samples = []
    labels: list[int] | None = [] if label_column is not None else None
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: row {r} has {len(row)} cells, expected {len(header)}")
        vec = []
        for i, cell in enumerate(row):
            if i == label_idx:
                try:
                    labels.append(int(cell.strip()))
                except ValueError:
                    raise DataError(
                        f"{path}: row {r}, column {header[i]!r}: "
                        f"label {cell!r} is not an integer class id"
                    ) from None
                continue
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {r}, column {header[i]!r}: {cell!r} is not numeric"
                ) from None
            if not np.isfinite(value):
                raise DataError(f"{path}: row {r}, column {header[i]!r}: non-finite value")
            vec.append(value)
        samples.append(vec)
    return Dataset(np.array(samples), feature_names, tuple(labels) if labels else None)


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Partition a dataset into (train, input, test) by uniform shuffle.

    Floor rounding for the input and test parts; the remainder goes to train.
    Deterministic for a given seed.
    """
    n = ds.n_samples
    if n < 3:
        raise DataError(f"need at least 3 samples to split, got {n}")
    n_input = int(n * spec.input_fraction)
    n_test = int(n * spec.test_fraction)
    n_train = n - n_input - n_test
    if min(n_train, n_input, n_test) < 1:
        raise DataError(
            f"split of {n} samples leaves an empty part "
            f"(train={n_train}, input={n_input}, test={n_test})"
        )
    perm = np.random.default_rng(spec.seed).permutation(n)
    train_idx = perm[:n_train]
    input_idx = perm[n_train : n_train + n_input]
    test_idx = perm[n_train + n_input :]
    return ds.subset(train_idx), ds.subset(input_idx), ds.subset(test_idx)


def class_block(ds: Dataset, predictions: Sequence[int], c: int) -> ClassBlock:
    """Indices of samples predicted as class c, ascending. May be empty."""
    if len(predictions) != ds.n_samples:
        raise DataError(
            f"{len(predictions)} predictions for {ds.n_samples} samples"
        )
    indices = tuple(i for i, p in enumerate(predictions) if int(p) == c)
    return ClassBlock(class_id=c, indices=indices)
