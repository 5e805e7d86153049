"""Black-box classifiers: a small trainable MLP, a prediction-file oracle,
and multi-seed ensembles of equally configured models."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataset as ds_mod
from .dataset import Dataset
from .errors import CapabilityError, ConfigError, DataError, TrainingError

_BATCH_SIZE = 32


class BlackBox(ABC):
    """Classifier interface: logits over a fixed class list, argmax prediction
    with lowest-class-id tie-break, and optionally input gradients."""

    classes: tuple[int, ...]

    @abstractmethod
    def logits_many(self, X: np.ndarray) -> np.ndarray:
        """(n, d) -> (n, n_classes) raw scores."""

    def logits(self, x: np.ndarray) -> np.ndarray:
        return self.logits_many(np.asarray(x, dtype=np.float64)[None, :])[0]

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        scores = self.logits_many(np.asarray(X, dtype=np.float64))
        # first argmax = lowest class id because classes are stored ascending
        return np.asarray(self.classes)[np.argmax(scores, axis=1)]

    def predict(self, x: np.ndarray) -> int:
        return int(self.predict_many(np.asarray(x, dtype=np.float64)[None, :])[0])

    def class_index(self, c: int) -> int:
        try:
            return self.classes.index(c)
        except ValueError:
            raise ConfigError(f"unknown class id {c}; model classes {self.classes}") from None

    @property
    def has_gradient(self) -> bool:
        return False

    def gradient(self, x: np.ndarray, c: int) -> np.ndarray:
        raise CapabilityError("this black-box does not expose gradients")

    def gradient_many(self, X: np.ndarray, c: int) -> np.ndarray:
        raise CapabilityError("this black-box does not expose gradients")


@dataclass(frozen=True)
class MlpConfig:
    hidden_width: int = 32
    epochs: int = 200
    learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.hidden_width < 1:
            raise ConfigError(f"hidden_width must be positive, got {self.hidden_width}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be positive, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")


class MlpClassifier(BlackBox):
    """One-hidden-layer tanh network with internal input standardization.

    Standardization statistics are fitted on the training data and kept with
    the model; they double as the default attribution baseline (mean) and
    perturbation scale (std) for explainers.
    """

    def __init__(self, w1, b1, w2, b2, mean, std, classes):
        self.w1 = w1
        self.b1 = b1
        self.w2 = w2
        self.b2 = b2
        self.train_mean = mean
        self.train_std = std
        self.classes = tuple(int(c) for c in classes)

    def _hidden(self, X: np.ndarray) -> np.ndarray:
        Z = (X - self.train_mean) / self.train_std
        return np.tanh(Z @ self.w1 + self.b1)

    def logits_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return self._hidden(X) @ self.w2 + self.b2

    @property
    def has_gradient(self) -> bool:
        return True

    def gradient_many(self, X: np.ndarray, c: int) -> np.ndarray:
        """d logit_c / dx for each row of X, shape (n, d)."""
        X = np.asarray(X, dtype=np.float64)
        k = self.class_index(c)
        H = self._hidden(X)
        G = ((1.0 - H * H) * self.w2[:, k]) @ self.w1.T
        return G / self.train_std

    def gradient(self, x: np.ndarray, c: int) -> np.ndarray:
        g = self.gradient_many(np.asarray(x, dtype=np.float64)[None, :], c)[0]
        if not np.all(np.isfinite(g)):
            raise TrainingError("non-finite gradient")
        return g


def _he_uniform(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


def train_mlp(train: Dataset, cfg: MlpConfig) -> MlpClassifier:
    """Train the MLP with mini-batch SGD on softmax cross-entropy.

    Single-threaded and fully deterministic for a given config seed.
    """
    if train.labels is None:
        raise DataError("training dataset has no labels")
    classes = sorted(set(train.labels))
    if len(classes) < 2:
        raise TrainingError(f"need at least 2 classes to train, got {classes}")
    class_to_idx = {c: i for i, c in enumerate(classes)}
    y = np.array([class_to_idx[c] for c in train.labels])
    X = train.samples
    n, d = X.shape
    k = len(classes)

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    Z = (X - mean) / std

    rng = np.random.default_rng(cfg.seed)
    w1 = _he_uniform(rng, d, (d, cfg.hidden_width))
    b1 = np.zeros(cfg.hidden_width)
    w2 = _he_uniform(rng, cfg.hidden_width, (cfg.hidden_width, k))
    b2 = np.zeros(k)

    onehot = np.eye(k)[y]
    lr = cfg.learning_rate
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, _BATCH_SIZE):
            batch = perm[start : start + _BATCH_SIZE]
            Zb, Yb = Z[batch], onehot[batch]
            H = np.tanh(Zb @ w1 + b1)
            logits = H @ w2 + b2
            shifted = logits - logits.max(axis=1, keepdims=True)
            expl = np.exp(shifted)
            probs = expl / expl.sum(axis=1, keepdims=True)
            loss = -np.mean(np.log(probs[np.arange(len(batch)), y[batch]] + 1e-12))
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            delta = (probs - Yb) / len(batch)
            grad_w2 = H.T @ delta
            grad_b2 = delta.sum(axis=0)
            back = (delta @ w2.T) * (1.0 - H * H)
            grad_w1 = Zb.T @ back
            grad_b1 = back.sum(axis=0)
            w1 -= lr * grad_w1
            b1 -= lr * grad_b1
            w2 -= lr * grad_w2
            b2 -= lr * grad_b2

    return MlpClassifier(w1, b1, w2, b2, mean, std, classes)


def gradient_check(model: BlackBox, x: np.ndarray, c: int, step: float = 1e-5) -> float:
    """Max relative error of analytic gradients vs central finite differences."""
    if not model.has_gradient:
        raise CapabilityError("model has no gradient capability")
    x = np.asarray(x, dtype=np.float64)
    analytic = model.gradient(x, c)
    k = model.class_index(c)
    fd = np.empty_like(x)
    for i in range(x.size):
        hi, lo = x.copy(), x.copy()
        hi[i] += step
        lo[i] -= step
        fd[i] = (model.logits(hi)[k] - model.logits(lo)[k]) / (2.0 * step)
    if not np.all(np.isfinite(analytic)):
        raise TrainingError("non-finite gradient")
    return float(np.max(np.abs(analytic - fd) / (np.abs(fd) + 1e-8)))


@dataclass(frozen=True)
class RashomonEnsemble:
    """Equally configured models that differ only in their training seed."""

    models: tuple[BlackBox, ...]
    accuracies: tuple[float, ...]

    def __post_init__(self):
        if not self.models:
            raise ConfigError("ensemble must contain at least one model")
        if len(self.accuracies) != len(self.models):
            raise ConfigError("one accuracy per model required")
        for a in self.accuracies:
            if not (np.isfinite(a) and 0.0 <= a <= 1.0):
                raise ConfigError(f"accuracy {a} outside [0,1]")

    def __len__(self) -> int:
        return len(self.models)

    def accuracy_spread(self) -> tuple[float, float]:
        acc = np.asarray(self.accuracies)
        return float(acc.mean()), float(acc.std())


def _accuracy(model: BlackBox, data: Dataset) -> float:
    preds = model.predict_many(data.samples)
    return float(np.mean(preds == np.asarray(data.labels)))


def train_ensemble(
    train: Dataset, cfg: MlpConfig, n: int, eval_ds: Dataset | None = None
) -> RashomonEnsemble:
    """Train n models with seeds cfg.seed + 0..n-1, sharing all other settings.

    Accuracies are measured on eval_ds (the input set) when given and labeled,
    otherwise on the training set.
    """
    if n < 1:
        raise ConfigError(f"ensemble size must be >= 1, got {n}")
    score_ds = eval_ds if eval_ds is not None and eval_ds.labels is not None else train
    models, accs = [], []
    for i in range(n):
        member_cfg = MlpConfig(
            hidden_width=cfg.hidden_width,
            epochs=cfg.epochs,
            learning_rate=cfg.learning_rate,
            seed=cfg.seed + i,
        )
        try:
            model = train_mlp(train, member_cfg)
        except TrainingError as err:
            raise TrainingError(f"model {i}: {err}") from err
        models.append(model)
        accs.append(_accuracy(model, score_ds))
    return RashomonEnsemble(tuple(models), tuple(accs))


class PredictionOracle(BlackBox):
    """Black-box backed by a table of samples and their recorded predictions.

    Answers by exact-row lookup; querying an unknown sample is an error.
    Without a logits table, logits are a one-hot indicator of the stored
    prediction (argmax-consistent with predict). No gradient capability.
    """

    def __init__(self, samples, predictions, classes, logits_table=None):
        self.classes = tuple(int(c) for c in classes)
        self._table: dict[tuple[float, ...], int] = {}
        self._logits: dict[tuple[float, ...], np.ndarray] = {}
        for row, pred in zip(samples, predictions):
            key = tuple(float(v) for v in row)
            if key in self._table and self._table[key] != int(pred):
                raise DataError(f"conflicting predictions for duplicate sample {key}")
            self._table[key] = int(pred)
        if logits_table is not None:
            for row, lg in zip(samples, logits_table):
                self._logits[tuple(float(v) for v in row)] = np.asarray(lg, dtype=np.float64)

    def _lookup(self, x: np.ndarray) -> tuple[float, ...]:
        key = tuple(float(v) for v in x)
        if key not in self._table:
            raise DataError(f"sample {key} not in the prediction table")
        return key

    def predict(self, x: np.ndarray) -> int:
        return self._table[self._lookup(np.asarray(x, dtype=np.float64))]

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.predict(row) for row in np.asarray(X, dtype=np.float64)])

    def logits_many(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros((len(X), len(self.classes)))
        for i, row in enumerate(np.asarray(X, dtype=np.float64)):
            key = self._lookup(row)
            if self._logits:
                out[i] = self._logits[key]
            else:
                out[i, self.class_index(self._table[key])] = 1.0
        return out


def load_prediction_oracle(
    samples_path: str | Path,
    predictions_path: str | Path,
    logits_path: str | Path | None = None,
) -> PredictionOracle:
    """Build a PredictionOracle from a samples CSV and a one-column class CSV."""
    samples_ds = ds_mod.load_csv(samples_path)
    preds_ds = ds_mod.load_csv(predictions_path)
    if preds_ds.d != 1:
        raise DataError(f"{predictions_path}: expected a single class-id column")
    if preds_ds.n_samples != samples_ds.n_samples:
        raise DataError(
            f"{preds_ds.n_samples} predictions for {samples_ds.n_samples} samples"
        )
    predictions = [int(v) for v in preds_ds.samples[:, 0]]
    if np.any(preds_ds.samples[:, 0] != np.asarray(predictions, dtype=np.float64)):
        raise DataError(f"{predictions_path}: class ids must be integers")

    logits_table = None
    classes = sorted(set(predictions))
    if logits_path is not None:
        logits_ds = ds_mod.load_csv(logits_path)
        if logits_ds.n_samples != samples_ds.n_samples:
            raise DataError(
                f"{logits_ds.n_samples} logit rows for {samples_ds.n_samples} samples"
            )
        try:
            classes = sorted(int(name) for name in logits_ds.feature_names)
        except ValueError:
            raise DataError(
                f"{logits_path}: logit column names must be integer class ids"
            ) from None
        order = np.argsort([int(name) for name in logits_ds.feature_names])
        logits_table = logits_ds.samples[:, order]
        if any(p not in classes for p in predictions):
            raise DataError("prediction file contains a class missing from logits header")
    return PredictionOracle(samples_ds.samples, predictions, classes, logits_table)
