import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cfire.blackbox import BlackBox, MlpConfig, train_mlp
from cfire.dataset import Dataset

# the worked transaction-database example: letters a..e -> items 0..4
EXAMPLE_TRANSACTIONS = (
    frozenset({1, 2, 4}),          # bce
    frozenset({0, 1, 3, 4}),       # abde
    frozenset({0, 1, 3, 4}),       # abde
    frozenset({0, 1, 2, 4}),       # abce
    frozenset({0, 1, 2, 3, 4}),    # abcde
    frozenset({1, 2, 3}),          # bcd
)


class LinearBlackBox(BlackBox):
    """logits(x) = x @ V + c; exact gradients. For explainer oracles."""

    def __init__(self, weights, intercepts=None, train_mean=None, train_std=None):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.intercepts = (
            np.zeros(self.weights.shape[1])
            if intercepts is None
            else np.asarray(intercepts, dtype=np.float64)
        )
        self.classes = tuple(range(self.weights.shape[1]))
        if train_mean is not None:
            self.train_mean = np.asarray(train_mean, dtype=np.float64)
        if train_std is not None:
            self.train_std = np.asarray(train_std, dtype=np.float64)

    def logits_many(self, X):
        return np.asarray(X, dtype=np.float64) @ self.weights + self.intercepts

    @property
    def has_gradient(self):
        return True

    def gradient_many(self, X, c):
        k = self.class_index(c)
        return np.repeat(self.weights[:, k][None, :], len(np.atleast_2d(X)), axis=0)

    def gradient(self, x, c):
        return self.weights[:, self.class_index(c)].copy()


class FunctionBlackBox(BlackBox):
    """Binary black-box from an arbitrary scalar score; logit_1 = score(x),
    logit_0 = -score(x). No gradients."""

    def __init__(self, score_fn, train_mean=None, train_std=None):
        self.score_fn = score_fn
        self.classes = (0, 1)
        if train_mean is not None:
            self.train_mean = np.asarray(train_mean, dtype=np.float64)
        if train_std is not None:
            self.train_std = np.asarray(train_std, dtype=np.float64)

    def logits_many(self, X):
        scores = np.array([self.score_fn(row) for row in np.atleast_2d(X)])
        return np.stack([-scores, scores], axis=1)


def xor_dataset():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    return Dataset(X, ("x0", "x1"), (0, 1, 1, 0))


@pytest.fixture(scope="session")
def xor_model():
    return train_mlp(xor_dataset(), MlpConfig(hidden_width=8, epochs=2000, learning_rate=0.5, seed=3))


@pytest.fixture(scope="session")
def d6_model():
    """Small trained net on 6 features, for brute-force Shapley comparisons."""
    rng = np.random.default_rng(60)
    X = rng.uniform(-1, 1, size=(200, 6))
    y = ((X[:, 0] + X[:, 1] * X[:, 2] - X[:, 3]) > 0).astype(int)
    ds = Dataset(X, tuple(f"f{i}" for i in range(6)), tuple(int(v) for v in y))
    return train_mlp(ds, MlpConfig(hidden_width=12, epochs=150, learning_rate=0.2, seed=8))
