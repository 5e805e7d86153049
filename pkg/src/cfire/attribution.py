"""Local attribution explainers (KS, LI, IG) and their binarization.

All three target the predicted class's logit. Replacing a feature with its
baseline value models feature absence; the baseline defaults to the mean of
the black-box's training data. Every explainer is a deterministic function
of (model, x, params, seed).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .blackbox import BlackBox
from .errors import CapabilityError, ConfigError

EXPLAINER_IDS = ("KS", "LI", "IG")

_LIME_RIDGE = 1e-3


@dataclass(frozen=True)
class AttributionVector:
    weights: np.ndarray
    explainer_id: str
    sample_index: int

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if not np.all(np.isfinite(w)):
            raise ConfigError("attribution weights contain non-finite values")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class ImportantFeatureSet:
    features: frozenset[int]


@dataclass(frozen=True)
class ExplainerParams:
    """Shared explainer configuration; None fields resolve from the model."""

    iota: float = 0.01
    ks_budget: int = 300
    lime_budget: int = 300
    ig_steps: int = 200
    baseline: np.ndarray | None = None
    lime_scale: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.iota < 1.0:
            raise ConfigError(f"iota must lie in (0,1), got {self.iota}")
        for name in ("ks_budget", "lime_budget", "ig_steps"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.baseline is not None and not np.all(np.isfinite(self.baseline)):
            raise ConfigError("baseline contains non-finite values")

    def with_seed(self, seed: int) -> "ExplainerParams":
        return replace(self, seed=seed)


def _resolve_baseline(model: BlackBox, x: np.ndarray, p: ExplainerParams) -> np.ndarray:
    if p.baseline is not None:
        baseline = np.asarray(p.baseline, dtype=np.float64)
        if baseline.shape != x.shape:
            raise ConfigError(f"baseline shape {baseline.shape} != sample shape {x.shape}")
        return baseline
    mean = getattr(model, "train_mean", None)
    if mean is None:
        raise ConfigError(
            "no baseline given and the model carries no training statistics"
        )
    return np.asarray(mean, dtype=np.float64)


def integrated_gradients(
    model: BlackBox, x: np.ndarray, p: ExplainerParams, sample_index: int = 0
) -> AttributionVector:
    """Path integral of the predicted-class logit gradient, midpoint rule.

    w_i = (x_i - b_i) * mean_k grad_i(b + (k-0.5)/steps * (x-b)). Exact for
    linear logits at any step count; the completeness gap to
    logit(x) - logit(b) shrinks with the step count on smooth models.
    """
    if not model.has_gradient:
        raise CapabilityError("integrated gradients require gradient capability")
    x = np.asarray(x, dtype=np.float64)
    baseline = _resolve_baseline(model, x, p)
    c = model.predict(x)
    alphas = (np.arange(p.ig_steps) + 0.5) / p.ig_steps
    points = baseline[None, :] + alphas[:, None] * (x - baseline)[None, :]
    grads = model.gradient_many(points, c)
    if not np.all(np.isfinite(grads)):
        raise CapabilityError("non-finite gradient along the integration path")
    weights = (x - baseline) * grads.mean(axis=0)
    return AttributionVector(weights, "IG", sample_index)


def _kernel_size_masses(d: int) -> np.ndarray:
    """Unnormalized coalition-size distribution of the Shapley kernel."""
    sizes = np.arange(1, d)
    return (d - 1.0) / (sizes * (d - sizes))


def _draw_coalitions(d: int, budget: int, rng: np.random.Generator):
    """Coalitions (index tuples) with weights; sizes 1..d-1.

    Size classes are enumerated exhaustively, cheapest per-coalition mass
    first, while the remaining budget covers them; leftover budget samples
    sizes from the renormalized kernel distribution and coalitions uniformly
    within a size. With budget >= 2^d - 2, the result is the complete
    weighted coalition system and the downstream estimate is exact.
    """
    masses = _kernel_size_masses(d)
    probs = masses / masses.sum()
    counts = np.array([math.comb(d, s) for s in range(1, d)], dtype=np.int64)

    weights: dict[tuple[int, ...], float] = {}
    enumerated = np.zeros(d - 1, dtype=bool)
    remaining = budget
    # per-coalition mass decides enumeration order (outer sizes first)
    order = sorted(range(d - 1), key=lambda i: -(probs[i] / counts[i]))
    for i in order:
        if counts[i] <= remaining:
            w = probs[i] / counts[i]
            for combo in combinations(range(d), i + 1):
                weights[combo] = weights.get(combo, 0.0) + w
            remaining -= int(counts[i])
            enumerated[i] = True
    leftover = probs[~enumerated].sum()
    if leftover > 0.0 and remaining > 0:
        open_sizes = np.flatnonzero(~enumerated)
        size_probs = probs[open_sizes] / probs[open_sizes].sum()
        per_sample = leftover / remaining
        for _ in range(remaining):
            s = int(open_sizes[rng.choice(len(open_sizes), p=size_probs)]) + 1
            combo = tuple(sorted(rng.choice(d, size=s, replace=False).tolist()))
            weights[combo] = weights.get(combo, 0.0) + per_sample
    return list(weights.items())


def kernel_shap(
    model: BlackBox, x: np.ndarray, p: ExplainerParams, sample_index: int = 0
) -> AttributionVector:
    """Shapley-value estimate for the predicted-class logit.

    Weighted least squares over coalition indicators with the efficiency
    constraint sum(phi) = f(x) - f(baseline) enforced by variable
    elimination, so efficiency holds exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x.size
    baseline = _resolve_baseline(model, x, p)
    c = model.predict(x)
    k = model.class_index(c)
    fx = float(model.logits(x)[k])
    fb = float(model.logits(baseline)[k])
    delta = fx - fb
    if d == 1:
        return AttributionVector(np.array([delta]), "KS", sample_index)

    rng = np.random.default_rng(p.seed)
    coalitions = _draw_coalitions(d, p.ks_budget, rng)

    masked = np.repeat(baseline[None, :], len(coalitions), axis=0)
    Z = np.zeros((len(coalitions), d))
    w = np.empty(len(coalitions))
    for row, (combo, weight) in enumerate(coalitions):
        idx = list(combo)
        masked[row, idx] = x[idx]
        Z[row, idx] = 1.0
        w[row] = weight
    y = model.logits_many(masked)[:, k] - fb

    # eliminate phi_{d-1} via the efficiency constraint
    A = Z[:, : d - 1] - Z[:, d - 1 : d]
    b = y - Z[:, d - 1] * delta
    sw = np.sqrt(w)
    phi_head, _, rank, _ = np.linalg.lstsq(A * sw[:, None], b * sw, rcond=None)
    if rank < d - 1:
        warnings.warn(
            "kernel_shap: degenerate weight system, redrawing coalitions uniformly",
            RuntimeWarning,
        )
        sizes = rng.integers(1, d, size=p.ks_budget)
        uniform = {}
        for s in sizes:
            combo = tuple(sorted(rng.choice(d, size=int(s), replace=False).tolist()))
            uniform[combo] = uniform.get(combo, 0.0) + 1.0
        coalitions = list(uniform.items())
        masked = np.repeat(baseline[None, :], len(coalitions), axis=0)
        Z = np.zeros((len(coalitions), d))
        w = np.empty(len(coalitions))
        for row, (combo, weight) in enumerate(coalitions):
            idx = list(combo)
            masked[row, idx] = x[idx]
            Z[row, idx] = 1.0
            w[row] = weight
        y = model.logits_many(masked)[:, k] - fb
        A = Z[:, : d - 1] - Z[:, d - 1 : d]
        b = y - Z[:, d - 1] * delta
        sw = np.sqrt(w)
        phi_head, _, _, _ = np.linalg.lstsq(A * sw[:, None], b * sw, rcond=None)

    phi = np.empty(d)
    phi[: d - 1] = phi_head
    phi[d - 1] = delta - phi_head.sum()
    return AttributionVector(phi, "KS", sample_index)


def lime_local(
    model: BlackBox, x: np.ndarray, p: ExplainerParams, sample_index: int = 0
) -> AttributionVector:
    """Ridge-regularized local linear surrogate of the predicted-class logit.

    Gaussian perturbations around x scaled per feature by the black-box
    training stds; proximity weights from a Gaussian kernel on Euclidean
    distance with width 0.75*sqrt(d) of the mean perturbation distance.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x.size
    if p.lime_scale is not None:
        scale = np.asarray(p.lime_scale, dtype=np.float64)
    else:
        std = getattr(model, "train_std", None)
        scale = np.ones(d) if std is None else np.asarray(std, dtype=np.float64)
    if scale.shape != x.shape:
        raise ConfigError(f"lime_scale shape {scale.shape} != sample shape {x.shape}")

    c = model.predict(x)
    k = model.class_index(c)
    rng = np.random.default_rng(p.seed)
    noise = rng.standard_normal((p.lime_budget, d)) * scale
    perturbed = x[None, :] + noise
    y = model.logits_many(perturbed)[:, k]

    dist = np.linalg.norm(noise, axis=1)
    width = 0.75 * np.sqrt(d) * float(dist.mean())
    if width <= 0.0:
        width = 1.0
    w = np.exp(-(dist**2) / width**2)

    # weighted ridge with intercept via weighted centering
    wsum = w.sum()
    z_mean = (w[:, None] * noise).sum(axis=0) / wsum
    y_mean = float((w * y).sum() / wsum)
    Zc = noise - z_mean
    yc = y - y_mean
    gram = (Zc * w[:, None]).T @ Zc
    rhs = (Zc * w[:, None]).T @ yc
    alpha = _LIME_RIDGE
    while True:
        try:
            coef = np.linalg.solve(gram + alpha * np.eye(d), rhs)
        except np.linalg.LinAlgError:
            coef = None
        if coef is not None and np.all(np.isfinite(coef)):
            break
        alpha *= 10.0
        warnings.warn(
            f"lime_local: singular regression system, ridge raised to {alpha}",
            RuntimeWarning,
        )
        if alpha > 1e6:
            raise ConfigError("lime_local: regression system unsolvable")
    return AttributionVector(coef, "LI", sample_index)


def important_features(w: AttributionVector, iota: float) -> ImportantFeatureSet:
    """Features whose normalized absolute attribution exceeds iota.

    Scale-invariant: the weights are normalized by the sum of their absolute
    values first; an all-zero vector yields the empty set.
    """
    if not 0.0 < iota < 1.0:
        raise ConfigError(f"iota must lie in (0,1), got {iota}")
    magnitudes = np.abs(w.weights)
    total = magnitudes.sum()
    if total == 0.0:
        return ImportantFeatureSet(frozenset())
    return ImportantFeatureSet(frozenset(np.flatnonzero(magnitudes / total > iota).tolist()))


_EXPLAINERS = {
    "KS": kernel_shap,
    "LI": lime_local,
    "IG": integrated_gradients,
}


def get_explainer(explainer_id: str):
    try:
        return _EXPLAINERS[explainer_id.upper()]
    except KeyError:
        raise ConfigError(
            f"unknown explainer {explainer_id!r}; choose from {EXPLAINER_IDS}"
        ) from None


def dump_attributions(vectors: list[AttributionVector]) -> str:
    """CSV text: sample index followed by the d weights, one row per sample."""
    lines = []
    for v in sorted(vectors, key=lambda v: v.sample_index):
        lines.append(",".join([str(v.sample_index)] + [repr(float(x)) for x in v.weights]))
    return "\n".join(lines)
