"""Faithfulness, compactness, completeness and explainer-agreement measures
for rule models, plus aggregation across a model ensemble."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .attribution import ImportantFeatureSet
from .blackbox import BlackBox
from .boxes import term_covers
from .dataset import Dataset
from .errors import ConfigError, DataError
from .rulemodel import RuleModel, predict_rules_many

_METRICS = ("precision", "coverage", "f1", "size", "prec_local")


@dataclass(frozen=True)
class EvalReport:
    precision: float
    coverage: float
    f1: float
    size: int
    complete: bool
    prec_local: float | None
    per_class_term_counts: dict[int, int]

    def doc(self) -> dict:
        return {
            "precision": self.precision,
            "coverage": self.coverage,
            "f1": self.f1,
            "size": self.size,
            "complete": self.complete,
            "prec_local": self.prec_local,
            "per_class_term_counts": {str(k): v for k, v in self.per_class_term_counts.items()},
        }


@dataclass(frozen=True)
class EnsembleReport:
    mean: dict[str, float]
    std: dict[str, float]
    completeness_rate: float
    n_models: int

    def doc(self) -> dict:
        return {
            "n_models": self.n_models,
            "mean": self.mean,
            "std": self.std,
            "completeness_rate": self.completeness_rate,
        }


def _chance_level(model: BlackBox, bb_predictions: np.ndarray, chance: str) -> float:
    classes = set(int(c) for c in model.classes)
    classes.update(int(p) for p in bb_predictions)
    if chance == "uniform":
        return 1.0 / len(classes)
    if chance == "majority":
        _, counts = np.unique(bb_predictions, return_counts=True)
        return float(counts.max() / counts.sum())
    raise ConfigError(f"chance must be 'uniform' or 'majority', got {chance!r}")


def evaluate(
    rm: RuleModel,
    model: BlackBox,
    X_eval: Dataset,
    explanations: Sequence[ImportantFeatureSet | None] | None = None,
    chance: str = "uniform",
    prec_local_mode: str = "winning",
) -> EvalReport:
    """Coverage, precision-on-covered, their harmonic-mean F1, term count,
    and the completeness flag (above-chance precision and a term for every
    class the black-box can emit). Prec-L is filled when per-sample
    important-feature sets are supplied."""
    if X_eval.n_samples == 0:
        raise DataError("cannot evaluate on an empty dataset")
    bb = model.predict_many(X_eval.samples)
    preds = predict_rules_many(rm, X_eval.samples)
    covered = np.array([not p.abstained for p in preds])
    agree = np.array([p.class_id == int(y) for p, y in zip(preds, bb)])

    coverage = float(covered.mean())
    precision = float(agree[covered].mean()) if covered.any() else 0.0
    f1 = 0.0 if precision + coverage == 0.0 else 2 * precision * coverage / (precision + coverage)

    term_counts = {dnf.class_id: len(dnf.terms) for dnf in rm.rules}
    size = sum(term_counts.values())
    expected = set(int(c) for c in model.classes)
    expected.update(int(p) for p in bb)
    all_classes_present = all(term_counts.get(c, 0) >= 1 for c in expected)
    complete = all_classes_present and precision > _chance_level(model, bb, chance)

    pl = None
    if explanations is not None:
        pl, _ = prec_local(rm, explanations, model, X_eval, mode=prec_local_mode)
    return EvalReport(
        precision=precision,
        coverage=coverage,
        f1=f1,
        size=size,
        complete=complete,
        prec_local=pl,
        per_class_term_counts=term_counts,
    )


def _term_alignment(term, features: frozenset[int]) -> float:
    box_feats = term.box.features
    if not box_feats:
        return 0.0
    return len(box_feats & features) / len(box_feats)


def prec_local(
    rm: RuleModel,
    explanations: Sequence[ImportantFeatureSet | None],
    model: BlackBox,
    X_eval: Dataset,
    mode: str = "winning",
) -> tuple[float, bool]:
    """Mean alignment between applied rules and important features, over the
    samples where the rule prediction agrees with the black-box.

    mode 'winning' scores the winning term only; 'all' averages over every
    satisfied term of the predicted class. Returns (value, vacuous) where
    vacuous means no sample agreed.
    """
    if mode not in ("winning", "all"):
        raise ConfigError(f"mode must be 'winning' or 'all', got {mode!r}")
    if len(explanations) != X_eval.n_samples:
        raise DataError(
            f"{len(explanations)} explanations for {X_eval.n_samples} samples"
        )
    bb = model.predict_many(X_eval.samples)
    preds = predict_rules_many(rm, X_eval.samples)
    scores = []
    for i, (p, y) in enumerate(zip(preds, bb)):
        if p.abstained or p.class_id != int(y):
            continue
        if explanations[i] is None:
            raise DataError(f"missing explanation for agreeing sample {i}")
        features = explanations[i].features
        if not features:
            scores.append(0.0)
            continue
        if mode == "winning":
            scores.append(_term_alignment(p.winning_term, features))
        else:
            satisfied = [
                t
                for dnf in rm.rules
                if dnf.class_id == p.class_id
                for t in dnf.terms
                if term_covers(t.box, X_eval.samples[i])
            ]
            scores.append(
                float(np.mean([_term_alignment(t, features) for t in satisfied]))
            )
    if not scores:
        warnings.warn("prec_local: no sample agrees with the black-box", RuntimeWarning)
        return 0.0, True
    return float(np.mean(scores)), False


def aggregate_reports(reports: Sequence[EvalReport]) -> EnsembleReport:
    """Per-metric mean and population standard deviation plus the fraction of
    complete models."""
    if not reports:
        raise DataError("cannot aggregate zero reports")
    mean: dict[str, float] = {}
    std: dict[str, float] = {}
    for metric in _METRICS:
        values = [getattr(r, metric) for r in reports]
        if metric == "prec_local":
            if any(v is None for v in values):
                if not all(v is None for v in values):
                    raise DataError("prec_local present for only part of the reports")
                continue
        arr = np.asarray(values, dtype=np.float64)
        mean[metric] = float(arr.mean())
        std[metric] = float(arr.std())
    rate = float(np.mean([1.0 if r.complete else 0.0 for r in reports]))
    return EnsembleReport(mean=mean, std=std, completeness_rate=rate, n_models=len(reports))


def evaluate_ensemble(
    rule_models: Sequence[RuleModel],
    models: Sequence[BlackBox],
    X_eval: Dataset,
    explanations_per_model: Sequence[Sequence[ImportantFeatureSet | None]] | None = None,
    chance: str = "uniform",
) -> EnsembleReport:
    """Evaluate aligned (rule model, black-box) pairs and aggregate."""
    if len(rule_models) != len(models):
        raise DataError(
            f"{len(rule_models)} rule models for {len(models)} black-boxes"
        )
    if not rule_models:
        raise DataError("empty ensemble")
    reports = []
    for i, (rm, model) in enumerate(zip(rule_models, models)):
        explanations = None if explanations_per_model is None else explanations_per_model[i]
        reports.append(evaluate(rm, model, X_eval, explanations=explanations, chance=chance))
    return aggregate_reports(reports)


def report_json(report: EvalReport) -> str:
    return json.dumps(report.doc(), indent=2)


def ensemble_json(report: EnsembleReport) -> str:
    return json.dumps(report.doc(), indent=2)


def ensemble_csv(reports: Sequence[EvalReport], labels: Sequence[str]) -> str:
    """Flat CSV, one row per model: identity label plus all scalar metrics."""
    if len(labels) != len(reports):
        raise DataError("one label per report required")
    lines = ["model,precision,coverage,f1,size,complete,prec_local"]
    for label, r in zip(labels, reports):
        pl = "" if r.prec_local is None else repr(r.prec_local)
        lines.append(
            f"{label},{r.precision!r},{r.coverage!r},{r.f1!r},{r.size},"
            f"{int(r.complete)},{pl}"
        )
    return "\n".join(lines)
