"""Global rule models: per-class DNF assembly by greedy cover, selection among
explainers by rule accuracy, prediction with tie-breaking, serialization."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import attribution as attr_mod
from .attribution import AttributionVector, ExplainerParams, important_features
from .blackbox import BlackBox
from .boxes import Box, BoxParams, CandidateTerm, covers_many, learn_terms, term_covers
from .dataset import Dataset, class_block
from .errors import CfireError, ConfigError, DataError, PipelineError
from .itemsets import TransactionDB, enumerate_closed


@dataclass(frozen=True)
class PipelineParams:
    """Everything the extraction pipeline needs besides model and data."""

    tau: float = 0.01
    box: BoxParams = field(default_factory=BoxParams)
    explainer: ExplainerParams = field(default_factory=ExplainerParams)
    on_empty_class: str = "warn"

    def __post_init__(self):
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError(f"tau must lie in (0,1], got {self.tau}")
        if self.on_empty_class not in ("warn", "error"):
            raise ConfigError("on_empty_class must be 'warn' or 'error'")

    def doc(self) -> dict:
        return {
            "iota": self.explainer.iota,
            "tau": self.tau,
            "max_depth": self.box.max_depth,
            "purity_threshold": self.box.purity_threshold,
            "min_leaf_positives": self.box.min_leaf_positives,
            "ks_budget": self.explainer.ks_budget,
            "lime_budget": self.explainer.lime_budget,
            "ig_steps": self.explainer.ig_steps,
        }


@dataclass(frozen=True)
class ClassDNF:
    class_id: int
    terms: tuple[CandidateTerm, ...]


@dataclass(frozen=True)
class RuleModel:
    rules: tuple[ClassDNF, ...]
    explainer_id: str
    feature_names: tuple[str, ...]
    params: dict
    provenance: dict

    def __post_init__(self):
        ids = [dnf.class_id for dnf in self.rules]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate class ids in rule model")

    @property
    def size(self) -> int:
        return sum(len(dnf.terms) for dnf in self.rules)

    def class_ids(self) -> tuple[int, ...]:
        return tuple(dnf.class_id for dnf in self.rules)


@dataclass(frozen=True)
class Prediction:
    class_id: int | None
    winning_term: CandidateTerm | None
    n_satisfied_classes: int

    def __post_init__(self):
        if (self.class_id is None) != (self.winning_term is None):
            raise DataError("winning_term must be present exactly when not abstaining")

    @property
    def abstained(self) -> bool:
        return self.class_id is None


def greedy_select(
    terms: Sequence[CandidateTerm], positives: Iterable[int]
) -> list[CandidateTerm]:
    """Greedy set cover over the positives.

    Each round picks the term covering the most still-uncovered positives;
    ties fall to higher precision, then fewer constrained features, then
    earlier position in the candidate sequence. Stops when no term adds
    coverage.
    """
    remaining = set(positives)
    coverage = [set(t.covered_positive_indices or ()) & remaining for t in terms]
    available = set(range(len(terms)))
    selected: list[CandidateTerm] = []
    while remaining and available:
        best_i = None
        best_key = None
        for i in sorted(available):
            gain = len(coverage[i] & remaining)
            key = (
                gain,
                terms[i].precision_on_input,
                -len(terms[i].box.features),
                -i,
            )
            if best_key is None or key > best_key:
                best_key = key
                best_i = i
        if best_key[0] == 0:
            break
        selected.append(terms[best_i])
        remaining -= coverage[best_i]
        available.remove(best_i)
    return selected


def explain_dataset(
    model: BlackBox,
    explainer_id: str,
    X: Dataset,
    params: ExplainerParams,
    explainer_fn: Callable | None = None,
) -> list[AttributionVector]:
    """One attribution per sample, each with its own derived seed
    (base seed XOR sample index) so results are order-independent."""
    fn = explainer_fn if explainer_fn is not None else attr_mod.get_explainer(explainer_id)
    out = []
    for i, x in enumerate(X.samples):
        p_i = params.with_seed(params.seed ^ i)
        out.append(fn(model, x, p_i, sample_index=i))
    return out


def _class_ids(model: BlackBox, predictions: np.ndarray) -> list[int]:
    ids = set(int(c) for c in getattr(model, "classes", ()) or ())
    ids.update(int(p) for p in predictions)
    return sorted(ids)


def cfire(
    model: BlackBox,
    explainer: str,
    X: Dataset,
    params: PipelineParams | None = None,
    attributions: Sequence[AttributionVector] | None = None,
    explainer_fn: Callable | None = None,
) -> RuleModel:
    """Extract one rule model: per class, binarize attributions, mine closed
    frequent feature sets, learn candidate boxes, and greedy-select a DNF."""
    params = params or PipelineParams()
    explainer = explainer.upper()
    predictions = model.predict_many(X.samples)
    if attributions is None:
        attributions = explain_dataset(model, explainer, X, params.explainer, explainer_fn)
    if len(attributions) != X.n_samples:
        raise DataError(f"{len(attributions)} attributions for {X.n_samples} samples")

    rules = []
    for c in _class_ids(model, predictions):
        block = class_block(X, predictions, c)
        if len(block) == 0:
            message = f"class {c} has no samples in the input set"
            if params.on_empty_class == "error":
                raise PipelineError("class-block", message)
            warnings.warn(message, RuntimeWarning)
            continue
        transactions = [
            important_features(attributions[i], params.explainer.iota).features
            for i in block.indices
        ]
        db = TransactionDB(tuple(transactions), X.d)
        closed = enumerate_closed(db, params.tau)

        block_idx = np.asarray(block.indices, dtype=np.intp)
        neg_mask = np.ones(X.n_samples, dtype=bool)
        neg_mask[block_idx] = False
        class_samples = X.samples[block_idx]
        negatives = X.samples[neg_mask]

        terms: list[CandidateTerm] = []
        for cs in closed:
            if not cs.features:
                continue  # a zero-constraint term would cover everything
            terms.extend(learn_terms(cs, class_samples, negatives, params.box))
        selected = greedy_select(terms, range(len(block)))
        rules.append(ClassDNF(class_id=c, terms=tuple(selected)))

    return RuleModel(
        rules=tuple(rules),
        explainer_id=explainer,
        feature_names=X.feature_names,
        params=params.doc(),
        provenance={
            "seed": params.explainer.seed,
            "dataset_fingerprint": X.fingerprint(),
        },
    )


def rule_accuracy(rm: RuleModel, model: BlackBox, X: Dataset) -> float:
    """Fraction of samples where the rule prediction equals the black-box
    prediction; abstentions count as disagreement."""
    bb = model.predict_many(X.samples)
    preds = predict_rules_many(rm, X.samples)
    hits = sum(1 for p, y in zip(preds, bb) if p.class_id == int(y))
    return hits / len(bb) if len(bb) else 0.0


def cfire_multi(
    model: BlackBox,
    explainers: Sequence[str],
    X: Dataset,
    params: PipelineParams | None = None,
    explainer_fns: dict[str, Callable] | None = None,
    attribution_sink: dict[str, list[AttributionVector]] | None = None,
) -> RuleModel:
    """Run the pipeline once per explainer and keep the rule model with the
    highest rule-prediction accuracy on X (ties break in the canonical
    explainer order). All candidates' accuracies land in the provenance."""
    params = params or PipelineParams()
    requested = [e.upper() for e in explainers]
    if not requested:
        raise ConfigError("at least one explainer required")
    for e in requested:
        if e not in attr_mod.EXPLAINER_IDS:
            raise ConfigError(f"unknown explainer {e!r}")

    accuracies: dict[str, float] = {}
    failures: dict[str, str] = {}
    best: tuple[str, float, RuleModel] | None = None
    for eid in attr_mod.EXPLAINER_IDS:
        if eid not in requested:
            continue
        fn = (explainer_fns or {}).get(eid)
        try:
            attributions = explain_dataset(model, eid, X, params.explainer, fn)
            if attribution_sink is not None:
                attribution_sink[eid] = attributions
            rm = cfire(model, eid, X, params, attributions=attributions)
        except CfireError as err:
            failures[eid] = str(err)
            continue
        acc = rule_accuracy(rm, model, X)
        accuracies[eid] = acc
        if best is None or acc > best[1]:
            best = (eid, acc, rm)
    if best is None:
        raise PipelineError(
            "explainer-selection",
            "all explainers failed: " + "; ".join(f"{k}: {v}" for k, v in failures.items()),
        )
    eid, acc, rm = best
    provenance = dict(rm.provenance)
    provenance["explainer_accuracies"] = {k: accuracies[k] for k in sorted(accuracies)}
    if failures:
        provenance["explainer_failures"] = {k: failures[k] for k in sorted(failures)}
    provenance["selected_explainer"] = eid
    return RuleModel(rm.rules, rm.explainer_id, rm.feature_names, rm.params, provenance)


def _term_order(rm: RuleModel) -> list[tuple[int, CandidateTerm]]:
    out = []
    for dnf in rm.rules:
        for term in dnf.terms:
            out.append((dnf.class_id, term))
    return out


def predict_rules(rm: RuleModel, x: np.ndarray) -> Prediction:
    """Predict by the satisfied terms; ambiguity resolves to the term with
    the highest stored precision, then more covered positives, then the
    earlier term in canonical (class, term) order. No coverage -> abstain."""
    satisfied = [
        (class_id, order, term)
        for order, (class_id, term) in enumerate(_term_order(rm))
        if term_covers(term.box, x)
    ]
    if not satisfied:
        return Prediction(None, None, 0)
    classes = {class_id for class_id, _, _ in satisfied}
    class_id, _, term = max(
        satisfied, key=lambda s: (s[2].precision_on_input, s[2].covered_count, -s[1])
    )
    return Prediction(class_id, term, len(classes))


def predict_rules_many(rm: RuleModel, X: np.ndarray) -> list[Prediction]:
    """Vectorized predict_rules over the rows of X."""
    X = np.asarray(X, dtype=np.float64)
    ordered = _term_order(rm)
    if not ordered:
        return [Prediction(None, None, 0)] * len(X)
    cover = np.stack([covers_many(term.box, X) for _, term in ordered])
    # smaller rank wins: sort terms by (-precision, -covered, order)
    keys = sorted(
        range(len(ordered)),
        key=lambda i: (
            -ordered[i][1].precision_on_input,
            -ordered[i][1].covered_count,
            i,
        ),
    )
    rank = np.empty(len(ordered), dtype=np.intp)
    rank[keys] = np.arange(len(ordered))
    rank_matrix = np.where(cover, rank[:, None], np.iinfo(np.intp).max)
    winner = np.argmin(rank_matrix, axis=0)
    class_of = np.array([class_id for class_id, _ in ordered])
    out = []
    for j in range(len(X)):
        if not cover[:, j].any():
            out.append(Prediction(None, None, 0))
            continue
        n_classes = len(set(class_of[cover[:, j]].tolist()))
        class_id, term = ordered[winner[j]]
        out.append(Prediction(class_id, term, n_classes))
    return out


# --- serialization ---------------------------------------------------------


def _constraint_doc(box: Box, feature_names: Sequence[str]) -> list[dict]:
    docs = []
    for feat in sorted(box.constraints):
        lo, hi = box.constraints[feat]
        name = feature_names[feat] if feat < len(feature_names) else f"f{feat}"
        docs.append({"feature": feat, "name": name, "lo": lo, "hi": hi})
    return docs


def serialize(rm: RuleModel) -> str:
    """JSON document for a rule model; stable key order, byte-deterministic."""
    doc = {
        "classes": [
            {
                "class_id": dnf.class_id,
                "terms": [
                    {
                        "constraints": _constraint_doc(term.box, rm.feature_names),
                        "precision": term.precision_on_input,
                        "covered": term.covered_count,
                    }
                    for term in dnf.terms
                ],
            }
            for dnf in rm.rules
        ],
        "explainer": rm.explainer_id,
        "params": rm.params,
        "provenance": {**rm.provenance, "feature_names": list(rm.feature_names)},
    }
    return json.dumps(doc, indent=2)


class SchemaError(DataError):
    """Rule-model document violates the schema; message names the path."""


def _expect(obj, key, kind, path):
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected an object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}: missing")
    value = obj[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"{path}.{key}: expected a number")
        return float(value)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise SchemaError(f"{path}.{key}: expected {kind.__name__}")
    return value


def deserialize(text: str) -> RuleModel:
    """Parse a rule-model document; schema violations name the failing path."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SchemaError(f"invalid JSON: {err}") from None
    classes = _expect(doc, "classes", list, "$")
    explainer = _expect(doc, "explainer", str, "$")
    params = _expect(doc, "params", dict, "$")
    provenance = _expect(doc, "provenance", dict, "$")
    feature_names = tuple(provenance.get("feature_names", ()))
    rules = []
    for ci, cls in enumerate(classes):
        cpath = f"$.classes[{ci}]"
        class_id = _expect(cls, "class_id", int, cpath)
        terms = []
        for ti, term_doc in enumerate(_expect(cls, "terms", list, cpath)):
            tpath = f"{cpath}.terms[{ti}]"
            constraints = {}
            for ki, con in enumerate(_expect(term_doc, "constraints", list, tpath)):
                kpath = f"{tpath}.constraints[{ki}]"
                feat = _expect(con, "feature", int, kpath)
                lo = _expect(con, "lo", float, kpath)
                hi = _expect(con, "hi", float, kpath)
                if feat in constraints:
                    raise SchemaError(f"{kpath}: duplicate feature {feat}")
                constraints[feat] = (lo, hi)
            terms.append(
                CandidateTerm(
                    box=Box(constraints),
                    source_set=frozenset(constraints),
                    covered_positive_indices=None,
                    precision_on_input=_expect(term_doc, "precision", float, tpath),
                    covered_count=_expect(term_doc, "covered", int, tpath),
                )
            )
        rules.append(ClassDNF(class_id=class_id, terms=tuple(terms)))
    provenance = {k: v for k, v in provenance.items() if k != "feature_names"}
    return RuleModel(tuple(rules), explainer, feature_names, params, provenance)


def format_rules(rm: RuleModel) -> str:
    """Human-readable rendering: one DNF per class, named bounded intervals."""
    lines = [f"explainer: {rm.explainer_id}   terms: {rm.size}"]
    for dnf in rm.rules:
        if not dnf.terms:
            lines.append(f"{dnf.class_id}: (no terms)")
            continue
        rendered = []
        for term in dnf.terms:
            parts = []
            for feat in sorted(term.box.constraints):
                lo, hi = term.box.constraints[feat]
                name = rm.feature_names[feat] if feat < len(rm.feature_names) else f"f{feat}"
                parts.append(f"{name} in [{lo:g}, {hi:g}]")
            rendered.append("(" + " and ".join(parts) + ")")
        lines.append(f"{dnf.class_id}: " + "\n   or ".join(rendered))
    return "\n".join(lines)
