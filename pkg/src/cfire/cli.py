"""End-to-end pipeline driver: load, split, train an ensemble, extract rule
models, evaluate on held-out data, and emit deterministic artifacts."""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import attribution as attr_mod
from . import blackbox as bb_mod
from . import dataset as ds_mod
from . import evaluation as eval_mod
from . import rulemodel as rm_mod
from .attribution import ExplainerParams, important_features
from .boxes import BoxParams
from .errors import CfireError, ConfigError, DataError
from .rulemodel import PipelineParams

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_ALL_FAILED = 3

# all randomness derives from one root seed: root ^ stage tag ^ index
_STAGE_SPLIT = 1 << 20
_STAGE_TRAIN = 2 << 20
_STAGE_EXPLAIN = 3 << 20

_THREADS_ENV = "CFIRE_THREADS"


@dataclass(frozen=True)
class RunConfig:
    data: str
    out: str
    label_column: str | None = "label"
    split: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0
    n_models: int = 10
    explainers: tuple[str, ...] = ("KS", "LI", "IG")
    iota: float = 0.01
    tau: float = 0.01
    max_depth: int = 7
    purity_threshold: float = 0.95
    dump_attributions: bool = False
    hidden_width: int = 32
    epochs: int = 200
    learning_rate: float = 0.1
    chance: str = "uniform"

    def pipeline_params(self, model_seed: int) -> PipelineParams:
        return PipelineParams(
            tau=self.tau,
            box=BoxParams(max_depth=self.max_depth, purity_threshold=self.purity_threshold),
            explainer=ExplainerParams(iota=self.iota, seed=model_seed),
        )


@dataclass
class RunResult:
    exit_code: int
    out_dir: Path
    reports: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)


def _thread_count() -> int:
    raw = os.environ.get(_THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        warnings.warn(f"{_THREADS_ENV}={raw!r} is not an integer; using 1", RuntimeWarning)
        return 1


def _write(path: Path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
        if not text.endswith("\n"):
            fh.write("\n")


def _extract_one(index, model, X, test, cfg):
    """Rule extraction + evaluation for one ensemble member."""
    params = cfg.pipeline_params(cfg.seed ^ _STAGE_EXPLAIN ^ index)
    sink: dict = {} if cfg.dump_attributions else None
    rm = rm_mod.cfire_multi(model, cfg.explainers, X, params, attribution_sink=sink)
    test_attr = rm_mod.explain_dataset(model, rm.explainer_id, test, params.explainer)
    explanations = [important_features(a, cfg.iota) for a in test_attr]
    report = eval_mod.evaluate(rm, model, test, explanations=explanations, chance=cfg.chance)
    return rm, report, sink


def run(cfg: RunConfig) -> RunResult:
    """Run the full pipeline; artifacts land in cfg.out. Per-model failures
    are recorded and skipped; only systemic problems abort the run."""
    out_dir = Path(cfg.out)
    try:
        for e in cfg.explainers:
            attr_mod.get_explainer(e)
        if cfg.n_models < 1:
            raise ConfigError(f"--models must be >= 1, got {cfg.n_models}")
        split_spec = ds_mod.SplitSpec(*cfg.split, seed=cfg.seed ^ _STAGE_SPLIT)
        cfg.pipeline_params(0)
        mlp_cfg = bb_mod.MlpConfig(
            hidden_width=cfg.hidden_width,
            epochs=cfg.epochs,
            learning_rate=cfg.learning_rate,
            seed=cfg.seed ^ _STAGE_TRAIN,
        )
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return RunResult(EXIT_CONFIG, out_dir)

    try:
        full = ds_mod.load_csv(cfg.data, cfg.label_column)
        train, X, test = ds_mod.split(full, split_spec)
        if train.labels is None:
            raise DataError("training a black-box requires a label column")
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return RunResult(EXIT_DATA, out_dir)

    out_dir.mkdir(parents=True, exist_ok=True)
    ensemble = bb_mod.train_ensemble(train, mlp_cfg, cfg.n_models, eval_ds=X)

    indices = list(range(len(ensemble.models)))
    results: dict[int, tuple] = {}
    failures: dict[int, str] = {}

    def job(i):
        return _extract_one(i, ensemble.models[i], X, test, cfg)

    threads = _thread_count()
    if threads == 1:
        for i in indices:
            try:
                results[i] = job(i)
            except CfireError as err:
                failures[i] = str(err)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {i: pool.submit(job, i) for i in indices}
            for i, fut in futures.items():
                try:
                    results[i] = fut.result()
                except CfireError as err:
                    failures[i] = str(err)

    reports, labels = [], []
    for i in indices:
        if i not in results:
            continue
        rm, report, sink = results[i]
        _write(out_dir / f"rule_model_{i:03d}.json", rm_mod.serialize(rm))
        _write(out_dir / f"rule_model_{i:03d}.rules.txt", rm_mod.format_rules(rm))
        _write(out_dir / f"eval_model_{i:03d}.json", eval_mod.report_json(report))
        if sink:
            for eid, vectors in sorted(sink.items()):
                _write(
                    out_dir / f"attributions_model{i:03d}_{eid}.csv",
                    attr_mod.dump_attributions(vectors),
                )
        reports.append(report)
        labels.append(f"{i:03d}")

    summary = [
        f"data: {cfg.data}",
        f"samples: train={train.n_samples} input={X.n_samples} test={test.n_samples} d={full.d}",
        f"models: {cfg.n_models} (failed: {len(failures)})",
        "ensemble accuracy on input set: mean={:.4f} std={:.4f}".format(
            *ensemble.accuracy_spread()
        ),
    ]
    for i in sorted(failures):
        summary.append(f"model {i:03d} FAILED: {failures[i]}")

    if not reports:
        summary.append("all models failed")
        _write(out_dir / "summary.txt", "\n".join(summary))
        print("\n".join(summary), file=sys.stderr)
        return RunResult(EXIT_ALL_FAILED, out_dir, failures=failures)

    ensemble_report = eval_mod.aggregate_reports(reports)
    _write(out_dir / "ensemble_report.json", eval_mod.ensemble_json(ensemble_report))
    _write(out_dir / "ensemble_report.csv", eval_mod.ensemble_csv(reports, labels))
    for metric in sorted(ensemble_report.mean):
        summary.append(
            f"{metric}: {ensemble_report.mean[metric]:.4f} "
            f"+- {ensemble_report.std[metric]:.4f}"
        )
    summary.append(f"completeness_rate: {ensemble_report.completeness_rate:.4f}")
    _write(out_dir / "summary.txt", "\n".join(summary))
    print("\n".join(summary))
    return RunResult(EXIT_OK, out_dir, reports=reports, failures=failures)


def _parse_split(raw: str) -> tuple[float, float, float]:
    parts = raw.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--split expects three comma-separated fractions")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--split fractions must be numbers, got {raw!r}")


def _parse_explainers(raw: str) -> tuple[str, ...]:
    return tuple(p.strip().upper() for p in raw.split(",") if p.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfire",
        description="Extract a global interval-rule model per class from a "
        "black-box classifier via local attributions and closed "
        "frequent feature-set mining.",
    )
    parser.add_argument("--data", required=True, help="CSV file with a header row")
    parser.add_argument("--label-col", default="label", help="name of the label column")
    parser.add_argument(
        "--split", type=_parse_split, default=(0.8, 0.1, 0.1),
        help="train,input,test fractions (default 0.8,0.1,0.1)",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--models", type=int, default=10, help="ensemble size")
    parser.add_argument(
        "--explainers", type=_parse_explainers, default=("KS", "LI", "IG"),
        help="comma-separated subset of ks,li,ig",
    )
    parser.add_argument("--iota", type=float, default=0.01, help="importance threshold")
    parser.add_argument("--tau", type=float, default=0.01, help="frequency threshold")
    parser.add_argument("--max-depth", type=int, default=7)
    parser.add_argument("--purity", type=float, default=0.95)
    parser.add_argument("--dump-attributions", action="store_true")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--hidden-width", type=int, default=32)
    parser.add_argument("--epochs", type=int, default=200)
    parser.add_argument("--learning-rate", type=float, default=0.1)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        data=args.data,
        out=args.out,
        label_column=args.label_col,
        split=args.split,
        seed=args.seed,
        n_models=args.models,
        explainers=args.explainers,
        iota=args.iota,
        tau=args.tau,
        max_depth=args.max_depth,
        purity_threshold=args.purity,
        dump_attributions=args.dump_attributions,
        hidden_width=args.hidden_width,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_CONFIG if err.code not in (0, None) else 0
    try:
        cfg = config_from_args(args)
        result = run(cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
