"""Config-driven experiment commands.

Subcommands: ingest, stats, select, resample, train, sweep, cascade,
binary-study, report. Options come from a JSON config file (--config) with
command-line flags overriding individual fields. Every run needs a seed
(--seed flag, config "seed", or the READMIT_SEED environment variable) and an
output directory, and writes three files there: config.json (the resolved
config echo), report.tsv, and report.txt. Reports embed the input CSV's
content hash and never embed timestamps or the output path, so identical
configs produce byte-identical reports.

Exit codes: 0 success, 1 config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .data import (Dataset, dataset_sha256, load_dataset, min_max_normalize,
                   save_dataset_csv, stratified_kfold, stratified_subsample)
from .ensemble import (BINARY_REGIMES, binary_outer_study, cascade_evaluate,
                       cascade_fit, cross_validate_cascade, save_cascade)
from .errors import ConfigError, DataError, NumericError
from .evaluate import cross_validate, grid_sweep, metrics
from .features import SCORERS, per_class_stats, select_k_best
from .models import MODEL_KINDS, NetworkClassifier, make_builder
from .nn import ARCHITECTURES
from .report import RunReport, class_stats_section, format_percent
from .resample import METHODS as RESAMPLE_METHODS
from .resample import ResamplePlan, apply_plan

PAPER_GRID = {
    "epochs": [10, 50],
    "learning_rate": [1e-5, 1e-4, 1e-3, 1e-2],
    "batch_size": [16, 32, 64],
}

_MODEL_DEFAULTS = {
    "network": {"arch": "cnn2", "epochs": 10, "learning_rate": 1e-4,
                "batch_size": 64, "optimizer": "adam", "kernel_size": None,
                "dropout": 0.2},
    "gbm": {"n_rounds": 100, "learning_rate": 0.1, "max_depth": 3,
            "min_samples_leaf": 1},
    "forest": {"n_trees": 100, "max_depth": None, "min_samples_leaf": 1,
               "features_per_split": "sqrt"},
}


class _Parser(argparse.ArgumentParser):
    """argparse reports usage problems as config errors (exit code 1)."""

    def error(self, message):
        raise ConfigError(message)


def _add_common(parser: _Parser, *, needs_data: bool = True) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--out", help="output directory for this run's reports")
    parser.add_argument("--seed", type=int, help="master seed (or READMIT_SEED env)")
    parser.add_argument("--workers", type=int,
                        help="fold-level parallelism (default: available cores)")
    if needs_data:
        parser.add_argument("--data", help="input CSV path")
        parser.add_argument("--normalize", action=argparse.BooleanOptionalAction,
                            help="min-max scale features to [0,1] (default on)")
        parser.add_argument("--fraction", type=float,
                            help="stratified subsample fraction in (0,1]")


def _add_cv(parser: _Parser) -> None:
    parser.add_argument("--folds", type=int, help="cross-validation folds (default 10)")
    parser.add_argument("--paper-mode", action="store_true", default=None,
                        help="resample the whole dataset before fold splitting "
                             "instead of per training fold")


def _add_model(parser: _Parser) -> None:
    parser.add_argument("--model", choices=MODEL_KINDS, help="model kind")
    parser.add_argument("--arch", choices=ARCHITECTURES, help="network architecture")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--learning-rate", type=float)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--optimizer", choices=("sgd", "adam", "adabelief"))
    parser.add_argument("--kernel-size", type=int, help="cnn2-family filter width")
    parser.add_argument("--dropout", type=float)
    parser.add_argument("--n-rounds", type=int, help="boosting rounds")
    parser.add_argument("--max-depth", type=int, help="tree depth limit")
    parser.add_argument("--n-trees", type=int, help="forest size")


def _add_resample(parser: _Parser) -> None:
    parser.add_argument("--resample-method", choices=RESAMPLE_METHODS)
    parser.add_argument("--k-neighbors", type=int)
    parser.add_argument("--nearmiss-version", type=int, choices=(1, 2, 3))


def _add_select(parser: _Parser) -> None:
    parser.add_argument("--select-method", choices=sorted(SCORERS))
    parser.add_argument("--select-k", type=int)
    parser.add_argument("--paper-exclusion", action="store_true", default=None,
                        help="also exclude zero-mean features from pearson scoring")


def build_parser() -> _Parser:
    parser = _Parser(prog="readmitlab",
                     description="Readmission-style tabular classification experiments.")
    sub = parser.add_subparsers(dest="command", metavar="subcommand")

    p = sub.add_parser("ingest", help="load a CSV and report its shape and class balance")
    _add_common(p)

    p = sub.add_parser("stats", help="per-class feature means and variances")
    _add_common(p)
    p.add_argument("--features", help="comma-separated feature names (default: all)")

    p = sub.add_parser("select", help="univariate feature scores and top-k selection")
    _add_common(p)
    _add_select(p)
    _add_cv(p)

    p = sub.add_parser("resample", help="rebalance classes and report the counts")
    _add_common(p)
    _add_resample(p)
    p.add_argument("--write-csv", action="store_true", default=None,
                   help="write the resampled rows as resampled.csv in the output dir")

    p = sub.add_parser("train", help="cross-validate one model configuration")
    _add_common(p)
    _add_cv(p)
    _add_model(p)
    _add_resample(p)
    _add_select(p)

    p = sub.add_parser("sweep", help="grid-search epochs x learning rate x batch size")
    _add_common(p)
    _add_cv(p)
    _add_model(p)
    _add_resample(p)

    p = sub.add_parser("cascade", help="network + binary booster two-stage pipeline")
    _add_common(p)
    _add_cv(p)
    _add_model(p)
    _add_resample(p)
    p.add_argument("--save-model", action="store_true", default=None,
                   help="persist the cascade fitted on the full dataset")

    p = sub.add_parser("binary-study",
                       help="outer-class binary problem under three balance regimes")
    _add_common(p)
    _add_cv(p)
    p.add_argument("--regimes", help="comma-separated subset of " + ",".join(BINARY_REGIMES))

    p = sub.add_parser("report", help="collate the reports of previous runs")
    _add_common(p, needs_data=False)
    p.add_argument("--runs", nargs="+", help="run directories to collate")

    return parser


# ---------------------------------------------------------------------------
# config resolution


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        payload = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(payload, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    return payload


_TOP_KEYS = {"command", "dataset", "normalize", "fraction", "seed", "workers",
             "folds", "paper_mode", "select", "resample", "model", "network",
             "booster", "grid", "features", "regimes", "write_csv",
             "save_model", "compare_ks", "runs", "out"}


def _check_keys(cfg: dict) -> None:
    for key in cfg:
        if key not in _TOP_KEYS:
            raise ConfigError(f"invalid config field {key!r}")


def _resolve(args: argparse.Namespace, command: str) -> tuple[dict, Path]:
    """Merge defaults <- config file <- flags into one resolved config dict."""
    cfg = _load_config_file(args.config)
    _check_keys(cfg)

    def override(key: str, value):
        if value is not None:
            cfg[key] = value

    override("dataset", getattr(args, "data", None))
    override("normalize", getattr(args, "normalize", None))
    override("fraction", getattr(args, "fraction", None))
    override("seed", args.seed)
    override("workers", args.workers)
    override("folds", getattr(args, "folds", None))
    override("paper_mode", getattr(args, "paper_mode", None))
    override("features", getattr(args, "features", None))
    override("write_csv", getattr(args, "write_csv", None))
    override("save_model", getattr(args, "save_model", None))
    override("runs", getattr(args, "runs", None))
    if getattr(args, "regimes", None) is not None:
        cfg["regimes"] = [r.strip() for r in args.regimes.split(",") if r.strip()]

    if getattr(args, "select_method", None) is not None or getattr(args, "select_k", None) is not None:
        section = dict(cfg.get("select") or {})
        if args.select_method is not None:
            section["method"] = args.select_method
        if args.select_k is not None:
            section["k"] = args.select_k
        cfg["select"] = section
    if getattr(args, "paper_exclusion", None):
        section = dict(cfg.get("select") or {})
        section["paper_exclusion"] = True
        cfg["select"] = section

    if getattr(args, "resample_method", None) is not None:
        section = dict(cfg.get("resample") or {})
        section["method"] = args.resample_method
        cfg["resample"] = section
    for flag, field in (("k_neighbors", "k_neighbors"), ("nearmiss_version", "nearmiss_version")):
        value = getattr(args, flag, None)
        if value is not None:
            section = dict(cfg.get("resample") or {})
            section[field] = value
            cfg["resample"] = section

    model_flags = {"kind": getattr(args, "model", None),
                   "arch": getattr(args, "arch", None),
                   "epochs": getattr(args, "epochs", None),
                   "learning_rate": getattr(args, "learning_rate", None),
                   "batch_size": getattr(args, "batch_size", None),
                   "optimizer": getattr(args, "optimizer", None),
                   "kernel_size": getattr(args, "kernel_size", None),
                   "dropout": getattr(args, "dropout", None),
                   "n_rounds": getattr(args, "n_rounds", None),
                   "max_depth": getattr(args, "max_depth", None),
                   "n_trees": getattr(args, "n_trees", None)}
    if any(v is not None for v in model_flags.values()):
        section = dict(cfg.get("model") or {})
        for field, value in model_flags.items():
            if value is not None:
                section[field] = value
        cfg["model"] = section

    if command == "report":
        if not cfg.get("runs"):
            raise ConfigError("report needs --runs (or config field 'runs')")
    else:
        if "seed" not in cfg:
            env = os.environ.get("READMIT_SEED")
            if env is None:
                raise ConfigError("a seed is required: --seed, config 'seed', or READMIT_SEED")
            try:
                cfg["seed"] = int(env)
            except ValueError:
                raise ConfigError(f"READMIT_SEED must be an integer, got {env!r}")
        cfg["seed"] = int(cfg["seed"])
        if command != "report" and not cfg.get("dataset"):
            raise ConfigError("an input CSV is required: --data or config 'dataset'")

    cfg.setdefault("normalize", True)
    cfg.setdefault("fraction", None)
    if cfg["fraction"] is not None:
        fraction = float(cfg["fraction"])
        if not 0.0 < fraction <= 1.0:
            raise ConfigError(f"invalid config field 'fraction': {fraction} outside (0, 1]")
        cfg["fraction"] = fraction
    cfg.setdefault("workers", os.cpu_count() or 1)
    cfg["workers"] = max(1, int(cfg["workers"]))
    cfg.setdefault("folds", 10)
    cfg["folds"] = int(cfg["folds"])
    cfg.setdefault("paper_mode", False)
    cfg["command"] = command

    out = cfg.pop("out", None)
    out = getattr(args, "out", None) or out
    if out is None:
        raise ConfigError("an output directory is required: --out or config 'out'")
    return cfg, Path(out)


def _model_section(cfg: dict, default_kind: str = "network",
                   arch_default: str | None = None) -> dict:
    section = dict(cfg.get("model") or {})
    kind = section.pop("kind", default_kind)
    if kind not in MODEL_KINDS:
        raise ConfigError(f"invalid config field 'model.kind': {kind!r}")
    defaults = dict(_MODEL_DEFAULTS[kind])
    if kind == "network" and arch_default is not None:
        defaults["arch"] = arch_default
    unknown = set(section) - set(defaults)
    if unknown:
        raise ConfigError(f"invalid config field 'model.{sorted(unknown)[0]}'")
    defaults.update(section)
    cfg["model"] = {"kind": kind, **defaults}
    return dict(defaults)


def _resample_plan(cfg: dict) -> ResamplePlan | None:
    section = cfg.get("resample")
    if not section:
        cfg["resample"] = None
        return None
    section = dict(section)
    method = section.pop("method", None)
    if method is None:
        raise ConfigError("invalid config field 'resample': missing 'method'")
    known = {"k_neighbors", "target_counts", "nearmiss_version", "n_ref"}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"invalid config field 'resample.{sorted(unknown)[0]}'")
    try:
        plan = ResamplePlan(method=method, seed=cfg["seed"], **section)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid config field 'resample': {exc}")
    cfg["resample"] = plan.to_dict()
    cfg["resample"].pop("seed")  # derived from the run seed
    return plan


def _load_data(cfg: dict, report: RunReport) -> Dataset:
    path = cfg["dataset"]
    data = load_dataset(path)
    report.add_line(f"dataset sha256: {dataset_sha256(path)}")
    report.add_line(f"dataset rows: {data.n_instances}, features: {data.n_features}")
    if cfg["fraction"] is not None:
        data = stratified_subsample(data, cfg["fraction"], cfg["seed"])
        report.add_line(f"stratified subsample: fraction {cfg['fraction']} "
                        f"-> {data.n_instances} rows")
    if cfg["normalize"]:
        data, scaling = min_max_normalize(data)
        if scaling.degenerate_columns:
            report.add_line("constant features scaled to zero: "
                            + ", ".join(scaling.degenerate_columns))
    return data


def _apply_selection(cfg: dict, data: Dataset, report: RunReport) -> Dataset:
    section = cfg.get("select")
    if not section:
        cfg["select"] = None
        return data
    section = dict(section)
    method = section.pop("method", None)
    k = section.pop("k", None)
    paper_exclusion = bool(section.pop("paper_exclusion", False))
    if section:
        raise ConfigError(f"invalid config field 'select.{sorted(section)[0]}'")
    if method not in SCORERS:
        raise ConfigError(f"invalid config field 'select.method': {method!r}")
    if k is None:
        raise ConfigError("invalid config field 'select': missing 'k'")
    cfg["select"] = {"method": method, "k": int(k), "paper_exclusion": paper_exclusion}
    if method == "pearson":
        table = SCORERS[method](data, paper_exclusion=paper_exclusion)
    else:
        table = SCORERS[method](data)
    keep = select_k_best(table, int(k))
    kept_names = [data.feature_names[i] for i in keep]
    report.add_line(f"selected {len(keep)} features by {method}: " + ", ".join(kept_names))
    return data.select_features(keep)


def _class_counts_rows(data: Dataset) -> list[list[str]]:
    counts = data.class_counts()
    total = data.n_instances
    return [[str(c), data.class_names.get(c, str(c)), str(n),
             format_percent(n / total)]
            for c, n in sorted(counts.items())]


def _add_cv_sections(report: RunReport, result, title: str) -> None:
    report.add_table(
        f"{title}: per-fold accuracy",
        ["fold", "accuracy"],
        [[str(i), format_percent(m.accuracy)] for i, m in enumerate(result.fold_metrics)],
    )
    report.add_metrics(f"{title}: mean over folds", result.mean_metrics)
    report.add_metrics(f"{title}: pooled", metrics(result.pooled_matrix))
    report.add_confusion(f"{title}: pooled confusion", result.pooled_matrix)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_ingest(cfg: dict, out: Path) -> int:
    report = RunReport("ingest", cfg)
    data = _load_data(cfg, report)
    report.add_table("class balance", ["class", "name", "count", "share_pct"],
                     _class_counts_rows(data))
    report.write(out)
    print(report.render_text())
    return 0


def _cmd_stats(cfg: dict, out: Path) -> int:
    report = RunReport("stats", cfg)
    data = _load_data(cfg, report)
    wanted = cfg.get("features")
    if isinstance(wanted, str):
        wanted = [name.strip() for name in wanted.split(",") if name.strip()]
    cfg["features"] = wanted
    if wanted:
        missing = [name for name in wanted if name not in data.feature_names]
        if missing:
            raise DataError(f"unknown feature name {missing[0]!r}")
        columns = [data.feature_names.index(name) for name in wanted]
    else:
        columns = None
    stats = per_class_stats(data, features=columns)
    header, rows = class_stats_section(stats.feature_names, stats.classes,
                                       stats.means, stats.variances)
    report.add_table("per-class feature statistics", header, rows)
    report.write(out)
    print(report.render_text())
    return 0


def _cmd_select(cfg: dict, out: Path) -> int:
    report = RunReport("select", cfg)
    data = _load_data(cfg, report)
    section = dict(cfg.get("select") or {})
    method = section.get("method", "chi2")
    k = int(section.get("k", data.n_features))
    paper_exclusion = bool(section.get("paper_exclusion", False))
    cfg["select"] = {"method": method, "k": k, "paper_exclusion": paper_exclusion}
    if method not in SCORERS:
        raise ConfigError(f"invalid config field 'select.method': {method!r}")
    if method == "pearson":
        table = SCORERS[method](data, paper_exclusion=paper_exclusion)
    else:
        table = SCORERS[method](data)

    rows = []
    for i, name in enumerate(table.feature_names):
        if i in table.excluded:
            rows.append([name, "excluded", "-", table.excluded[i]])
        else:
            rows.append([name, repr(float(table.scores[i])), str(int(table.ranks[i])), ""])
    report.add_table(f"{method} scores", ["feature", "score", "rank", "note"], rows)
    keep = select_k_best(table, k)
    report.add_line(f"top {k} by {method}: "
                    + ", ".join(data.feature_names[i] for i in keep))

    compare_ks = cfg.get("compare_ks")
    if compare_ks:
        cfg["compare_ks"] = [int(v) for v in compare_ks]
        model_params = _model_section(cfg, default_kind="gbm")
        kind = cfg["model"]["kind"]
        folds_all = stratified_kfold(data.labels, cfg["folds"], cfg["seed"])
        comparison = []
        for kk in cfg["compare_ks"]:
            subset = data.select_features(select_k_best(table, kk))
            result = cross_validate(subset, folds_all,
                                    make_builder(kind, cfg["seed"], **model_params),
                                    workers=cfg["workers"])
            comparison.append([str(kk), format_percent(result.mean_metrics.accuracy),
                               format_percent(result.mean_metrics.macro_f)])
        report.add_table(f"{kind} accuracy by feature count",
                         ["k", "mean_accuracy", "mean_macro_f"], comparison)
    else:
        cfg["compare_ks"] = None

    report.write(out)
    print(report.render_text())
    return 0


def _cmd_resample(cfg: dict, out: Path) -> int:
    report = RunReport("resample", cfg)
    data = _load_data(cfg, report)
    plan = _resample_plan(cfg)
    if plan is None:
        raise ConfigError("resample needs a plan: --resample-method or config 'resample'")
    report.add_table("class balance before", ["class", "name", "count", "share_pct"],
                     _class_counts_rows(data))
    resampled = apply_plan(data, plan)
    report.add_table("class balance after", ["class", "name", "count", "share_pct"],
                     _class_counts_rows(resampled))
    write_csv = bool(cfg.get("write_csv"))
    cfg["write_csv"] = write_csv
    report.write(out)
    if write_csv:
        save_dataset_csv(resampled, out / "resampled.csv")
    print(report.render_text())
    return 0


def _cmd_train(cfg: dict, out: Path) -> int:
    report = RunReport("train", cfg)
    data = _load_data(cfg, report)
    data = _apply_selection(cfg, data, report)
    plan = _resample_plan(cfg)
    model_params = _model_section(cfg)
    kind = cfg["model"]["kind"]

    if cfg["paper_mode"] and plan is not None:
        data = apply_plan(data, plan)
        plan = None
        report.add_line("paper mode: whole dataset resampled before fold splitting")

    folds = stratified_kfold(data.labels, cfg["folds"], cfg["seed"])
    result = cross_validate(data, folds, make_builder(kind, cfg["seed"], **model_params),
                            resample_plan=plan, workers=cfg["workers"])
    _add_cv_sections(report, result, f"{kind} cross-validation")
    report.write(out)
    print(report.render_text())
    return 0


def _cmd_sweep(cfg: dict, out: Path) -> int:
    report = RunReport("sweep", cfg)
    data = _load_data(cfg, report)
    plan = _resample_plan(cfg)
    model_params = _model_section(cfg, arch_default="vanilla")
    if cfg["model"]["kind"] != "network":
        raise ConfigError("sweep drives network training; model.kind must be 'network'")

    grid = dict(cfg.get("grid") or {})
    unknown = set(grid) - set(PAPER_GRID)
    if unknown:
        raise ConfigError(f"invalid config field 'grid.{sorted(unknown)[0]}'")
    resolved_grid = {axis: list(grid.get(axis, PAPER_GRID[axis])) for axis in PAPER_GRID}
    cfg["grid"] = resolved_grid

    if cfg["paper_mode"] and plan is not None:
        data = apply_plan(data, plan)
        plan = None
        report.add_line("paper mode: whole dataset resampled before fold splitting")

    folds = stratified_kfold(data.labels, cfg["folds"], cfg["seed"])
    fixed = {key: model_params[key] for key in
             ("arch", "optimizer", "kernel_size", "dropout")}

    def build(fold: int, epochs: int, lr: float, batch: int) -> NetworkClassifier:
        return NetworkClassifier(seed=cfg["seed"] + fold, epochs=epochs,
                                 learning_rate=lr, batch_size=batch, **fixed)

    rows = grid_sweep(data, folds, build,
                      tuple(resolved_grid["epochs"]),
                      tuple(resolved_grid["learning_rate"]),
                      tuple(resolved_grid["batch_size"]),
                      resample_plan=plan, workers=cfg["workers"])

    table = []
    for i, row in enumerate(rows):
        table.append([
            "*" if i == 0 else "",
            str(row.epochs), repr(row.learning_rate), str(row.batch_size),
            format_percent(row.accuracy),
            format_percent(row.result.mean_metrics.macro_f),
            row.note,
        ])
    report.add_table("grid results, best first",
                     ["best", "epochs", "learning_rate", "batch_size",
                      "mean_accuracy", "mean_macro_f", "note"], table)
    best = rows[0]
    report.add_line(f"best combination: epochs={best.epochs} "
                    f"learning_rate={best.learning_rate!r} batch_size={best.batch_size} "
                    f"mean accuracy {format_percent(best.accuracy)}")
    report.write(out)
    print(report.render_text())
    return 0


def _cmd_cascade(cfg: dict, out: Path) -> int:
    report = RunReport("cascade", cfg)
    data = _load_data(cfg, report)
    plan = _resample_plan(cfg)

    # model flags feed the stage-1 network, except the boosting-only knobs
    # (n_rounds, max_depth), which feed stage 2; the booster's own learning
    # rate is set through the config file's "booster" section.
    network_section = dict(cfg.get("network") or {})
    booster_section = dict(cfg.get("booster") or {})
    model_section = dict(cfg.get("model") or {})
    model_section.pop("kind", None)
    for key, value in model_section.items():
        if key in _MODEL_DEFAULTS["network"]:
            network_section.setdefault(key, value)
        elif key in _MODEL_DEFAULTS["gbm"]:
            booster_section.setdefault(key, value)
        else:
            raise ConfigError(f"invalid config field 'model.{key}'")
    cfg.pop("model", None)

    net_defaults = dict(_MODEL_DEFAULTS["network"])
    unknown = set(network_section) - set(net_defaults)
    if unknown:
        raise ConfigError(f"invalid config field 'network.{sorted(unknown)[0]}'")
    net_defaults.update(network_section)
    cfg["network"] = net_defaults

    gbm_defaults = dict(_MODEL_DEFAULTS["gbm"])
    unknown = set(booster_section) - set(gbm_defaults)
    if unknown:
        raise ConfigError(f"invalid config field 'booster.{sorted(unknown)[0]}'")
    gbm_defaults.update(booster_section)
    cfg["booster"] = gbm_defaults

    if cfg["paper_mode"] and plan is not None:
        data = apply_plan(data, plan)
        plan = None
        report.add_line("paper mode: whole dataset resampled before fold splitting")

    folds = stratified_kfold(data.labels, cfg["folds"], cfg["seed"])
    network_result, cascade_result, booster_result = cross_validate_cascade(
        data, folds, net_defaults, gbm_defaults,
        resample_plan=plan, seed=cfg["seed"], workers=cfg["workers"])

    _add_cv_sections(report, network_result, "stage 1 network")
    _add_cv_sections(report, booster_result, "stage 2 booster (outer classes)")
    _add_cv_sections(report, cascade_result, "cascade")

    combined = cascade_evaluate(network_result.pooled_matrix,
                                booster_result.pooled_matrix)
    report.add_confusion("stage-composition combined confusion", combined.combined)
    report.add_line("stage-composition accuracy (stage-1 accepted hits + stage-2 hits): "
                    f"{format_percent(combined.accuracy)}")
    for warning in combined.warnings:
        report.add_line(f"warning: {warning}")
    report.add_line("cascade cross-validated accuracy: "
                    f"{format_percent(cascade_result.mean_metrics.accuracy)} "
                    f"vs stage-1 network alone: "
                    f"{format_percent(network_result.mean_metrics.accuracy)}")

    if cfg.get("save_model"):
        cfg["save_model"] = True
        model = cascade_fit(data, net_defaults, gbm_defaults,
                            resample_plan=plan, seed=cfg["seed"])
        save_cascade(model, out / "cascade_model")
        report.add_line("fitted cascade saved under cascade_model/")
    else:
        cfg["save_model"] = False

    report.write(out)
    print(report.render_text())
    return 0


def _cmd_binary_study(cfg: dict, out: Path) -> int:
    report = RunReport("binary-study", cfg)
    data = _load_data(cfg, report)
    regimes = tuple(cfg.get("regimes") or BINARY_REGIMES)
    for regime in regimes:
        if regime not in BINARY_REGIMES:
            raise ConfigError(f"invalid config field 'regimes': {regime!r}")
    cfg["regimes"] = list(regimes)
    booster_section = dict(cfg.get("booster") or {})
    gbm_defaults = dict(_MODEL_DEFAULTS["gbm"])
    unknown = set(booster_section) - set(gbm_defaults)
    if unknown:
        raise ConfigError(f"invalid config field 'booster.{sorted(unknown)[0]}'")
    gbm_defaults.update(booster_section)
    cfg["booster"] = gbm_defaults

    results = binary_outer_study(data, seed=cfg["seed"], k_folds=cfg["folds"],
                                 regimes=regimes, booster_config=gbm_defaults,
                                 workers=cfg["workers"])
    summary = [[regime,
                format_percent(results[regime].mean_metrics.accuracy),
                format_percent(results[regime].mean_metrics.macro_f)]
               for regime in regimes]
    report.add_table("binary 0-vs-2 study", ["regime", "mean_accuracy", "mean_macro_f"],
                     summary)
    for regime in regimes:
        report.add_confusion(f"{regime}: pooled confusion", results[regime].pooled_matrix)
    report.write(out)
    print(report.render_text())
    return 0


def _cmd_report(cfg: dict, out: Path) -> int:
    report = RunReport("report", cfg)
    for run_dir in cfg["runs"]:
        run_path = Path(run_dir)
        config_path = run_path / "config.json"
        text_path = run_path / "report.txt"
        if not config_path.exists() or not text_path.exists():
            raise DataError(f"{run_dir}: not a run directory (config.json/report.txt missing)")
        run_cfg = json.loads(config_path.read_text())
        report.add_line(f"--- run {run_dir} (command: {run_cfg.get('command', '?')}) ---")
        for line in text_path.read_text().splitlines():
            report.add_line(line)
    report.write(out)
    print(report.render_text())
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "stats": _cmd_stats,
    "select": _cmd_select,
    "resample": _cmd_resample,
    "train": _cmd_train,
    "sweep": _cmd_sweep,
    "cascade": _cmd_cascade,
    "binary-study": _cmd_binary_study,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ConfigError("a subcommand is required; see --help")
        cfg, out = _resolve(args, args.command)
        return _COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
