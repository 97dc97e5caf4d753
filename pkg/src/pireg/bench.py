"""Benchmark harness: multi-split runs, parameter sweeps, report files.

A benchmark run draws `splits.count` shuffled train/test splits, fits
normalization on each training portion, trains an ensemble per split, and
scores the aggregated intervals on the held-out rows in both normalized and
original units.  Reports are plain dataclasses emitted as versioned JSON
(canonical, round-trippable) plus flat CSV tables for spreadsheets and
plotting.

Report format v1:
  {"kind": "benchmark" | "alpha_sweep" | "hparam_sweep", "version": 1, ...}
with per-split records, aggregate mean/stderr blocks, and for sweeps a
`series` mapping of plot-ready [x, y] pairs per method and metric.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from .config import DataSpec, ExperimentConfig, config_to_dict
from .data import (Dataset, SplitSpec, denormalize_targets, fit_normalize, gen_flat_skew,
                   gen_sine, apply_normalize, load_delimited, split)
from .ensemble import EnsembleOutput, aggregate_gaussian, aggregate_pi
from .errors import ConfigError, DataError, PiregError, TrainingDiverged
from .losses import point_prediction
from .metrics import MetricSummary, MetricsRecord, aggregate_splits, metrics_record
from .network import forward, forward_gaussian
from .training import carve_validation, train_ensemble

REPORT_VERSION = 1
CURVE_SAMPLE_CAP = 50


@dataclass
class SplitResult:
    split_index: int
    seconds: float
    member_epochs: List[int]
    normalized: MetricsRecord
    denormalized: MetricsRecord
    loss_curve: List[List[float]]
    predictions: Optional[List[List[float]]] = None


@dataclass
class RunReport:
    kind: str
    version: int
    name: str
    config: dict
    splits: List[SplitResult]
    aggregate_normalized: Dict[str, MetricSummary]
    aggregate_denormalized: Dict[str, MetricSummary]
    partial: bool
    errors: List[str]
    total_seconds: float


@dataclass
class SweepCell:
    params: dict
    normalized: MetricsRecord
    denormalized: MetricsRecord


@dataclass
class SweepReport:
    kind: str
    version: int
    name: str
    config: dict
    cells: List[SweepCell]
    series: Dict[str, List[List[float]]]
    total_seconds: float


def load_dataset(spec: DataSpec, seed) -> Dataset:
    """Materialize a dataset from its spec (generator seeded, file loaded)."""
    if spec.kind == "sine":
        return gen_sine(spec.n, spec.x_low, spec.x_high, spec.noise_scale,
                        spec.skew_alpha, seed)
    if spec.kind == "flat_skew":
        return gen_flat_skew(spec.n, spec.x_low, spec.x_high, spec.noise_scale,
                             spec.skew_alpha, seed)
    if spec.kind == "file":
        return load_delimited(spec.path, spec.target_column, spec.delimiter)
    raise ConfigError(f"unknown data kind {spec.kind!r}")


def ensemble_predict(models, features, variant: str, alpha: float) -> EnsembleOutput:
    """Aggregate member predictions on a feature matrix."""
    if variant == "gaussian_nll":
        means, variances = [], []
        for model in models:
            m, v = forward_gaussian(model, features)
            means.append(m)
            variances.append(v)
        return aggregate_gaussian(np.stack(means), np.stack(variances), alpha)
    outputs = [forward(model, features) for model in models]
    values = [point_prediction(o, variant) for o in outputs]
    return aggregate_pi(outputs, alpha, member_values=values)


def _curve_samples(history, cap=CURVE_SAMPLE_CAP):
    total = len(history.train_loss)
    if total <= cap:
        idxs = range(total)
    else:
        idxs = sorted(set(np.linspace(0, total - 1, cap).astype(int).tolist()))
    return [[float(i + 1), history.train_loss[i], history.val_loss[i]] for i in idxs]


def run_split(config: ExperimentConfig, dataset: Dataset, split_index: int) -> SplitResult:
    """Train and score one shuffled train/test split."""
    started = time.perf_counter()
    spec = SplitSpec(config.splits.test_fraction, config.seed, split_index)
    train_all, test = split(dataset, spec)

    stats = fit_normalize(train_all)
    train_n = apply_normalize(train_all, stats)
    test_n = apply_normalize(test, stats)
    train_fit, valid = carve_validation(train_n, config.optimizer.validation_fraction,
                                        config.seed, split_index)

    base_seed = config.seed + 1000 * split_index
    models, histories = train_ensemble(config, train_fit, valid, base_seed)

    ens = ensemble_predict(models, test_n.features, config.loss.variant, config.loss.alpha)
    normalized = metrics_record(test_n.targets, ens.lower, ens.upper, ens.value)
    denormalized = metrics_record(
        denormalize_targets(test_n.targets, stats),
        denormalize_targets(ens.lower, stats),
        denormalize_targets(ens.upper, stats),
        denormalize_targets(ens.value, stats),
    )

    predictions = None
    if config.store_predictions:
        predictions = [[float(yy), float(ll), float(uu), float(vv)]
                       for yy, ll, uu, vv in zip(test_n.targets, ens.lower,
                                                 ens.upper, ens.value)]
    return SplitResult(
        split_index=split_index,
        seconds=time.perf_counter() - started,
        member_epochs=[h.epochs_run for h in histories],
        normalized=normalized,
        denormalized=denormalized,
        loss_curve=_curve_samples(histories[0]),
        predictions=predictions,
    )


def run_benchmark(config: ExperimentConfig) -> RunReport:
    """Full multi-split benchmark; failing splits are recorded, not fatal."""
    started = time.perf_counter()
    dataset = load_dataset(config.data, config.seed)
    splits: List[SplitResult] = []
    errors: List[str] = []
    for i in range(config.splits.count):
        try:
            splits.append(run_split(config, dataset, i))
        except PiregError as exc:
            errors.append(f"split {i}: {exc}")
    if not splits:
        raise TrainingDiverged("every split failed: " + "; ".join(errors))
    return RunReport(
        kind="benchmark",
        version=REPORT_VERSION,
        name=config.name,
        config=config_to_dict(config),
        splits=splits,
        aggregate_normalized=aggregate_splits([s.normalized for s in splits]),
        aggregate_denormalized=aggregate_splits([s.denormalized for s in splits]),
        partial=bool(errors),
        errors=errors,
        total_seconds=time.perf_counter() - started,
    )


def _mean_record(report: RunReport, mode: str) -> MetricsRecord:
    agg = report.aggregate_normalized if mode == "normalized" else report.aggregate_denormalized
    total_n = sum(s.normalized.n for s in report.splits)
    return MetricsRecord(picp=agg["picp"].mean, mpiw=agg["mpiw"].mean,
                         rmse=agg["rmse"].mean, mae=agg["mae"].mean, n=total_n)


def run_alpha_sweep(config: ExperimentConfig, alphas: Sequence[float]) -> SweepReport:
    """Benchmark the joint and interval-only variants across miscoverage levels.

    Emits per-cell metrics plus plot-ready series, including the width
    improvement of the joint variant over the interval-only one, in percent
    of the interval-only width.
    """
    if not alphas:
        raise ConfigError("alpha grid must be non-empty")
    started = time.perf_counter()
    cells: List[SweepCell] = []
    series: Dict[str, List[List[float]]] = {}
    for alpha in alphas:
        per_variant = {}
        for variant in ("joint", "interval_only"):
            cfg = dataclasses.replace(
                config,
                loss=dataclasses.replace(config.loss, alpha=float(alpha), variant=variant),
            )
            report = run_benchmark(cfg)
            norm = _mean_record(report, "normalized")
            denorm = _mean_record(report, "denormalized")
            cells.append(SweepCell(
                params={"alpha": float(alpha), "variant": variant},
                normalized=norm, denormalized=denorm))
            per_variant[variant] = (norm, denorm)
            series.setdefault(f"{variant}_picp", []).append([float(alpha), norm.picp])
            series.setdefault(f"{variant}_mpiw", []).append([float(alpha), norm.mpiw])
            series.setdefault(f"{variant}_rmse", []).append([float(alpha), denorm.rmse])
        base = per_variant["interval_only"][0].mpiw
        gain = (base - per_variant["joint"][0].mpiw) / base * 100.0 if base != 0.0 else 0.0
        series.setdefault("mpiw_improvement_pct", []).append([float(alpha), gain])
    return SweepReport(
        kind="alpha_sweep",
        version=REPORT_VERSION,
        name=config.name,
        config=config_to_dict(config),
        cells=cells,
        series=series,
        total_seconds=time.perf_counter() - started,
    )


def run_hyperparam_sweep(config: ExperimentConfig, interval_weights: Sequence[float],
                         coverage_penalties: Sequence[float]) -> SweepReport:
    """Grid sweep of the loss mixing weight and the coverage penalty."""
    if not interval_weights or not coverage_penalties:
        raise ConfigError("sweep grids must be non-empty")
    started = time.perf_counter()
    cells: List[SweepCell] = []
    series: Dict[str, List[List[float]]] = {}
    for weight in interval_weights:
        for penalty in coverage_penalties:
            cfg = dataclasses.replace(
                config,
                loss=dataclasses.replace(config.loss, interval_weight=float(weight),
                                         coverage_penalty=float(penalty), variant="joint"),
            )
            report = run_benchmark(cfg)
            norm = _mean_record(report, "normalized")
            denorm = _mean_record(report, "denormalized")
            cells.append(SweepCell(
                params={"interval_weight": float(weight),
                        "coverage_penalty": float(penalty)},
                normalized=norm, denormalized=denorm))
            tag = f"interval_weight={weight:g}"
            series.setdefault(f"picp@{tag}", []).append([float(penalty), norm.picp])
            series.setdefault(f"mpiw@{tag}", []).append([float(penalty), norm.mpiw])
            series.setdefault(f"rmse@{tag}", []).append([float(penalty), denorm.rmse])
    return SweepReport(
        kind="hparam_sweep",
        version=REPORT_VERSION,
        name=config.name,
        config=config_to_dict(config),
        cells=cells,
        series=series,
        total_seconds=time.perf_counter() - started,
    )


# --------------------------------------------------------------------------
# Emission and parsing.  JSON is the canonical format; floats use Python's
# shortest round-trip repr, so parse(emit(report)) == report exactly.
# --------------------------------------------------------------------------


def _base_path(path) -> str:
    text = str(path)
    return text[:-5] if text.endswith(".json") else text


def emit_report(report, path) -> List[str]:
    """Write the canonical JSON plus flat CSV tables; returns written paths.

    Write failures propagate as OSError (an I/O category, not a data error)
    with the offending path attached.
    """
    base = _base_path(path)
    written = []
    payload = dataclasses.asdict(report)
    json_path = base + ".json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    written.append(json_path)
    if isinstance(report, RunReport):
        written.extend(_emit_run_tables(report, base))
    elif isinstance(report, SweepReport):
        written.extend(_emit_sweep_tables(report, base))
    else:
        raise ConfigError(f"cannot emit object of type {type(report).__name__}")
    return written


def _emit_run_tables(report: RunReport, base: str) -> List[str]:
    written = []
    metrics_path = base + "_metrics.csv"
    with open(metrics_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["split_index", "mode", "picp", "mpiw", "rmse", "mae", "n"])
        for s in report.splits:
            for mode, rec in (("normalized", s.normalized), ("denormalized", s.denormalized)):
                writer.writerow([s.split_index, mode, repr(rec.picp), repr(rec.mpiw),
                                 repr(rec.rmse), repr(rec.mae), rec.n])
    written.append(metrics_path)

    agg_path = base + "_aggregate.csv"
    with open(agg_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "metric", "mean", "stderr"])
        for mode, agg in (("normalized", report.aggregate_normalized),
                          ("denormalized", report.aggregate_denormalized)):
            for metric, summary in agg.items():
                err = "" if summary.stderr is None else repr(summary.stderr)
                writer.writerow([mode, metric, repr(summary.mean), err])
    written.append(agg_path)

    if any(s.predictions for s in report.splits):
        pred_path = base + "_predictions.csv"
        with open(pred_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["split_index", "y", "lower", "upper", "value"])
            for s in report.splits:
                for row in s.predictions or []:
                    writer.writerow([s.split_index] + [repr(v) for v in row])
        written.append(pred_path)
    return written


def _emit_sweep_tables(report: SweepReport, base: str) -> List[str]:
    written = []
    param_names = sorted({k for cell in report.cells for k in cell.params})
    cells_path = base + "_cells.csv"
    with open(cells_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(param_names + ["mode", "picp", "mpiw", "rmse", "mae", "n"])
        for cell in report.cells:
            head = [cell.params.get(k, "") for k in param_names]
            for mode, rec in (("normalized", cell.normalized),
                              ("denormalized", cell.denormalized)):
                writer.writerow(head + [mode, repr(rec.picp), repr(rec.mpiw),
                                        repr(rec.rmse), repr(rec.mae), rec.n])
    written.append(cells_path)

    for name, points in report.series.items():
        safe = name.replace("@", "_at_").replace("=", "_")
        series_path = f"{base}_series_{safe}.csv"
        with open(series_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y"])
            for x, y in points:
                writer.writerow([repr(x), repr(y)])
        written.append(series_path)
    return written


def _record_from(d: dict) -> MetricsRecord:
    return MetricsRecord(picp=d["picp"], mpiw=d["mpiw"], rmse=d["rmse"],
                         mae=d["mae"], n=d["n"])


def _summaries_from(d: dict) -> Dict[str, MetricSummary]:
    return {k: MetricSummary(mean=v["mean"], stderr=v["stderr"]) for k, v in d.items()}


def load_report(path):
    """Parse a report JSON back into its dataclass form."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"no such report: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid report JSON ({exc})") from None

    kind = raw.get("kind")
    version = raw.get("version")
    if version != REPORT_VERSION:
        raise DataError(f"{path}: unsupported report version {version!r}")
    if kind == "benchmark":
        return RunReport(
            kind=kind,
            version=version,
            name=raw["name"],
            config=raw["config"],
            splits=[SplitResult(
                split_index=s["split_index"],
                seconds=s["seconds"],
                member_epochs=s["member_epochs"],
                normalized=_record_from(s["normalized"]),
                denormalized=_record_from(s["denormalized"]),
                loss_curve=s["loss_curve"],
                predictions=s["predictions"],
            ) for s in raw["splits"]],
            aggregate_normalized=_summaries_from(raw["aggregate_normalized"]),
            aggregate_denormalized=_summaries_from(raw["aggregate_denormalized"]),
            partial=raw["partial"],
            errors=raw["errors"],
            total_seconds=raw["total_seconds"],
        )
    if kind in ("alpha_sweep", "hparam_sweep"):
        return SweepReport(
            kind=kind,
            version=version,
            name=raw["name"],
            config=raw["config"],
            cells=[SweepCell(params=c["params"],
                             normalized=_record_from(c["normalized"]),
                             denormalized=_record_from(c["denormalized"]))
                   for c in raw["cells"]],
            series=raw["series"],
            total_seconds=raw["total_seconds"],
        )
    raise DataError(f"{path}: unknown report kind {kind!r}")


def format_report(report) -> str:
    """Human-readable table for terminals."""
    lines = []
    if isinstance(report, RunReport):
        lines.append(f"benchmark {report.name}: {len(report.splits)} split(s)"
                     + (" [partial]" if report.partial else ""))
        lines.append(f"{'mode':<13} {'metric':<6} {'mean':>10} {'stderr':>10}")
        for mode, agg in (("normalized", report.aggregate_normalized),
                          ("denormalized", report.aggregate_denormalized)):
            for metric, summary in agg.items():
                err = "n/a" if summary.stderr is None else f"{summary.stderr:.4f}"
                lines.append(f"{mode:<13} {metric:<6} {summary.mean:>10.4f} {err:>10}")
        for err in report.errors:
            lines.append(f"error: {err}")
    elif isinstance(report, SweepReport):
        lines.append(f"{report.kind} {report.name}: {len(report.cells)} cell(s)")
        param_names = sorted({k for cell in report.cells for k in cell.params})
        header = " ".join(f"{p:<16}" for p in param_names)
        lines.append(f"{header} {'picp':>8} {'mpiw':>8} {'rmse':>8}")
        for cell in report.cells:
            head = " ".join(f"{str(cell.params.get(p, '')):<16}" for p in param_names)
            lines.append(f"{head} {cell.normalized.picp:>8.4f} "
                         f"{cell.normalized.mpiw:>8.4f} {cell.denormalized.rmse:>8.4f}")
    else:
        raise ConfigError(f"cannot format object of type {type(report).__name__}")
    return "\n".join(lines)
