"""Tests for the benchmark harness: split orchestration, aggregate consistency,
report emission/parsing round-trips, sweeps, and failure accounting."""

import dataclasses
import json
import statistics

import numpy as np
import pytest

from pireg.bench import (
    CURVE_SAMPLE_CAP,
    REPORT_VERSION,
    RunReport,
    emit_report,
    ensemble_predict,
    format_report,
    load_dataset,
    load_report,
    run_alpha_sweep,
    run_benchmark,
    run_hyperparam_sweep,
    run_split,
)
from pireg.config import (DataSpec, ExperimentConfig, ModelSpec, OptimizerSpec,
                          SplitPlan, config_to_dict)
from pireg.errors import ConfigError, DataError, TrainingDiverged
from pireg.losses import LossConfig
from pireg.metrics import METRIC_NAMES, aggregate_splits


def tiny_config(**kwargs):
    base = dict(
        name="tiny",
        data=DataSpec(kind="sine", n=60),
        model=ModelSpec(hidden_sizes=(8,)),
        optimizer=OptimizerSpec(learning_rate=0.02, batch_size=15, max_epochs=25,
                                patience=25, validation_fraction=0.1),
        splits=SplitPlan(count=2, test_fraction=0.2),
        ensemble_size=2,
        seed=3,
    )
    base.update(kwargs)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def tiny_report():
    return run_benchmark(tiny_config())


def test_report_shape_contract(tiny_report):
    r = tiny_report
    assert r.kind == "benchmark" and r.version == REPORT_VERSION
    assert r.name == "tiny"
    assert [s.split_index for s in r.splits] == [0, 1]
    assert not r.partial and r.errors == []
    assert r.config == config_to_dict(tiny_config())
    for s in r.splits:
        assert len(s.member_epochs) == 2
        assert all(1 <= e <= 25 for e in s.member_epochs)
        assert s.normalized.n == 12  # 20% of 60
        assert len(s.loss_curve) <= CURVE_SAMPLE_CAP
        assert all(len(point) == 3 for point in s.loss_curve)
    for agg in (r.aggregate_normalized, r.aggregate_denormalized):
        assert set(agg) == set(METRIC_NAMES)


def test_aggregate_reproducible_from_split_rows(tiny_report):
    r = tiny_report
    assert aggregate_splits([s.normalized for s in r.splits]) == r.aggregate_normalized
    assert aggregate_splits([s.denormalized for s in r.splits]) == r.aggregate_denormalized
    picps = [s.normalized.picp for s in r.splits]
    assert r.aggregate_normalized["picp"].mean == pytest.approx(
        statistics.fmean(picps), rel=1e-12)
    assert r.aggregate_normalized["picp"].stderr == pytest.approx(
        statistics.stdev(picps) / len(picps) ** 0.5, rel=1e-12)


def test_split_metrics_recomputable_from_persisted_predictions(tiny_report):
    for s in tiny_report.splits:
        rows = np.asarray(s.predictions)
        y, lower, upper, value = rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3]
        assert float(np.mean((y >= lower) & (y <= upper))) == s.normalized.picp
        assert float(np.mean(upper - lower)) == pytest.approx(s.normalized.mpiw, rel=1e-12)
        assert float(np.sqrt(np.mean((value - y) ** 2))) == pytest.approx(
            s.normalized.rmse, rel=1e-12)


def test_benchmark_is_deterministic(tiny_report):
    again = run_benchmark(tiny_config())
    for a, b in zip(tiny_report.splits, again.splits):
        assert a.normalized == b.normalized
        assert a.denormalized == b.denormalized
        assert a.predictions == b.predictions
        assert a.member_epochs == b.member_epochs
    assert tiny_report.aggregate_normalized == again.aggregate_normalized


def test_store_predictions_off(tmp_path):
    cfg = tiny_config(store_predictions=False,
                      splits=SplitPlan(count=1, test_fraction=0.2))
    report = run_benchmark(cfg)
    assert report.splits[0].predictions is None
    written = emit_report(report, tmp_path / "nopred.json")
    assert not any(p.endswith("_predictions.csv") for p in written)


def test_emit_then_load_round_trips_exactly(tiny_report, tmp_path):
    written = emit_report(tiny_report, tmp_path / "tiny.json")
    assert written[0].endswith("tiny.json")
    loaded = load_report(written[0])
    assert loaded == tiny_report  # dataclass equality, float-exact


def test_emitted_csv_tables(tiny_report, tmp_path):
    written = emit_report(tiny_report, tmp_path / "tiny")
    by_suffix = {p.split("tiny")[-1]: p for p in written}
    assert set(by_suffix) == {".json", "_metrics.csv", "_aggregate.csv",
                              "_predictions.csv"}

    metric_lines = open(by_suffix["_metrics.csv"]).read().strip().splitlines()
    assert metric_lines[0] == "split_index,mode,picp,mpiw,rmse,mae,n"
    assert len(metric_lines) == 1 + 2 * len(tiny_report.splits)
    first = metric_lines[1].split(",")
    assert float(first[2]) == tiny_report.splits[0].normalized.picp  # repr round-trip

    agg_lines = open(by_suffix["_aggregate.csv"]).read().strip().splitlines()
    assert len(agg_lines) == 1 + 2 * len(METRIC_NAMES)

    pred_lines = open(by_suffix["_predictions.csv"]).read().strip().splitlines()
    total_rows = sum(len(s.predictions) for s in tiny_report.splits)
    assert len(pred_lines) == 1 + total_rows


def test_load_report_rejects_bad_files(tiny_report, tmp_path):
    with pytest.raises(DataError, match="no such report"):
        load_report(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{oops", encoding="utf-8")
    with pytest.raises(DataError, match="invalid report JSON"):
        load_report(bad)

    emit_report(tiny_report, tmp_path / "v.json")
    blob = json.loads((tmp_path / "v.json").read_text())
    blob["version"] = 99
    (tmp_path / "v.json").write_text(json.dumps(blob), encoding="utf-8")
    with pytest.raises(DataError, match="unsupported report version"):
        load_report(tmp_path / "v.json")

    blob["version"] = REPORT_VERSION
    blob["kind"] = "mystery"
    (tmp_path / "v.json").write_text(json.dumps(blob), encoding="utf-8")
    with pytest.raises(DataError, match="unknown report kind"):
        load_report(tmp_path / "v.json")


def test_format_report_mentions_the_essentials(tiny_report):
    text = format_report(tiny_report)
    assert "benchmark tiny" in text
    assert "picp" in text and "normalized" in text
    assert "[partial]" not in text
    with pytest.raises(ConfigError):
        format_report({"not": "a report"})


def test_failed_splits_are_recorded_partial(monkeypatch):
    import pireg.bench as bench_mod
    real = bench_mod.run_split

    def flaky(config, dataset, split_index):
        if split_index == 0:
            raise TrainingDiverged("synthetic failure", epoch=1)
        return real(config, dataset, split_index)

    monkeypatch.setattr(bench_mod, "run_split", flaky)
    report = bench_mod.run_benchmark(tiny_config())
    assert report.partial
    assert len(report.splits) == 1 and report.splits[0].split_index == 1
    assert report.errors and "split 0" in report.errors[0]
    assert "[partial]" in format_report(report)


def test_all_splits_failing_raises(monkeypatch):
    import pireg.bench as bench_mod

    def doomed(config, dataset, split_index):
        raise TrainingDiverged("synthetic failure", epoch=1)

    monkeypatch.setattr(bench_mod, "run_split", doomed)
    with pytest.raises(TrainingDiverged, match="every split failed"):
        bench_mod.run_benchmark(tiny_config())


def test_run_split_seeds_members_by_split(tmp_path):
    cfg = tiny_config()
    dataset = load_dataset(cfg.data, cfg.seed)
    a = run_split(cfg, dataset, 0)
    b = run_split(cfg, dataset, 1)
    assert a.normalized != b.normalized  # different membership and member seeds


def test_load_dataset_kinds(tmp_path):
    sine = load_dataset(DataSpec(kind="sine", n=30), seed=1)
    assert sine.n == 30 and sine.dim == 1
    flat = load_dataset(DataSpec(kind="flat_skew", n=20), seed=1)
    assert flat.n == 20
    csv_path = tmp_path / "t.csv"
    csv_path.write_text("1,2\n3,4\n5,6\n", encoding="utf-8")
    table = load_dataset(DataSpec(kind="file", path=str(csv_path)), seed=1)
    assert table.n == 3 and table.dim == 1


def test_benchmark_on_file_dataset(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(40, 2))
    y = x @ [1.0, -2.0] + rng.normal(0, 0.1, size=40)
    lines = [",".join(repr(float(v)) for v in row) + f",{float(y[i])!r}"
             for i, row in enumerate(x)]
    path = tmp_path / "lin.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    cfg = tiny_config(name="filetask", data=DataSpec(kind="file", path=str(path)),
                      splits=SplitPlan(count=3, test_fraction=0.2))
    report = run_benchmark(cfg)
    assert len(report.splits) == 3
    assert report.splits[0].normalized.n == 8


def test_gaussian_variant_through_the_pipeline():
    cfg = tiny_config(loss=LossConfig(variant="gaussian_nll"),
                      splits=SplitPlan(count=1, test_fraction=0.2),
                      optimizer=OptimizerSpec(learning_rate=0.02, batch_size=15,
                                              max_epochs=15, patience=15))
    report = run_benchmark(cfg)
    rec = report.splits[0].normalized
    assert 0.0 <= rec.picp <= 1.0 and rec.mpiw > 0.0


def test_alpha_sweep_cells_and_series(tmp_path):
    cfg = tiny_config(splits=SplitPlan(count=1, test_fraction=0.2),
                      optimizer=OptimizerSpec(learning_rate=0.02, batch_size=15,
                                              max_epochs=15, patience=15))
    sweep = run_alpha_sweep(cfg, [0.1, 0.3])
    assert sweep.kind == "alpha_sweep" and sweep.version == REPORT_VERSION
    assert len(sweep.cells) == 4  # 2 alphas x 2 variants
    variants = {c.params["variant"] for c in sweep.cells}
    assert variants == {"joint", "interval_only"}
    expected_series = {"joint_picp", "joint_mpiw", "joint_rmse",
                       "interval_only_picp", "interval_only_mpiw",
                       "interval_only_rmse", "mpiw_improvement_pct"}
    assert set(sweep.series) == expected_series
    for points in sweep.series.values():
        assert [p[0] for p in points] == [0.1, 0.3]

    written = emit_report(sweep, tmp_path / "sweep.json")
    loaded = load_report(written[0])
    assert loaded == sweep
    assert any("_cells.csv" in p for p in written)
    assert any("mpiw_improvement_pct" in p for p in written)
    text = format_report(sweep)
    assert "alpha_sweep" in text and "4 cell(s)" in text


def test_hyperparam_sweep_grid(tmp_path):
    cfg = tiny_config(splits=SplitPlan(count=1, test_fraction=0.2),
                      optimizer=OptimizerSpec(learning_rate=0.02, batch_size=15,
                                              max_epochs=15, patience=15))
    sweep = run_hyperparam_sweep(cfg, [0.3, 0.7], [5.0, 15.0])
    assert sweep.kind == "hparam_sweep"
    assert len(sweep.cells) == 4
    for cell in sweep.cells:
        assert set(cell.params) == {"interval_weight", "coverage_penalty"}
        assert cell.normalized.mpiw >= 0.0
        assert cell.denormalized.rmse >= 0.0
    assert "picp@interval_weight=0.3" in sweep.series
    assert "rmse@interval_weight=0.7" in sweep.series
    written = emit_report(sweep, tmp_path / "hp.json")
    safe_names = [p for p in written if "_series_" in p]
    assert any("picp_at_interval_weight_0.3" in p for p in safe_names)
    assert load_report(written[0]) == sweep


def test_sweeps_reject_empty_grids():
    cfg = tiny_config()
    with pytest.raises(ConfigError):
        run_alpha_sweep(cfg, [])
    with pytest.raises(ConfigError):
        run_hyperparam_sweep(cfg, [], [1.0])
    with pytest.raises(ConfigError):
        run_hyperparam_sweep(cfg, [0.5], [])


def test_ensemble_predict_matches_member_forward():
    from pireg.network import forward, init_model
    from pireg.losses import point_prediction
    from pireg.ensemble import aggregate_pi

    models = [init_model([1, 4, 3], seed=s) for s in (0, 1, 2)]
    x = np.linspace(-1, 1, 7).reshape(-1, 1)
    out = ensemble_predict(models, x, "joint", alpha=0.05)
    outputs = [forward(m, x) for m in models]
    expected = aggregate_pi(outputs, 0.05,
                            member_values=[point_prediction(o, "joint") for o in outputs])
    assert np.array_equal(out.upper, expected.upper)
    assert np.array_equal(out.value, expected.value)
