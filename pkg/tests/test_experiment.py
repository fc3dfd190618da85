"""Tests for the sweep harness and its reports."""

import json

import numpy as np
import pandas as pd
import pytest

from ttad.datasets import load_csv
from ttad.detectors import DetectorConfig, score
from ttad.errors import ConfigError, DegenerateInputError, SamplingError
from ttad.experiment import (
    TABULAR_COLUMNS,
    ReportFormat,
    build_spec,
    default_tau_grid,
    emit_report,
    load_report,
    run_experiment,
)
from ttad.preprocessing import apply_scaler, fit_scaler, sample_experiment
from ttad.svd_engine import TruncationPolicy
from ttad.tensor_core import FactorShape


def _spec(path, **kwargs):
    options = dict(input=str(path), labels="label", normal_class=0, shape=(2, 2, 2, 2), taus=[0.4], scaler=False)
    options.update(kwargs)
    return build_spec(**options)


def test_default_grid():
    grid = default_tau_grid()
    assert len(grid) == 50
    assert grid[0] == 0.0 and grid[-1] == pytest.approx(0.5)


def test_build_spec_rejects_bad_taus(labelled_csv):
    with pytest.raises(ConfigError):
        _spec(labelled_csv, taus=[])
    with pytest.raises(ConfigError):
        _spec(labelled_csv, taus=[0.2, 1.5])


def test_acg_separates_the_normal_pattern(labelled_csv):
    report = run_experiment(_spec(labelled_csv, taus=[0.4, 0.6]))
    assert [record.tau for record in report.records] == [0.4, 0.6]
    assert report.dataset.rows == 60 and report.dataset.cols == 16
    assert len(report.dataset.sha256) == 64
    assert all(record.roc.auroc > 0.9 for record in report.records)
    assert all(record.scores is None for record in report.records)
    assert report.best().roc.auroc == max(record.roc.auroc for record in report.records)


def test_tau_zero_is_flagged_degenerate(labelled_csv):
    record = run_experiment(_spec(labelled_csv, taus=[0.0], emit_scores=True)).records[0]
    np.testing.assert_allclose(record.scores, 1.0, atol=1e-10)
    assert record.roc.degenerate
    assert record.roc.auroc == pytest.approx(0.5)


def test_sampling_is_seeded(labelled_csv):
    spec = _spec(labelled_csv, n_normal=10, n_anomalous=10, seed=5, emit_scores=True)
    first, second = run_experiment(spec), run_experiment(spec)
    assert first.records[0].scores == second.records[0].scores
    assert len(first.records[0].scores) == 20
    assert first.records[0].roc.tn + first.records[0].roc.fp == 10


def test_sampling_shortfall(labelled_csv):
    with pytest.raises(SamplingError):
        run_experiment(_spec(labelled_csv, n_normal=31))


def test_sampled_run_scales_with_the_whole_dataset(labelled_csv):
    features, labels = load_csv(labelled_csv, label_column="label")
    spec = _spec(labelled_csv, n_normal=10, n_anomalous=10, seed=5, scaler=True, emit_scores=True)
    record = run_experiment(spec).records[0]
    cfg = DetectorConfig(method="acg", shape=FactorShape.parse((2, 2, 2, 2)), policy=TruncationPolicy.of(0.4), scaler=False)
    scaled = apply_scaler(features, fit_scaler(features))
    test, _ = sample_experiment(scaled, labels, 0, 10, 10, seed=5)
    np.testing.assert_allclose(record.scores, score(cfg, test).values, atol=1e-10)
    sample_fit = score(cfg.model_copy(update={"scaler": True}), sample_experiment(features, labels, 0, 10, 10, seed=5)[0])
    assert not np.allclose(record.scores, sample_fit.values)


def test_unlabelled_run_keeps_scores(labelled_csv):
    # the label column is scored as a feature here, hence the wider shape
    report = run_experiment(_spec(labelled_csv, labels=None, normal_class=None, shape=(2, 2, 2, 2, 2)))
    record = report.records[0]
    assert record.roc is None
    assert len(record.scores) == 60
    assert report.best() is None


def test_labelled_run_needs_normal_class(labelled_csv):
    with pytest.raises(ConfigError, match="normal-class"):
        run_experiment(_spec(labelled_csv, normal_class=None))


def test_shape_too_small(labelled_csv):
    with pytest.raises(ConfigError):
        run_experiment(_spec(labelled_csv, shape=(2, 2, 2)))


def test_labels_file(tmp_path, labelled_csv):
    frame = pd.read_csv(labelled_csv)
    frame[["label"]].to_csv(tmp_path / "labels.csv", index=False)
    frame.drop(columns="label").to_csv(tmp_path / "features.csv", index=False)
    separate = run_experiment(_spec(tmp_path / "features.csv", labels=str(tmp_path / "labels.csv")))
    inline = run_experiment(_spec(labelled_csv))
    assert separate.records[0].roc.auroc == pytest.approx(inline.records[0].roc.auroc)


def test_local_method_draws_a_spare_training_row(labelled_csv):
    report = run_experiment(_spec(labelled_csv, method="acl", n_normal=20, n_anomalous=20, taus=[0.1, 0.3]))
    assert len(report.records) == 2
    assert all(record.roc is not None for record in report.records)


def test_training_file(tmp_path, labelled_csv):
    frame = pd.read_csv(labelled_csv)
    frame.drop(columns="label").head(5).to_csv(tmp_path / "train.csv", index=False)
    report = run_experiment(_spec(labelled_csv, method="gcl", train=str(tmp_path / "train.csv")))
    assert report.records[0].roc is not None
    with pytest.raises(ConfigError, match="tau=0.4"):
        run_experiment(_spec(labelled_csv, train=str(tmp_path / "train.csv"), mode="unsupervised"))


def test_per_step_taus_add_a_record(labelled_csv):
    report = run_experiment(_spec(labelled_csv, taus=[0.2], tau_steps=[0.1, 0.2, 0.3, 0.4]))
    assert [record.tau for record in report.records] == [0.2, [0.1, 0.2, 0.3, 0.4]]


def test_errors_carry_the_tau(tmp_path):
    path = tmp_path / "zeros.csv"
    path.write_text("a,b,c,d\n0,0,0,0\n0,0,0,0\n")
    with pytest.raises(DegenerateInputError, match="tau=0.2") as excinfo:
        run_experiment(build_spec(input=str(path), shape=(2, 2), taus=[0.2], scaler=False))
    assert excinfo.value.tau == 0.2


def test_threads_keep_tau_order(labelled_csv):
    taus = [0.1, 0.2, 0.3, 0.4, 0.5]
    serial = run_experiment(_spec(labelled_csv, taus=taus))
    threaded = run_experiment(_spec(labelled_csv, taus=taus, workers=3))
    assert [r.tau for r in threaded.records] == taus
    assert [r.roc.auroc for r in threaded.records] == pytest.approx([r.roc.auroc for r in serial.records])


def test_structured_report_reloads(tmp_path, labelled_csv):
    report = run_experiment(_spec(labelled_csv))
    path = emit_report(report, ReportFormat.STRUCTURED, tmp_path / "report.json")
    loaded = load_report(path)
    assert loaded.spec == report.spec
    assert loaded.records[0].roc.auroc == report.records[0].roc.auroc
    assert json.loads(path.read_text())["version"] == report.version


def test_tabular_report(tmp_path, labelled_csv):
    report = run_experiment(_spec(labelled_csv, taus=[0.3, 0.4]))
    path = emit_report(report, "tabular", tmp_path / "report.csv")
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# spec: ")
    assert json.loads(lines[0][len("# spec: "):])["shape"] == [2, 2, 2, 2]
    table = pd.read_csv(path, comment="#")
    assert list(table.columns) == TABULAR_COLUMNS
    np.testing.assert_allclose(table["tau"], [0.3, 0.4])
    assert (table["tn"] + table["fp"] == 30).all()
