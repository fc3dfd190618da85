"""Tests for the command-line interface and its exit codes."""

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from ttad import __version__
from ttad.cli import cli
from ttad.experiment import load_report


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def features_csv(tmp_path, labelled_csv):
    path = tmp_path / "features.csv"
    pd.read_csv(labelled_csv).drop(columns="label").to_csv(path, index=False)
    return path


def _run(runner, *args):
    return runner.invoke(cli, [str(arg) for arg in args])


def test_version(runner):
    result = _run(runner, "--version")
    assert result.exit_code == 0
    assert __version__ in result.output


def test_run_writes_structured_report(runner, tmp_path, labelled_csv):
    out = tmp_path / "report.json"
    result = _run(
        runner, "run", "--input", labelled_csv, "--labels", "label", "--normal-class", 0,
        "--shape", "2,2,2,2", "--tau", 0.4, "--scaler", "off", "--out", out,
    )
    assert result.exit_code == 0, result.output
    assert "Best tau 0.4" in result.output
    report = load_report(out)
    assert report.records[0].roc.auroc > 0.9
    assert report.spec.scaler is False


def test_run_tabular_with_repeated_and_comma_taus(runner, tmp_path, labelled_csv):
    out = tmp_path / "report.csv"
    result = _run(
        runner, "run", "--input", labelled_csv, "--labels", "label", "--normal-class", 0,
        "--shape", "2,2,2,2", "--tau", "0.2,0.3", "--tau", 0.4, "--format", "tabular", "--out", out,
    )
    assert result.exit_code == 0, result.output
    np.testing.assert_allclose(pd.read_csv(out, comment="#")["tau"], [0.2, 0.3, 0.4])


def test_missing_input_file_is_a_data_error(runner, tmp_path):
    result = _run(runner, "run", "--input", tmp_path / "nope.csv", "--shape", "2,2", "--out", tmp_path / "r.json")
    assert result.exit_code == 2
    assert "Error: " in result.output


@pytest.mark.parametrize(
    "extra",
    [["--shape", "2,1"], ["--shape", "2,2,2,2", "--tau", "1.5"], ["--shape", "2,2,2,2", "--tau", "abc"]],
)
def test_configuration_errors_exit_1(runner, tmp_path, features_csv, extra):
    result = _run(runner, "run", "--input", features_csv, "--out", tmp_path / "r.json", *extra)
    assert result.exit_code == 1


def test_usage_errors_exit_1(runner):
    assert _run(runner, "run", "--shape", "2,2").exit_code == 1
    assert _run(runner, "no-such-command").exit_code == 1


def test_degenerate_input_exits_3(runner, tmp_path):
    path = tmp_path / "zeros.csv"
    path.write_text("a,b,c,d\n0,0,0,0\n0,0,0,0\n")
    result = _run(runner, "run", "--input", path, "--shape", "2,2", "--tau", 0.1, "--scaler", "off", "--out", tmp_path / "r.json")
    assert result.exit_code == 3
    assert "tau=0.1" in result.output


def test_fetch_digits(runner, tmp_path):
    out = tmp_path / "digits.csv"
    result = _run(runner, "fetch-digits", "--out", out)
    assert result.exit_code == 0
    frame = pd.read_csv(out)
    assert frame.shape == (1797, 65)
    assert frame.columns[-1] == "label"


def test_fit_basis_then_score_local(runner, tmp_path, features_csv):
    basis = tmp_path / "basis.ttb"
    result = _run(runner, "fit-basis", "--train", features_csv, "--shape", "2,2,2,2", "--tau", 0.0, "--out", basis)
    assert result.exit_code == 0, result.output
    scores = tmp_path / "scores.csv"
    result = _run(runner, "score-local", "--basis", basis, "--input", features_csv, "--out", scores)
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(scores)
    assert list(frame.columns) == ["row", "score", "flagged"]
    assert len(frame) == 60
    assert frame["score"].iloc[0] == pytest.approx(1.0)
    assert (frame["score"] <= 1.0 + 1e-10).all()


def test_fit_basis_rejects_empty_tau(runner, tmp_path, features_csv):
    result = _run(runner, "fit-basis", "--train", features_csv, "--shape", "2,2,2,2", "--tau", ",", "--out", tmp_path / "b.ttb")
    assert result.exit_code == 1


def test_score_local_rejects_a_corrupt_basis(runner, tmp_path, features_csv):
    basis = tmp_path / "basis.ttb"
    basis.write_bytes(b"garbage")
    result = _run(runner, "score-local", "--basis", basis, "--input", features_csv, "--out", tmp_path / "s.csv")
    assert result.exit_code == 2
