""" Command-line entry point for sweeps, basis fitting and the digits fixture. """

import functools
import logging
from contextlib import contextmanager
from typing import Optional

import click
import pandas as pd

from config import LOG_FORMAT, LOG_LEVEL
from ttad import __version__
from ttad.chain_io import load_basis, save_basis
from ttad.datasets import export_digits, load_csv
from ttad.detectors import DetectorConfig, Method, local_fit, score_with_basis
from ttad.errors import ConfigError, TTADError
from ttad.experiment import ReportFormat, build_spec, emit_report, run_experiment
from ttad.svd_engine import TruncationPolicy
from ttad.tensor_core import FactorShape

logger = logging.getLogger(__name__)

USAGE_EXIT_CODE = 1


@contextmanager
def _usage_exit_code():
    try:
        yield
    except click.UsageError as exc:
        exc.exit_code = USAGE_EXIT_CODE
        raise


class _Command(click.Command):
    def parse_args(self, ctx, args):
        with _usage_exit_code():
            return super().parse_args(ctx, args)


class _Group(click.Group):
    """Group whose usage errors exit with code 1, like configuration errors."""

    command_class = _Command

    def parse_args(self, ctx, args):
        with _usage_exit_code():
            return super().parse_args(ctx, args)

    def resolve_command(self, ctx, args):
        with _usage_exit_code():
            return super().resolve_command(ctx, args)


def _reporting_errors(func):
    """Turn toolkit errors into a one-line message and their exit code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except TTADError as exc:
            logger.debug("command failed", exc_info=True)
            click.echo(f"Error: {exc}", err=True)
            raise click.exceptions.Exit(exc.exit_code) from exc

    return wrapper


def _parse_floats(values: tuple[str, ...]) -> list[float]:
    try:
        return [float(part) for value in values for part in value.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"tau values must be numbers: {exc}") from exc


@click.group(cls=_Group)
@click.version_option(__version__)
@click.option("--log-level", default=LOG_LEVEL, show_default=True, help="Logging level.")
def cli(log_level: str) -> None:
    """Tensor-train compression anomaly detection."""
    logging.basicConfig(level=log_level.upper(), format=LOG_FORMAT)


@cli.command("run")
@click.option("--input", "input_path", required=True, help="CSV dataset, one row per data point.")
@click.option("--header/--no-header", default=True, show_default=True)
@click.option("--labels", help="Label column (name or index) or a one-column labels file.")
@click.option("--train", help="CSV of known-normal rows (global: stacked above the data; local: first row).")
@click.option("--method", type=click.Choice([m.value for m in Method]), default="acg", show_default=True)
@click.option("--shape", required=True, help="Comma-separated feature factors, e.g. 2,2,2,2,2,2.")
@click.option("--tau", multiple=True, help="Compression factor(s); repeatable or comma list. Default: 50 points in [0, 0.5].")
@click.option("--tau-steps", help="Comma list of per-step factors, run as one extra record.")
@click.option("--scaler", type=click.Choice(["on", "off"]), default="on", show_default=True)
@click.option("--mode", type=click.Choice(["unsupervised", "semi_supervised", "supervised"]))
@click.option("--normal-class", type=int)
@click.option("--n-normal", type=int)
@click.option("--n-anomalous", type=int)
@click.option("--seed", type=int)
@click.option("--out", required=True, help="Report path.")
@click.option("--format", "fmt", type=click.Choice([f.value for f in ReportFormat]), default="structured", show_default=True)
@click.option("--emit-scores", is_flag=True, help="Keep per-row scores in every record.")
@click.option("--workers", type=int, help="Threads for the sweep.")
@_reporting_errors
def run(
    input_path: str,
    header: bool,
    labels: Optional[str],
    train: Optional[str],
    method: str,
    shape: str,
    tau: tuple[str, ...],
    tau_steps: Optional[str],
    scaler: str,
    mode: Optional[str],
    normal_class: Optional[int],
    n_normal: Optional[int],
    n_anomalous: Optional[int],
    seed: Optional[int],
    out: str,
    fmt: str,
    emit_scores: bool,
    workers: Optional[int],
) -> None:
    """Sweep tau over a dataset and write an evaluation report."""
    spec = build_spec(
        input=input_path,
        has_header=header,
        labels=labels,
        train=train,
        method=method,
        shape=FactorShape.parse(shape).factors,
        taus=_parse_floats(tau) if tau else None,
        tau_steps=_parse_floats((tau_steps,)) if tau_steps else None,
        scaler=scaler == "on",
        mode=mode,
        normal_class=normal_class,
        n_normal=n_normal,
        n_anomalous=n_anomalous,
        seed=seed,
        emit_scores=emit_scores,
        workers=workers,
    )
    report = run_experiment(spec)
    emit_report(report, ReportFormat(fmt), out)
    best = report.best()
    if best is None:
        click.echo(f"Scored {report.dataset.rows} rows for {len(report.records)} tau value(s) -> {out}")
    else:
        flag = " (all scores tie)" if best.roc.degenerate else ""
        click.echo(f"Best tau {best.tau}: AUROC {best.roc.auroc:.4f}, accuracy {best.roc.accuracy:.4f}{flag} -> {out}")


@cli.command("fetch-digits")
@click.option("--out", required=True, help="Destination CSV.")
@_reporting_errors
def fetch_digits(out: str) -> None:
    """Write the bundled 8x8 digits dataset as a headed CSV."""
    path = export_digits(out)
    click.echo(f"Wrote digits dataset to {path}")


@cli.command("fit-basis")
@click.option("--train", required=True, help="CSV whose first row is the normal training row.")
@click.option("--header/--no-header", default=True, show_default=True)
@click.option("--shape", required=True)
@click.option("--tau", required=True, help="Compression factor, or a comma list of per-step factors.")
@click.option("--out", required=True, help="Basis file.")
@_reporting_errors
def fit_basis(train: str, header: bool, shape: str, tau: str, out: str) -> None:
    """Fit and save the local basis of one (unscaled) training row."""
    taus = _parse_floats((tau,))
    if not taus:
        raise ConfigError("--tau is empty")
    policy = TruncationPolicy.of(taus[0] if len(taus) == 1 else taus)
    cfg = DetectorConfig.build(method=Method.ACL, shape=FactorShape.parse(shape), policy=policy, scaler=False)
    matrix, _ = load_csv(train, header)
    basis = local_fit(matrix[0], cfg)
    save_basis(basis, out)
    click.echo(f"Saved basis with bond dims {list(basis.bond_dims)} to {out}")


@cli.command("score-local")
@click.option("--basis", "basis_path", required=True)
@click.option("--input", "input_path", required=True)
@click.option("--header/--no-header", default=True, show_default=True)
@click.option("--group", is_flag=True, help="Group comparison against the input rows.")
@click.option("--out", required=True, help="CSV of per-row scores.")
@_reporting_errors
def score_local(basis_path: str, input_path: str, header: bool, group: bool, out: str) -> None:
    """Score rows against a saved local basis."""
    basis = load_basis(basis_path)
    matrix, _ = load_csv(input_path, header)
    scores = score_with_basis(matrix, basis, group=group)
    pd.DataFrame({"score": scores.values, "flagged": scores.flagged}).to_csv(out, index_label="row")
    click.echo(f"Scored {len(scores)} rows -> {out}")


def main() -> None:
    cli(prog_name="ttad")
