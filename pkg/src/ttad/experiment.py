"""
Experiment harness: load a dataset, sample it, sweep the compression factor and
evaluate every run.

A report echoes its full :class:`ExperimentSpec` together with a fingerprint of the
input, so the same experiment can be re-run from the report alone.
"""

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, field_validator

from config import (
    DEFAULT_N_ANOMALOUS,
    DEFAULT_N_NORMAL,
    DEFAULT_SEED,
    DEFAULT_TAU_MAX,
    DEFAULT_TAU_POINTS,
    MAX_WORKERS,
)
from ttad import __version__
from ttad.datasets import load_csv, load_labels
from ttad.detectors import DetectorConfig, Method, Mode, ScoreVector, infer_mode, score
from ttad.errors import ConfigError, DataError, TTADError
from ttad.metrics import RocReport, roc_auroc
from ttad.preprocessing import apply_scaler, draw_training_row, fit_scaler, sample_indices
from ttad.svd_engine import TruncationPolicy
from ttad.tensor_core import FactorShape

logger = logging.getLogger(__name__)

TABULAR_COLUMNS = ["tau", "auroc", "threshold", "accuracy", "tn", "fp", "fn", "tp"]


class ReportFormat(str, Enum):
    STRUCTURED = "structured"
    TABULAR = "tabular"


def default_tau_grid() -> list[float]:
    """Evenly spaced compression factors in ``[0, DEFAULT_TAU_MAX]``."""
    return np.linspace(0.0, DEFAULT_TAU_MAX, DEFAULT_TAU_POINTS).tolist()


class ExperimentSpec(BaseModel):
    """Everything needed to reproduce one sweep."""

    input: str
    has_header: bool = True
    labels: Optional[str] = None
    train: Optional[str] = None
    method: Method = Method.ACG
    shape: tuple[int, ...]
    taus: list[float] = Field(default_factory=default_tau_grid)
    tau_steps: Optional[list[float]] = None
    scaler: bool = True
    mode: Optional[Mode] = None
    normal_class: Optional[int] = None
    n_normal: Optional[int] = None
    n_anomalous: Optional[int] = None
    seed: int = DEFAULT_SEED
    emit_scores: bool = False
    workers: int = MAX_WORKERS

    @field_validator("taus")
    @classmethod
    def _check_taus(cls, taus: list[float]) -> list[float]:
        if not taus:
            raise ValueError("the tau list is empty")
        for tau in taus:
            if not 0.0 <= tau <= 1.0:
                raise ValueError(f"tau must lie in [0, 1], got {tau}")
        return taus

    @property
    def factor_shape(self) -> FactorShape:
        return FactorShape.parse(self.shape)

    @property
    def sampling(self) -> bool:
        return self.n_normal is not None or self.n_anomalous is not None


class DatasetFingerprint(BaseModel):
    rows: int
    cols: int
    sha256: str


class SweepRecord(BaseModel):
    tau: Union[float, list[float]]
    roc: Optional[RocReport] = None
    runtime_seconds: float
    flagged_rows: int
    scores: Optional[list[float]] = None


class SweepReport(BaseModel):
    spec: ExperimentSpec
    dataset: DatasetFingerprint
    version: str
    records: list[SweepRecord]

    def best(self) -> Optional[SweepRecord]:
        """Record with the highest AUROC (first one on ties), None for unlabelled runs."""
        evaluated = [record for record in self.records if record.roc is not None]
        if not evaluated:
            return None
        return max(evaluated, key=lambda record: record.roc.auroc)


def build_spec(**kwargs) -> ExperimentSpec:
    """Validate harness options, mapping pydantic failures to ``ConfigError``."""
    try:
        return ExperimentSpec(**{key: value for key, value in kwargs.items() if value is not None})
    except ValidationError as exc:
        raise ConfigError(f"invalid experiment: {exc}") from exc


def _fingerprint(path: Path, matrix: np.ndarray) -> DatasetFingerprint:
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return DatasetFingerprint(rows=matrix.shape[0], cols=matrix.shape[1], sha256=digest)


@dataclass(frozen=True)
class _Prepared:
    """Rows handed to the detector for every tau."""

    test: np.ndarray
    truth: Optional[np.ndarray]
    train: Optional[np.ndarray]
    prescaled: bool = False


def _labels_file(spec: ExperimentSpec) -> bool:
    """Whether --labels names a separate file rather than a column of the input."""
    return spec.labels is not None and Path(spec.labels).is_file()


def _load_labels(spec: ExperimentSpec, n_rows: int, data_labels) -> Optional[np.ndarray]:
    if not _labels_file(spec):
        return data_labels
    labels = load_labels(spec.labels, spec.has_header)
    if len(labels) != n_rows:
        raise DataError(f"{spec.labels} has {len(labels)} labels for {n_rows} rows")
    return labels


def _prepare_data(spec: ExperimentSpec) -> tuple[_Prepared, DatasetFingerprint]:
    path = Path(spec.input)
    label_column = None if _labels_file(spec) else spec.labels
    matrix, data_labels = load_csv(path, spec.has_header, label_column)
    labels = _load_labels(spec, len(matrix), data_labels)
    fingerprint = _fingerprint(path, matrix)
    if spec.factor_shape.size < matrix.shape[1]:
        raise ConfigError(
            f"shape {list(spec.shape)} holds {spec.factor_shape.size} features, data has {matrix.shape[1]}"
        )

    # A sampled run is scaled with the statistics of the whole loaded dataset.
    params = None
    if spec.scaler and spec.sampling:
        params = fit_scaler(matrix)
        matrix = apply_scaler(matrix, params)
        logger.info("scaler fitted on all %d loaded rows before sampling", len(matrix))

    truth = None
    test = matrix
    rng = np.random.default_rng(spec.seed)
    excluded = np.arange(0)
    if labels is not None:
        if spec.normal_class is None:
            raise ConfigError("labelled data needs --normal-class")
        if spec.sampling:
            normal, anomalous = sample_indices(
                labels,
                spec.normal_class,
                spec.n_normal if spec.n_normal is not None else DEFAULT_N_NORMAL,
                spec.n_anomalous if spec.n_anomalous is not None else DEFAULT_N_ANOMALOUS,
                rng,
            )
            rows = np.concatenate([normal, anomalous])
            test, excluded = matrix[rows], normal
            truth = (labels[rows] != spec.normal_class).astype(int)
        else:
            truth = (labels != spec.normal_class).astype(int)
    elif spec.sampling:
        raise ConfigError("sampling needs labels")

    train = None
    if spec.train is not None:
        train, _ = load_csv(spec.train, spec.has_header)
        if params is not None:
            train = apply_scaler(train, params)
    elif spec.method.is_local:
        if labels is None:
            raise ConfigError("local methods need --train or labelled data with a spare normal row")
        index = draw_training_row(labels, spec.normal_class, excluded, rng)
        if index is None:
            raise ConfigError("no normal row left outside the sample to train the local basis")
        train = matrix[index : index + 1]
        logger.info("local basis trained on row %d", index)
    return _Prepared(test=test, truth=truth, train=train, prescaled=params is not None), fingerprint


def _detector_config(spec: ExperimentSpec, tau, workers: int = 1, prescaled: bool = False) -> DetectorConfig:
    return DetectorConfig.build(
        method=spec.method,
        shape=spec.factor_shape,
        policy=TruncationPolicy.of(tau),
        scaler=spec.scaler and not prescaled,
        mode=infer_mode(spec.method, spec.mode, spec.train is not None),
        workers=workers,
    )


def _run_one(spec: ExperimentSpec, data: _Prepared, tau, workers: int = 1) -> SweepRecord:
    started = time.perf_counter()
    try:
        scores: ScoreVector = score(_detector_config(spec, tau, workers, data.prescaled), data.test, data.train)
        roc = None if data.truth is None else roc_auroc(scores.values, data.truth)
    except TTADError as exc:
        raise exc.at_tau(tau) from exc
    runtime = time.perf_counter() - started
    if roc is not None:
        logger.info("tau=%s auroc=%.4f accuracy=%.4f", tau, roc.auroc, roc.accuracy)
    return SweepRecord(
        tau=tau,
        roc=roc,
        runtime_seconds=runtime,
        flagged_rows=int(scores.flagged.sum()),
        scores=scores.values.tolist() if spec.emit_scores or data.truth is None else None,
    )


def run_experiment(spec: ExperimentSpec) -> SweepReport:
    """
    Run the configured detector for every tau and evaluate it.

    Records follow the requested tau order whatever the thread scheduling;
    a per-step ``tau_steps`` policy adds one final record.

    Raises
    ------
    TTADError
        Any module error, tagged with the tau at which it occurred.
    """
    data, fingerprint = _prepare_data(spec)
    taus: list = list(spec.taus)
    if spec.tau_steps is not None:
        taus.append(list(spec.tau_steps))
    logger.info(
        "running %s on %d rows for %d tau value(s)", spec.method.value, len(data.test), len(taus)
    )
    # Threads go to the tau values when there are several, else to the rows.
    if spec.workers > 1 and len(taus) > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            records = list(pool.map(lambda tau: _run_one(spec, data, tau), taus))
    else:
        records = [_run_one(spec, data, tau, spec.workers) for tau in taus]
    return SweepReport(spec=spec, dataset=fingerprint, version=__version__, records=records)


def _metadata(report: SweepReport) -> dict:
    return {"spec": report.spec.model_dump(mode="json"), "dataset": report.dataset.model_dump(), "version": report.version}


def tabular_frame(report: SweepReport) -> pd.DataFrame:
    """One row per tau; list-valued (per-step) taus are written as ``a;b;c``."""
    rows = []
    for record in report.records:
        tau = ";".join(map(str, record.tau)) if isinstance(record.tau, list) else record.tau
        roc = record.roc
        rows.append(
            [tau]
            + ([None] * 7 if roc is None else [roc.auroc, roc.threshold, roc.accuracy, roc.tn, roc.fp, roc.fn, roc.tp])
        )
    return pd.DataFrame(rows, columns=TABULAR_COLUMNS)


def emit_report(report: SweepReport, fmt: ReportFormat, out: Union[str, Path]) -> Path:
    """
    Write the report.

    The structured format is the full JSON document. The tabular format is CSV with
    the metadata as ``#``-prefixed JSON lines above the header.

    Raises
    ------
    DataError
        If the path cannot be written.
    """
    out = Path(out)
    try:
        if ReportFormat(fmt) is ReportFormat.STRUCTURED:
            out.write_text(report.model_dump_json(indent=2), encoding="utf-8")
        else:
            with out.open("w", encoding="utf-8", newline="") as handle:
                for key, value in _metadata(report).items():
                    handle.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
                tabular_frame(report).to_csv(handle, index=False)
    except OSError as exc:
        raise DataError(f"cannot write report to {out}: {exc}") from exc
    logger.info("wrote %s report to %s", ReportFormat(fmt).value, out)
    return out


def load_report(path: Union[str, Path]) -> SweepReport:
    """Parse a structured report back into memory."""
    return SweepReport.model_validate_json(Path(path).read_text(encoding="utf-8"))
