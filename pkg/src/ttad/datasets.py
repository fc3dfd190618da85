""" CSV ingestion and the packaged digits dataset. """

import logging
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from ttad.errors import DataError
from ttad.tensor_core import as_data_matrix

logger = logging.getLogger(__name__)

DIGITS_LABEL_COLUMN = 64


def _read_table(path: Path, has_header: bool) -> pd.DataFrame:
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    try:
        frame = pd.read_csv(
            path,
            header=0 if has_header else None,
            dtype=str,
            keep_default_na=False,
            na_values=[""],
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError as exc:
        raise DataError(f"{path}: empty file") from exc
    except pd.errors.ParserError as exc:
        raise DataError(f"{path}: ragged row: {exc}") from exc
    if frame.empty:
        raise DataError(f"{path}: no data rows")
    return frame


def _line_number(row: int, has_header: bool) -> int:
    return row + (2 if has_header else 1)


def _numeric(frame: pd.DataFrame, path: Path, has_header: bool) -> pd.DataFrame:
    missing = frame.isna().to_numpy()
    if missing.any():
        row, col = np.argwhere(missing)[0]
        raise DataError(
            f"{path}: ragged row or empty field "
            f"at line {_line_number(row, has_header)}, column {frame.columns[col]}"
        )
    values = frame.apply(pd.to_numeric, errors="coerce")
    bad = values.isna().to_numpy()
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise DataError(
            f"{path}: non-numeric value {frame.iat[row, col]!r} "
            f"at line {_line_number(row, has_header)}, column {frame.columns[col]}"
        )
    return values


def _resolve_column(frame: pd.DataFrame, column: Union[str, int]) -> object:
    if column in frame.columns:
        return column
    try:
        return frame.columns[int(column)]
    except (ValueError, IndexError) as exc:
        raise DataError(f"label column {column!r} not found") from exc


def _as_labels(series: pd.Series, path: Path) -> np.ndarray:
    labels = series.to_numpy(dtype=np.float64)
    if not np.array_equal(labels, np.round(labels)):
        raise DataError(f"{path}: labels must be integers")
    return labels.astype(int)


def load_csv(
    path: Union[str, Path],
    has_header: bool = True,
    label_column: Optional[Union[str, int]] = None,
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Read a rectangular numeric table.

    Parameters
    ----------
    path : str or Path
        CSV file, optionally gzip-compressed.
    has_header : bool
        Whether the first line names the columns.
    label_column : str or int, optional
        Header name or zero-based index of an integer label column.

    Returns
    -------
    tuple[np.ndarray, np.ndarray or None]
        The ``N x M`` float64 matrix and the labels, if a label column was named.

    Raises
    ------
    DataError
        On a missing or empty file, a ragged row or a non-numeric cell; the message
        names the line and column.
    """
    path = Path(path)
    frame = _numeric(_read_table(path, has_header), path, has_header)
    labels = None
    if label_column is not None:
        column = _resolve_column(frame, label_column)
        labels = _as_labels(frame.pop(column), path)
    if frame.shape[1] == 0:
        raise DataError(f"{path}: no feature columns")
    matrix = as_data_matrix(frame.to_numpy(dtype=np.float64))
    logger.info("loaded %s: %d rows x %d features", path.name, *matrix.shape)
    return matrix, labels


def load_labels(path: Union[str, Path], has_header: bool = True) -> np.ndarray:
    """Read a one-column integer labels file."""
    path = Path(path)
    frame = _numeric(_read_table(path, has_header), path, has_header)
    if frame.shape[1] != 1:
        raise DataError(f"{path}: a labels file has exactly one column, found {frame.shape[1]}")
    return _as_labels(frame.iloc[:, 0], path)


def digits_fixture_path() -> Path:
    """Location of the 1797-row digits table (64 pixels + label, no header) shipped with scikit-learn."""
    path = Path(str(resources.files("sklearn.datasets") / "data" / "digits.csv.gz"))
    if not path.is_file():
        raise DataError(f"digits fixture not found at {path}")
    return path


def load_digits() -> tuple[np.ndarray, np.ndarray]:
    """8x8 digit images as a 1797 x 64 matrix with labels 0-9."""
    return load_csv(digits_fixture_path(), has_header=False, label_column=DIGITS_LABEL_COLUMN)


def export_digits(out: Union[str, Path]) -> Path:
    """Write the digits table as a headed CSV (``p0..p63,label``)."""
    matrix, labels = load_digits()
    frame = pd.DataFrame(matrix, columns=[f"p{i}" for i in range(matrix.shape[1])])
    frame["label"] = labels
    out = Path(out)
    frame.to_csv(out, index=False)
    return out
