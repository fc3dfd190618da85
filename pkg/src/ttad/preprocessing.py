""" Standard scaling and seeded experiment sampling. """

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import ZERO_STD_TOL
from ttad.errors import DimensionError, SamplingError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScalerParams:
    """
    Per-column affine normalization.

    Attributes
    ----------
    mean : np.ndarray
        Column means.
    std : np.ndarray
        Population standard deviations, 1 where the column has zero variance.
    zero_variance : np.ndarray
        Boolean mask of the columns whose std was replaced by 1.
    """

    mean: np.ndarray
    std: np.ndarray
    zero_variance: np.ndarray

    @classmethod
    def identity(cls, width: int) -> "ScalerParams":
        return cls(np.zeros(width), np.ones(width), np.zeros(width, dtype=bool))


def fit_scaler(matrix: np.ndarray) -> ScalerParams:
    """Column means and population stds of ``matrix``; constant columns get std 1 and are flagged."""
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    zero_variance = std <= ZERO_STD_TOL
    if zero_variance.any():
        logger.warning("%d zero-variance column(s) left unscaled", int(zero_variance.sum()))
    std = np.where(zero_variance, 1.0, std)
    return ScalerParams(mean=mean, std=std, zero_variance=zero_variance)


def _check_width(matrix: np.ndarray, params: ScalerParams) -> None:
    if matrix.shape[1] != params.mean.shape[0]:
        raise DimensionError(
            f"scaler fitted on {params.mean.shape[0]} columns, matrix has {matrix.shape[1]}"
        )


def apply_scaler(matrix: np.ndarray, params: ScalerParams) -> np.ndarray:
    """``(value - mean) / std`` per column."""
    _check_width(matrix, params)
    return (matrix - params.mean) / params.std


def invert_scaler(matrix: np.ndarray, params: ScalerParams) -> np.ndarray:
    _check_width(matrix, params)
    return matrix * params.std + params.mean


def sample_indices(
    labels: np.ndarray,
    normal_class: int,
    n_normal: int,
    n_anomalous: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Draw row indices without replacement: ``n_normal`` of ``normal_class`` and
    ``n_anomalous`` pooled from every other class.

    Raises
    ------
    SamplingError
        If either pool is too small; the message names both counts.
    """
    labels = np.asarray(labels)
    normal_pool = np.flatnonzero(labels == normal_class)
    anomalous_pool = np.flatnonzero(labels != normal_class)
    shortfalls = [
        f"{kind}: requested {wanted}, available {len(pool)}"
        for kind, wanted, pool in (
            ("normal", n_normal, normal_pool),
            ("anomalous", n_anomalous, anomalous_pool),
        )
        if wanted > len(pool)
    ]
    if shortfalls:
        raise SamplingError("not enough rows (" + "; ".join(shortfalls) + ")")
    normal = rng.choice(normal_pool, size=n_normal, replace=False)
    anomalous = rng.choice(anomalous_pool, size=n_anomalous, replace=False)
    return normal, anomalous


def sample_experiment(
    data: np.ndarray,
    labels: np.ndarray,
    normal_class: int,
    n_normal: int,
    n_anomalous: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Seeded normal-vs-rest sample.

    Returns
    -------
    tuple[np.ndarray, np.ndarray]
        The sampled rows (normal block first) and binary labels, 1 marking anomalies.
    """
    rng = np.random.default_rng(seed)
    normal, anomalous = sample_indices(labels, normal_class, n_normal, n_anomalous, rng)
    rows = np.concatenate([normal, anomalous])
    binary = np.concatenate([np.zeros(n_normal, dtype=int), np.ones(n_anomalous, dtype=int)])
    return data[rows], binary


def draw_training_row(
    labels: np.ndarray,
    normal_class: int,
    exclude: np.ndarray,
    rng: np.random.Generator,
) -> Optional[int]:
    """Pick one normal row index outside ``exclude``, or None when every normal row is excluded."""
    pool = np.setdiff1d(np.flatnonzero(np.asarray(labels) == normal_class), exclude)
    if pool.size == 0:
        return None
    return int(rng.choice(pool))
