"""
Dense tensor helpers: factor shapes, index grouping and splitting, zero padding.

Every reshape in the toolkit uses row-major (C) linearization, so the last factor
varies fastest. The global and the local detectors both go through this module,
which keeps the convention identical on both paths.
"""

import math
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from ttad.errors import ConfigError, DataError, DimensionError, IndexBoundsError


class FactorShape(BaseModel):
    """
    Ordered factors of the (padded) feature dimension.

    Parameters
    ----------
    factors : tuple[int, ...]
        Factors ``d_1 ... d_k``, each at least 2.
    """

    model_config = ConfigDict(frozen=True)

    factors: tuple[int, ...]

    @field_validator("factors")
    @classmethod
    def _check_factors(cls, factors: tuple[int, ...]) -> tuple[int, ...]:
        if not factors:
            raise ValueError("a factor shape needs at least one factor")
        if any(d < 2 for d in factors):
            raise ValueError(f"every factor must be >= 2, got {list(factors)}")
        return factors

    @property
    def size(self) -> int:
        """Padded feature width ``M' = d_1 * ... * d_k``."""
        return math.prod(self.factors)

    @property
    def order(self) -> int:
        return len(self.factors)

    @classmethod
    def parse(cls, text: str | Sequence[int]) -> "FactorShape":
        """
        Build a shape from ``"2,2,2"`` or a sequence of ints.

        Raises
        ------
        ConfigError
            If the text is not a comma list of integers or a factor is below 2.
        """
        try:
            if isinstance(text, str):
                factors = tuple(int(part) for part in text.split(",") if part.strip())
            else:
                factors = tuple(int(part) for part in text)
            return cls(factors=factors)
        except (ValueError, ValidationError) as exc:
            raise ConfigError(f"invalid factor shape {text!r}: {exc}") from exc


def as_data_matrix(values) -> np.ndarray:
    """
    Validate and return an ``N x M`` float64 matrix.

    Raises
    ------
    DataError
        If the input is not two-dimensional, is empty, or holds NaN/Inf.
    """
    try:
        matrix = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DataError(f"not a rectangular numeric matrix: {exc}") from exc
    if matrix.ndim == 1:
        matrix = matrix[np.newaxis, :]
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise DataError(f"expected a non-empty 2-D matrix, got shape {matrix.shape}")
    if not np.isfinite(matrix).all():
        rows, cols = np.nonzero(~np.isfinite(matrix))
        raise DataError(f"non-finite value at row {rows[0]}, column {cols[0]}")
    return matrix


def group_indices(multi_index: Sequence[int], dims: Sequence[int]) -> int:
    """
    Map a multi-index to its row-major linear index.

    Examples
    --------
    >>> group_indices([1, 2, 3], [2, 3, 4])
    23
    """
    if len(multi_index) != len(dims):
        raise IndexBoundsError(f"index {list(multi_index)} has wrong order for dims {list(dims)}")
    for axis, (i, d) in enumerate(zip(multi_index, dims)):
        if not 0 <= i < d:
            raise IndexBoundsError(f"index {i} out of range [0, {d}) on axis {axis}")
    return int(np.ravel_multi_index(tuple(multi_index), tuple(dims)))


def split_indices(linear: int, dims: Sequence[int]) -> list[int]:
    """Inverse of :func:`group_indices`."""
    total = math.prod(dims)
    if not 0 <= linear < total:
        raise IndexBoundsError(f"linear index {linear} out of range [0, {total})")
    return [int(i) for i in np.unravel_index(linear, tuple(dims))]


def pad_features(matrix: np.ndarray, shape: FactorShape) -> np.ndarray:
    """
    Append zero columns so the feature width equals ``shape.size``.

    Zeros go at the end of each row, so norms and inner products are unchanged.

    Raises
    ------
    DimensionError
        If the shape is narrower than the matrix.
    """
    width = matrix.shape[1]
    if shape.size < width:
        raise DimensionError(
            f"shape {list(shape.factors)} holds {shape.size} features, data has {width}"
        )
    if shape.size == width:
        return matrix
    return np.pad(matrix, ((0, 0), (0, shape.size - width)))


def matrix_as_tensor(matrix: np.ndarray, shape: FactorShape) -> np.ndarray:
    """
    Split the feature axis of an ``N x M'`` matrix into ``shape.factors``.

    Returns
    -------
    np.ndarray
        Tensor of dims ``(N, d_1, ..., d_k)``.
    """
    if matrix.shape[1] != shape.size:
        raise DimensionError(
            f"matrix width {matrix.shape[1]} != shape product {shape.size}; pad first"
        )
    return matrix.reshape((matrix.shape[0],) + shape.factors)


def vector_as_tensor(vector: np.ndarray, shape: FactorShape) -> np.ndarray:
    """Reshape a single padded row to dims ``(d_1, ..., d_k)``."""
    return matrix_as_tensor(np.reshape(vector, (1, -1)), shape)[0]


def tensor_as_matrix(tensor: np.ndarray) -> np.ndarray:
    """Group every index but the first back into the feature axis."""
    return tensor.reshape(tensor.shape[0], -1)
