"""Tests for index grouping, padding and feature-axis reshaping."""

import itertools

import numpy as np
import pytest
from pydantic import ValidationError

from ttad.errors import ConfigError, DataError, DimensionError, IndexBoundsError
from ttad.tensor_core import (
    FactorShape,
    as_data_matrix,
    group_indices,
    matrix_as_tensor,
    pad_features,
    split_indices,
    tensor_as_matrix,
    vector_as_tensor,
)


def test_factor_shape_rejects_unit_factors():
    with pytest.raises(ValidationError):
        FactorShape(factors=(2, 1, 2))
    with pytest.raises(ConfigError):
        FactorShape.parse("2,1")
    with pytest.raises(ConfigError):
        FactorShape.parse("2,x")


def test_factor_shape_parse():
    shape = FactorShape.parse("3, 3,3,3")
    assert shape.factors == (3, 3, 3, 3)
    assert shape.size == 81
    assert shape.order == 4


def test_pad_features_appends_zero_columns():
    matrix = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    padded = pad_features(matrix, FactorShape(factors=(2, 2)))
    assert padded.shape == (2, 4)
    np.testing.assert_array_equal(padded[:, :3], matrix)
    np.testing.assert_array_equal(padded[:, 3], 0.0)
    np.testing.assert_array_equal(np.linalg.norm(padded, axis=1), np.linalg.norm(matrix, axis=1))


def test_pad_features_without_padding():
    matrix = np.arange(8.0).reshape(2, 4)
    np.testing.assert_array_equal(pad_features(matrix, FactorShape(factors=(2, 2))), matrix)


def test_pad_features_too_narrow():
    with pytest.raises(DimensionError):
        pad_features(np.ones((1, 5)), FactorShape(factors=(2, 2)))


@pytest.mark.parametrize(
    "multi_index, dims, linear",
    [([1, 0], [2, 2], 2), ([0, 0, 0], [2, 3, 4], 0), ([1, 2, 3], [2, 3, 4], 23), ([0, 0], [5, 7], 0)],
)
def test_group_and_split(multi_index, dims, linear):
    assert group_indices(multi_index, dims) == linear
    assert split_indices(linear, dims) == multi_index


def test_split_inverts_group_everywhere():
    dims = [2, 3, 4]
    for multi_index in itertools.product(*(range(d) for d in dims)):
        assert split_indices(group_indices(list(multi_index), dims), dims) == list(multi_index)


def test_index_bounds():
    with pytest.raises(IndexBoundsError):
        group_indices([2, 0], [2, 2])
    with pytest.raises(IndexBoundsError):
        group_indices([0], [2, 2])
    with pytest.raises(IndexBoundsError):
        split_indices(4, [2, 2])
    with pytest.raises(IndexBoundsError):
        split_indices(-1, [2, 2])


def test_matrix_as_tensor():
    matrix = np.arange(12.0).reshape(3, 4)
    shape = FactorShape(factors=(2, 2))
    tensor = matrix_as_tensor(matrix, shape)
    assert tensor.shape == (3, 2, 2)
    assert tensor[1, 1, 1] == matrix[1, 3]
    for row, col in itertools.product(range(3), range(4)):
        assert tensor[(row, *split_indices(col, [2, 2]))] == matrix[row, col]
    np.testing.assert_array_equal(tensor_as_matrix(tensor), matrix)


def test_vector_as_tensor_drops_row_axis():
    tensor = vector_as_tensor(np.arange(8.0), FactorShape(factors=(2, 2, 2)))
    assert tensor.shape == (2, 2, 2)
    assert tensor[1, 0, 1] == 5.0


def test_matrix_as_tensor_width_mismatch():
    with pytest.raises(DimensionError):
        matrix_as_tensor(np.ones((2, 3)), FactorShape(factors=(2, 2)))


def test_as_data_matrix_validation():
    assert as_data_matrix([1.0, 2.0]).shape == (1, 2)
    with pytest.raises(DataError):
        as_data_matrix([[1.0, np.nan]])
    with pytest.raises(DataError):
        as_data_matrix([[1.0, 2.0], [3.0]])
    with pytest.raises(DataError):
        as_data_matrix(np.zeros((0, 3)))
