import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as npst

from mimkit.core import (
    Dataset,
    DomainError,
    FeatureKind,
    InfluenceVector,
    LabeledPoint,
    Mode,
    ModeError,
    SchemaError,
    WeightKernel,
    encode_categorical,
    euclidean_distance,
    hamming_distance,
    kernel_eval,
)


def test_euclidean_examples():
    assert euclidean_distance([0, 0], [3, 4]) == 5.0
    assert euclidean_distance([1.5, -2], [1.5, -2]) == 0.0
    assert euclidean_distance([1, 1, 1], [0, 0, 0]) == pytest.approx(1.7320508, abs=1e-7)


def test_euclidean_dimension_mismatch():
    with pytest.raises(SchemaError):
        euclidean_distance([1, 2], [1, 2, 3])


def test_hamming_counts_differing_coordinates():
    assert hamming_distance([1, 0, 1, 0], [0, 0, 1, 1]) == 2


vec3 = npst.arrays(np.float64, 3, elements=st.floats(-1e3, 1e3))


@given(vec3, vec3, vec3)
def test_triangle_inequality(a, b, c):
    assert euclidean_distance(a, c) <= euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-9


@given(vec3, vec3)
def test_distance_symmetric(a, b):
    assert euclidean_distance(a, b) == euclidean_distance(b, a)


def test_kernel_examples():
    assert kernel_eval(WeightKernel("inverse_square"), 2) == 0.25
    assert kernel_eval(WeightKernel("constant"), 7.3) == 1.0
    assert kernel_eval(WeightKernel("inverse"), 0.5) == 2.0


@pytest.mark.parametrize("kind", ["constant", "inverse", "inverse_square"])
def test_kernel_rejects_nonpositive_distance(kind):
    with pytest.raises(DomainError):
        kernel_eval(WeightKernel(kind), 0.0)
    with pytest.raises(DomainError):
        kernel_eval(WeightKernel(kind), -1.0)


def test_table_kernel_interpolates_and_holds_ends():
    k = WeightKernel("table", ((1.0, 4.0), (3.0, 0.0)))
    assert kernel_eval(k, 2.0) == 2.0
    assert kernel_eval(k, 0.5) == 4.0
    assert kernel_eval(k, 10.0) == 0.0


def test_table_kernel_must_decrease():
    with pytest.raises(ValueError):
        WeightKernel("table", ((1.0, 1.0), (2.0, 3.0)))


@settings(max_examples=200)
@given(st.floats(1e-6, 1e6), st.sampled_from(["constant", "inverse", "inverse_square", "table"]))
def test_kernels_nonnegative(d, kind):
    k = WeightKernel(kind, ((0.0, 5.0), (1.0, 2.0), (4.0, 0.5)) if kind == "table" else ())
    w = kernel_eval(k, d)
    assert w >= 0 and math.isfinite(w)


def test_dataset_validation():
    with pytest.raises(ModeError):
        Dataset([[0.0], [1.0]], [1, 0])
    with pytest.raises(SchemaError):
        Dataset([[0.0], [1.0]], [1])
    with pytest.raises(SchemaError):
        Dataset(np.zeros((0, 2)), [])
    ds = Dataset([[0.0], [1.0]], [3.5, 7.0], mode="regression")
    assert ds.mode is Mode.REGRESSION and ds.m == 2 and ds.n == 1


def test_dataset_is_immutable():
    ds = Dataset([[0.0, 1.0]], [1])
    with pytest.raises(ValueError):
        ds.X[0, 0] = 5.0


def test_from_points_rejects_mixed_dimensions():
    with pytest.raises(SchemaError):
        Dataset.from_points([LabeledPoint(np.zeros(2), 1), LabeledPoint(np.zeros(3), 1)])


def test_influence_vector_rejects_nonfinite():
    with pytest.raises(ArithmeticError):
        InfluenceVector([1.0, np.nan], 0)


def _race_dataset():
    X = np.array([[1.0, "WWH"], [2.0, "BLK"], [3.0, "WWH"]], dtype=object)
    return Dataset(X, [1, -1, 1], schema=(FeatureKind.NUMERIC, FeatureKind.CATEGORICAL))


def test_encode_categorical_race_rule():
    enc = encode_categorical(_race_dataset(), 0)
    assert enc.X[:, 1].tolist() == [1.0, 0.0, 1.0]
    assert enc.X[:, 0].tolist() == [1.0, 2.0, 3.0]


def test_encode_categorical_relative_to_poi():
    enc = encode_categorical(_race_dataset(), 1)
    assert enc.X[:, 1].tolist() == [0.0, 1.0, 0.0]


def test_encode_categorical_all_equal_and_noop():
    X = np.array([["a"], ["a"]], dtype=object)
    ds = Dataset(X, [1, 1], schema=(FeatureKind.CATEGORICAL,))
    assert encode_categorical(ds, 1).X[:, 0].tolist() == [1.0, 1.0]
    plain = Dataset([[0.5, 2.0], [1.0, 3.0]], [1, -1])
    out = encode_categorical(plain, 0)
    assert out is not plain
    np.testing.assert_array_equal(out.X, plain.X)


def test_encode_categorical_idempotent():
    once = encode_categorical(_race_dataset(), 0)
    twice = encode_categorical(once, 0)
    np.testing.assert_array_equal(once.X, twice.X)


def test_unencoded_matrix_access_fails():
    with pytest.raises(SchemaError):
        _race_dataset().matrix()
