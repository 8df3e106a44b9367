"""Tests for the tensor type and its differentiable primitives."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mini_vtn.exceptions import ArgumentError, ShapeError
from mini_vtn.tensor import (
    FLOAT64,
    Tensor,
    add,
    backward,
    concat_features,
    elementwise,
    gelu,
    layer_norm,
    linear,
    matmul,
    mean_rows,
    mul,
    scale,
    slice_columns,
    softmax_rows,
    sum_all,
    tensor_create,
    zeros,
)


def t64(values, requires_grad=False):
    return Tensor(np.asarray(values, dtype=np.float64), requires_grad=requires_grad)


class TestTensorCreate:
    """Tests for tensor_create."""

    def test_identity_matrix(self):
        x = tensor_create([2, 2], [1, 0, 0, 1])
        np.testing.assert_array_equal(x.data, np.eye(2))
        assert x.shape == (2, 2)

    def test_rank_one(self):
        x = tensor_create([1], [3.5])
        assert x.shape == (1,)
        assert x.item() == 3.5

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            tensor_create([2, 3], [1, 2, 3, 4, 5])

    def test_non_positive_extent(self):
        with pytest.raises(ShapeError):
            tensor_create([0, 3], [])

    def test_rank_limits(self):
        with pytest.raises(ShapeError):
            Tensor(np.zeros((1, 1, 1, 1)))
        with pytest.raises(ShapeError):
            Tensor(np.float32(1.0))

    def test_default_dtype_is_float32(self):
        assert tensor_create([2], [1, 2]).dtype == np.float32
        assert tensor_create([2], [1, 2], dtype="float64").dtype == np.float64

    def test_unsupported_dtype(self):
        with pytest.raises(ArgumentError):
            tensor_create([2], [1, 2], dtype="int32")


class TestMatmul:
    def test_identity(self):
        m = t64([[1.5, -2.0], [0.25, 4.0]])
        np.testing.assert_array_equal(matmul(t64(np.eye(2)), m).data, m.data)

    def test_hand_multiplication(self):
        out = matmul(t64([[1, 2], [3, 4]]), t64([[5], [6]]))
        np.testing.assert_array_equal(out.data, [[17], [39]])

    def test_inner_mismatch(self):
        with pytest.raises(ShapeError):
            matmul(t64(np.ones((2, 3))), t64(np.ones((2, 3))))

    def test_vector_times_matrix(self):
        out = matmul(t64([1, 2]), t64([[1, 0, 2], [0, 1, 3]]))
        np.testing.assert_array_equal(out.data, [1, 2, 8])

    def test_operator(self):
        a, b = t64([[1, 2], [3, 4]]), t64([[5], [6]])
        np.testing.assert_array_equal((a @ b).data, matmul(a, b).data)


class TestSoftmaxRows:
    def test_symmetric_row(self):
        np.testing.assert_allclose(softmax_rows(t64([[0, 0]])).data, [[0.5, 0.5]])

    def test_large_values_do_not_overflow(self):
        out = softmax_rows(t64([[1000, 1000]]))
        assert np.all(np.isfinite(out.data))
        np.testing.assert_allclose(out.data, [[0.5, 0.5]])

    def test_analytic(self):
        np.testing.assert_allclose(softmax_rows(t64([[0, math.log(3)]])).data, [[0.25, 0.75]], atol=1e-12)

    def test_vector_input(self):
        np.testing.assert_allclose(softmax_rows(t64([0, 0, 0, 0])).data, [0.25] * 4)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (3, 5), elements=st.floats(-50, 50)))
    def test_rows_are_distributions(self, values):
        out = softmax_rows(Tensor(values)).data
        assert np.all(out >= 0)
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)


class TestLinear:
    def test_identity_weight(self):
        x = t64(np.arange(6).reshape(2, 3))
        np.testing.assert_array_equal(linear(x, t64(np.eye(3))).data, x.data)

    def test_zero_weight_ones_bias(self):
        out = linear(t64(np.ones((2, 3))), t64(np.zeros((3, 4))), t64(np.ones(4)))
        np.testing.assert_array_equal(out.data, np.ones((2, 4)))

    def test_matches_matmul(self):
        rng = np.random.default_rng(0)
        x, w = t64(rng.standard_normal((3, 4))), t64(rng.standard_normal((4, 2)))
        np.testing.assert_allclose(linear(x, w).data, matmul(x, w).data)

    def test_bias_mismatch(self):
        with pytest.raises(ShapeError):
            linear(t64(np.ones((2, 3))), t64(np.ones((3, 4))), t64(np.ones(3)))


class TestConcatFeatures:
    def test_single_part_unchanged(self):
        x = t64(np.ones((2, 3)))
        assert concat_features([x]) is x

    def test_block_layout(self):
        a = t64([[1, 2], [3, 4]])
        b = t64([[5], [6]])
        np.testing.assert_array_equal(concat_features([a, b]).data, [[1, 2, 5], [3, 4, 6]])

    def test_pyramid_widths(self):
        parts = [t64(np.zeros((2, 512 >> j))) for j in range(8)]
        assert concat_features(parts).shape == (2, 1020)

    def test_row_mismatch(self):
        with pytest.raises(ShapeError):
            concat_features([t64(np.ones((2, 2))), t64(np.ones((3, 2)))])

    def test_empty(self):
        with pytest.raises(ArgumentError):
            concat_features([])


class TestElementwise:
    def test_add_zeros(self):
        x = t64([[1, 2], [3, 4]])
        np.testing.assert_array_equal(add(x, zeros((2, 2), dtype=FLOAT64)).data, x.data)

    def test_scale_one(self):
        x = t64([[1, 2], [3, 4]])
        np.testing.assert_array_equal(scale(x, 1.0).data, x.data)

    def test_mean_rows(self):
        np.testing.assert_array_equal(mean_rows(t64([[1, 3], [5, 7]])).data, [3, 5])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            add(t64(np.ones((2, 2))), t64(np.ones((2, 3))))

    def test_dispatch_by_name(self):
        a, b = t64([1, 2]), t64([3, 4])
        np.testing.assert_array_equal(elementwise("mul", a, b).data, [3, 8])
        with pytest.raises(ArgumentError):
            elementwise("pow", a, b)

    def test_slice_columns(self):
        x = t64(np.arange(8).reshape(2, 4))
        np.testing.assert_array_equal(slice_columns(x, 1, 3).data, [[1, 2], [5, 6]])
        with pytest.raises(ShapeError):
            slice_columns(x, 3, 5)


class TestLayerNorm:
    def test_constant_row(self):
        out = layer_norm(t64([[2, 2, 2]]), t64(np.ones(3)), t64(np.zeros(3)))
        np.testing.assert_allclose(out.data, np.zeros((1, 3)), atol=1e-12)

    def test_normalized_row(self):
        out = layer_norm(t64([[-1, 1]]), t64(np.ones(2)), t64(np.zeros(2)))
        np.testing.assert_allclose(out.data, [[-1, 1]], atol=1e-5)

    def test_random_row_statistics(self):
        row = np.random.default_rng(3).standard_normal((1, 64)) * 5 + 2
        out = layer_norm(t64(row), t64(np.ones(64)), t64(np.zeros(64))).data
        assert abs(out.mean()) < 1e-6
        assert abs(out.var() - 1.0) < 1e-4


class TestLargeInputs:
    """Forward values and gradients stay finite for inputs up to 1e3 in magnitude."""

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (3, 4), elements=st.floats(-1e3, 1e3)))
    def test_layer_norm(self, values):
        x, gain, bias = t64(values, True), t64(np.ones(4), True), t64(np.zeros(4), True)
        out = layer_norm(x, gain, bias)
        grads = backward(sum_all(out), [x, gain, bias])
        assert np.all(np.isfinite(out.data))
        assert all(np.all(np.isfinite(grads.array(t))) for t in (x, gain, bias))

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (3, 4), elements=st.floats(-1e3, 1e3)))
    def test_gelu(self, values):
        x = t64(values, True)
        out = gelu(x)
        assert np.all(np.isfinite(out.data))
        assert np.all(np.isfinite(backward(sum_all(out), [x]).array(x)))

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (3, 4), elements=st.floats(-1e3, 1e3)))
    def test_softmax_rows_gradient(self, values):
        x = t64(values, True)
        out = softmax_rows(x)
        weights = t64(np.arange(12.0).reshape(3, 4))
        assert np.all(np.isfinite(backward(sum_all(mul(out, weights)), [x]).array(x)))


class TestBackward:
    """Tests for reverse-mode gradients."""

    def test_sum_gives_ones(self):
        x = t64(np.arange(6).reshape(2, 3), requires_grad=True)
        grads = backward(sum_all(x), [x])
        np.testing.assert_array_equal(grads.array(x), np.ones((2, 3)))

    def test_square_gives_twice_x(self):
        x = t64([[1.5, -2.0], [0.5, 3.0]], requires_grad=True)
        grads = backward(sum_all(mul(x, x)), [x])
        np.testing.assert_allclose(grads.array(x), 2 * x.data)

    def test_shared_subexpression_accumulates(self):
        x = t64([1.0, 2.0], requires_grad=True)
        y = add(x, x)
        grads = backward(sum_all(mul(y, y)), [x])
        # d/dx sum((2x)^2) = 8x
        np.testing.assert_allclose(grads.array(x), 8 * x.data)

    def test_non_scalar_loss(self):
        x = t64([1.0, 2.0], requires_grad=True)
        with pytest.raises(ArgumentError):
            backward(mul(x, x), [x])

    def test_unreachable_leaf_gets_zeros(self):
        x = t64([1.0, 2.0], requires_grad=True)
        unused = t64([[1.0, 2.0, 3.0]], requires_grad=True)
        grads = backward(sum_all(x), [x, unused])
        np.testing.assert_array_equal(grads.array(unused), np.zeros((1, 3)))

    def test_each_leaf_once(self):
        x = t64([1.0, 2.0], requires_grad=True)
        grads = backward(sum_all(x), [x, x])
        assert len(grads) == 1

    def test_matmul_gradients(self):
        a = t64([[1.0, 2.0], [3.0, 4.0]], requires_grad=True)
        b = t64([[5.0], [6.0]], requires_grad=True)
        grads = backward(sum_all(matmul(a, b)), [a, b])
        np.testing.assert_array_equal(grads.array(a), [[5, 6], [5, 6]])
        np.testing.assert_array_equal(grads.array(b), [[4], [6]])

    def test_gradient_keeps_dtype(self):
        x = Tensor(np.ones(3, dtype=np.float32), requires_grad=True)
        grads = backward(sum_all(scale(x, 2.0)), [x])
        assert grads.array(x).dtype == np.float32
