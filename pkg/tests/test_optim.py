"""Tests for the loss, Adam and the learning-rate schedule."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mini_vtn.config import TrainConfig
from mini_vtn.exceptions import ArgumentError, ShapeError
from mini_vtn.tensor import Tensor, backward, finite_diff_grad, softmax_rows
from mini_vtn.training import PROB_FLOOR, AdamState, adam_step, cross_entropy, lr_schedule


def t64(values, requires_grad=False):
    return Tensor(np.asarray(values, dtype=np.float64), requires_grad=requires_grad)


class TestCrossEntropy:
    def test_uniform(self):
        assert cross_entropy(t64([0.25] * 4), 2).item() == pytest.approx(math.log(4))

    def test_one_hot(self):
        assert cross_entropy(t64([0.0, 1.0, 0.0]), 1).item() == 0.0

    def test_zero_probability_is_clamped(self):
        loss = cross_entropy(t64([1.0, 0.0]), 1).item()
        assert math.isfinite(loss)
        assert loss == pytest.approx(-math.log(PROB_FLOOR))
        assert loss == pytest.approx(27.631, abs=1e-3)

    def test_label_out_of_range(self):
        with pytest.raises(ArgumentError):
            cross_entropy(t64([0.5, 0.5]), 2)
        with pytest.raises(ArgumentError):
            cross_entropy(t64([0.5, 0.5]), -1)

    def test_needs_vector(self):
        with pytest.raises(ShapeError):
            cross_entropy(t64([[0.5, 0.5]]), 0)

    def test_gradient_through_softmax(self):
        logits = t64([0.3, -1.2, 2.0], requires_grad=True)
        grads = backward(cross_entropy(softmax_rows(logits), 0), [logits])
        numeric = finite_diff_grad(lambda x: cross_entropy(softmax_rows(x), 0), logits)
        np.testing.assert_allclose(grads.array(logits), numeric.data, atol=1e-8)

    @given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6), st.integers(0, 5))
    def test_non_negative(self, weights, label):
        probs = np.asarray(weights) / sum(weights)
        assert cross_entropy(t64(probs), label % len(weights)).item() >= 0.0


class TestAdam:
    """Tests for adam_step."""

    def test_zero_gradient_keeps_parameters(self):
        param = t64([[1.0, -2.0]], requires_grad=True)
        state = AdamState.zeros_like([param])
        adam_step([param], [np.zeros((1, 2))], state, lr=0.1)
        np.testing.assert_array_equal(param.data, [[1.0, -2.0]])
        assert state.step == 1

    @pytest.mark.parametrize("grad", [3.0, -0.02, 1e-3])
    def test_first_step_moves_by_lr(self, grad):
        param = t64([5.0], requires_grad=True)
        state = AdamState.zeros_like([param])
        adam_step([param], [np.array([grad])], state, lr=0.01)
        assert param.data[0] == pytest.approx(5.0 - 0.01 * math.copysign(1.0, grad), abs=1e-6)

    def test_descends_quadratic(self):
        x = t64([1.0], requires_grad=True)
        state = AdamState.zeros_like([x])
        for _ in range(100):
            adam_step([x], [2.0 * x.data], state, lr=0.1)
        assert abs(x.data[0]) < 0.1

    def test_moment_shapes(self):
        params = [t64(np.ones((2, 3))), t64(np.ones(4))]
        state = AdamState.zeros_like(params)
        assert state.shapes == [(2, 3), (4,)]
        assert state.step == 0

    def test_shape_mismatch(self):
        param = t64([1.0, 2.0])
        state = AdamState.zeros_like([param])
        with pytest.raises(ShapeError):
            adam_step([param], [np.zeros(3)], state, lr=0.1)
        with pytest.raises(ShapeError):
            adam_step([param], [], state, lr=0.1)

    def test_keeps_float32(self):
        param = Tensor(np.ones(3, dtype=np.float32), requires_grad=True)
        state = AdamState.zeros_like([param])
        adam_step([param], [np.ones(3, dtype=np.float32)], state, lr=1e-3)
        assert param.dtype == np.float32


class TestLrSchedule:
    def test_defaults(self):
        config = TrainConfig()
        assert lr_schedule(1, config) == pytest.approx(1e-4)
        assert lr_schedule(49, config) == pytest.approx(1e-4)
        assert lr_schedule(50, config) == pytest.approx(1e-5)
        assert lr_schedule(75, config) == pytest.approx(1e-6)

    def test_no_decay(self):
        config = TrainConfig(decay_epochs=[])
        assert {lr_schedule(e, config) for e in range(0, 200, 7)} == {1e-4}

    def test_non_increasing(self):
        config = TrainConfig(decay_epochs=[3, 10, 11], decay_factor=0.5)
        rates = [lr_schedule(e, config) for e in range(0, 20)]
        assert all(a >= b for a, b in zip(rates, rates[1:]))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(decay_epochs=[75, 50])
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
