"""Differentiable primitives over ``Tensor``.

Every op checks extents up front and raises ``ShapeError`` naming the operands. Backward
rules are closures over the forward intermediates they need.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ..exceptions import ArgumentError, ShapeError
from .tensor import Tensor

LAYER_NORM_EPS = 1e-5

_GELU_C = np.sqrt(2.0 / np.pi)
_GELU_A = 0.044715


def _require_same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product ``a @ b`` for ``a`` of shape [m, k] (or [k]) and ``b`` of shape [k, n]."""
    if a.ndim not in (1, 2) or b.ndim != 2:
        raise ShapeError(f"matmul: unsupported ranks {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[0]:
        raise ShapeError(f"matmul: inner extents differ in {a.shape} @ {b.shape}")

    a_data, b_data = a.data, b.data

    def _backward(grad: np.ndarray):
        grad_a = grad @ b_data.T
        grad_b = np.outer(a_data, grad) if a_data.ndim == 1 else a_data.T @ grad
        return grad_a, grad_b

    return Tensor.from_op(a_data @ b_data, (a, b), _backward, "matmul")


def transpose(a: Tensor) -> Tensor:
    if a.ndim != 2:
        raise ShapeError(f"transpose needs a rank-2 tensor, got {a.shape}")
    return Tensor.from_op(
        np.ascontiguousarray(a.data.T), (a,), lambda grad: (grad.T,), "transpose"
    )


def softmax_rows(x: Tensor) -> Tensor:
    """Row-wise softmax over the last axis, stabilized by subtracting each row's max."""
    if x.ndim not in (1, 2):
        raise ShapeError(f"softmax_rows needs rank 1 or 2, got {x.shape}")
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    out = exp / exp.sum(axis=-1, keepdims=True)

    def _backward(grad: np.ndarray):
        inner = (grad * out).sum(axis=-1, keepdims=True)
        return (out * (grad - inner),)

    return Tensor.from_op(out, (x,), _backward, "softmax_rows")


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """``x @ w`` plus an optional bias row ``b`` added to every row."""
    if x.ndim not in (1, 2) or w.ndim != 2:
        raise ShapeError(f"linear: unsupported ranks x{x.shape}, w{w.shape}")
    if x.shape[-1] != w.shape[0]:
        raise ShapeError(f"linear: input width {x.shape[-1]} does not match weight {w.shape}")
    if b is not None and b.shape != (w.shape[1],):
        raise ShapeError(f"linear: bias {b.shape} does not match output width {w.shape[1]}")

    x_data, w_data = x.data, w.data
    out = x_data @ w_data
    if b is not None:
        out = out + b.data

    def _backward(grad: np.ndarray):
        grad_x = grad @ w_data.T
        grad_w = np.outer(x_data, grad) if x_data.ndim == 1 else x_data.T @ grad
        if b is None:
            return grad_x, grad_w
        grad_b = grad if grad.ndim == 1 else grad.sum(axis=0)
        return grad_x, grad_w, grad_b

    parents = (x, w) if b is None else (x, w, b)
    return Tensor.from_op(out, parents, _backward, "linear")


def concat_features(parts: Sequence[Tensor]) -> Tensor:
    """Concatenate [L, d_i] blocks column-wise, in argument order."""
    if not parts:
        raise ArgumentError("concat_features needs at least one part")
    if len(parts) == 1:
        return parts[0]
    if any(p.ndim != 2 for p in parts):
        raise ShapeError(f"concat_features needs rank-2 parts, got {[p.shape for p in parts]}")
    rows = {p.shape[0] for p in parts}
    if len(rows) != 1:
        raise ShapeError(f"concat_features: row counts differ: {[p.shape for p in parts]}")

    bounds = np.cumsum([p.shape[1] for p in parts])[:-1]

    def _backward(grad: np.ndarray):
        return tuple(np.split(grad, bounds, axis=1))

    return Tensor.from_op(
        np.concatenate([p.data for p in parts], axis=1), tuple(parts), _backward, "concat"
    )


def slice_columns(x: Tensor, start: int, stop: int) -> Tensor:
    """Columns ``start:stop`` of a rank-2 tensor."""
    if x.ndim != 2 or not 0 <= start < stop <= x.shape[1]:
        raise ShapeError(f"slice_columns: [{start}:{stop}] out of range for {x.shape}")

    def _backward(grad: np.ndarray):
        full = np.zeros_like(x.data)
        full[:, start:stop] = grad
        return (full,)

    return Tensor.from_op(x.data[:, start:stop].copy(), (x,), _backward, "slice_columns")


def add(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("add", a, b)
    return Tensor.from_op(a.data + b.data, (a, b), lambda grad: (grad, grad), "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("sub", a, b)
    return Tensor.from_op(a.data - b.data, (a, b), lambda grad: (grad, -grad), "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("mul", a, b)
    a_data, b_data = a.data, b.data
    return Tensor.from_op(
        a_data * b_data, (a, b), lambda grad: (grad * b_data, grad * a_data), "mul"
    )


def scale(a: Tensor, factor: float) -> Tensor:
    factor = a.dtype.type(factor)
    return Tensor.from_op(a.data * factor, (a,), lambda grad: (grad * factor,), "scale")


def mean_rows(x: Tensor) -> Tensor:
    """Average over rows: [L, D] -> [D]."""
    if x.ndim != 2:
        raise ShapeError(f"mean_rows needs a rank-2 tensor, got {x.shape}")
    rows = x.shape[0]

    def _backward(grad: np.ndarray):
        return (np.broadcast_to(grad / rows, x.shape).copy(),)

    return Tensor.from_op(x.data.mean(axis=0), (x,), _backward, "mean_rows")


def sum_all(x: Tensor) -> Tensor:
    """Sum of every element as a one-element tensor."""

    def _backward(grad: np.ndarray):
        return (np.full_like(x.data, grad.reshape(-1)[0]),)

    return Tensor.from_op(np.asarray([x.data.sum()], dtype=x.dtype), (x,), _backward, "sum")


_ELEMENTWISE = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "scale": scale,
    "mean_rows": mean_rows,
}


def elementwise(op: str, *operands) -> Tensor:
    """Dispatch ``add``/``sub``/``mul``/``scale``/``mean_rows`` by name."""
    try:
        fn = _ELEMENTWISE[op]
    except KeyError:
        raise ArgumentError(f"Unknown elementwise op {op!r}; expected one of {sorted(_ELEMENTWISE)}") from None
    return fn(*operands)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = LAYER_NORM_EPS) -> Tensor:
    """Per-row normalization to zero mean and unit variance, then ``gain * x + bias``."""
    if x.ndim != 2:
        raise ShapeError(f"layer_norm needs a rank-2 tensor, got {x.shape}")
    width = x.shape[1]
    if width < 2:
        raise ShapeError(f"layer_norm needs at least 2 features, got {width}")
    if gain.shape != (width,) or bias.shape != (width,):
        raise ShapeError(f"layer_norm: gain {gain.shape}/bias {bias.shape} do not match width {width}")

    centered = x.data - x.data.mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt((centered**2).mean(axis=1, keepdims=True) + eps)
    normed = centered * inv_std
    gain_data = gain.data

    def _backward(grad: np.ndarray):
        grad_normed = grad * gain_data
        grad_x = (inv_std / width) * (
            width * grad_normed
            - grad_normed.sum(axis=1, keepdims=True)
            - normed * (grad_normed * normed).sum(axis=1, keepdims=True)
        )
        return grad_x, (grad * normed).sum(axis=0), grad.sum(axis=0)

    return Tensor.from_op(normed * gain_data + bias.data, (x, gain, bias), _backward, "layer_norm")


def gelu(x: Tensor) -> Tensor:
    """GELU, tanh approximation."""
    data = x.data
    inner = _GELU_C * (data + _GELU_A * data**3)
    tanh = np.tanh(inner)
    out = 0.5 * data * (1.0 + tanh)

    def _backward(grad: np.ndarray):
        d_inner = _GELU_C * (1.0 + 3.0 * _GELU_A * data**2)
        local = 0.5 * (1.0 + tanh) + 0.5 * data * (1.0 - tanh**2) * d_inner
        return (grad * local,)

    return Tensor.from_op(out.astype(x.dtype, copy=False), (x,), _backward, "gelu")
