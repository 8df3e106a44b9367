"""Central finite differences, the oracle the autodiff engine is checked against."""

from __future__ import annotations

from collections.abc import Callable, Iterable

import numpy as np

from ..exceptions import ArgumentError
from .tensor import Tensor

DEFAULT_FD_EPS = 1e-5

ScalarFn = Callable[[Tensor], "Tensor | float"]


def _as_float(value: Tensor | float) -> float:
    return value.item() if isinstance(value, Tensor) else float(value)


def finite_diff_entries(
    f: ScalarFn,
    x: Tensor,
    indices: Iterable[tuple[int, ...]],
    eps: float = DEFAULT_FD_EPS,
) -> np.ndarray:
    """(f(x + eps*e_i) - f(x - eps*e_i)) / 2eps for each index i, in the given order.

    ``x`` is perturbed in place and restored before returning, so ``f`` may read it through a
    closure instead of its argument.
    """
    if eps <= 0:
        raise ArgumentError(f"eps must be positive, got {eps}")
    values = []
    for index in indices:
        original = x.data[index]
        try:
            x.data[index] = original + eps
            plus = _as_float(f(x))
            x.data[index] = original - eps
            minus = _as_float(f(x))
        finally:
            x.data[index] = original
        values.append((plus - minus) / (2.0 * eps))
    return np.asarray(values, dtype=np.float64)


def finite_diff_grad(f: ScalarFn, x: Tensor, eps: float = DEFAULT_FD_EPS) -> Tensor:
    """Finite-difference gradient of ``f`` at ``x`` for every element of ``x``."""
    grad = finite_diff_entries(f, x, np.ndindex(*x.shape), eps)
    return Tensor(grad.reshape(x.shape).astype(x.dtype))


def relative_error(a: np.ndarray | Tensor, b: np.ndarray | Tensor) -> float:
    """max |a - b| / max(1, |a|, |b|) taken elementwise."""
    a = a.data if isinstance(a, Tensor) else np.asarray(a)
    b = b.data if isinstance(b, Tensor) else np.asarray(b)
    denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0
