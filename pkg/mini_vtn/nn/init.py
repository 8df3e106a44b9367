"""Parameter initializers."""

import numpy as np

from ..tensor import Tensor


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, dtype: np.dtype) -> Tensor:
    """Uniform in +-sqrt(6 / (fan_in + fan_out)), shape [fan_in, fan_out]."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    values = rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)
    return Tensor(values, requires_grad=True)


def constant(value: float, width: int, dtype: np.dtype) -> Tensor:
    return Tensor(np.full(width, value, dtype=dtype), requires_grad=True)
