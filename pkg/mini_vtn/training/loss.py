"""Classification loss."""

import numpy as np

from ..exceptions import ArgumentError, ShapeError
from ..tensor import Tensor

PROB_FLOOR = 1e-12


def cross_entropy(posterior: Tensor, label: int) -> Tensor:
    """-ln(max(posterior[label], 1e-12)) as a one-element tensor.

    Raises:
        ShapeError: ``posterior`` is not a vector
        ArgumentError: ``label`` outside [0, C)
    """
    if posterior.ndim != 1:
        raise ShapeError(f"cross_entropy needs a probability vector, got {posterior.shape}")
    class_count = posterior.shape[0]
    if not 0 <= label < class_count:
        raise ArgumentError(f"label {label} outside [0, {class_count})")

    prob = posterior.data[label]
    clamped = max(float(prob), PROB_FLOOR)

    def _backward(grad: np.ndarray):
        grad_posterior = np.zeros_like(posterior.data)
        if prob > PROB_FLOOR:
            grad_posterior[label] = -grad.reshape(-1)[0] / prob
        return (grad_posterior,)

    loss = np.asarray([-np.log(clamped)], dtype=posterior.dtype)
    return Tensor.from_op(loss, (posterior,), _backward, "cross_entropy")
