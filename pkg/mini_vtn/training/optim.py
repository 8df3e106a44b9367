"""Adam with bias correction, and the step-decay learning-rate schedule."""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from ..config import TrainConfig
from ..exceptions import ShapeError
from ..tensor import Tensor


@dataclass
class AdamState:
    """First/second moment estimates per parameter, plus the number of steps taken."""

    first_moments: list[np.ndarray]
    second_moments: list[np.ndarray]
    step: int = 0
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    shapes: list[tuple[int, ...]] = field(init=False)

    def __post_init__(self):
        self.shapes = [m.shape for m in self.first_moments]

    @classmethod
    def zeros_like(
        cls, params: Sequence[Tensor], betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8
    ) -> "AdamState":
        return cls(
            first_moments=[np.zeros_like(p.data) for p in params],
            second_moments=[np.zeros_like(p.data) for p in params],
            betas=betas,
            eps=eps,
        )


def adam_step(
    params: Sequence[Tensor],
    grads: Sequence[np.ndarray | Tensor],
    state: AdamState,
    lr: float,
) -> AdamState:
    """One Adam update, applied to ``params`` in place. Returns ``state`` (also updated in place).

    Raises:
        ShapeError: parameter, gradient and moment shapes disagree
    """
    if not len(params) == len(grads) == len(state.first_moments):
        raise ShapeError(f"{len(params)} params, {len(grads)} grads, {len(state.first_moments)} moments")
    grads = [g.data if isinstance(g, Tensor) else np.asarray(g) for g in grads]
    for i, (param, grad) in enumerate(zip(params, grads)):
        if param.shape != grad.shape or param.shape != state.shapes[i]:
            raise ShapeError(f"param {i}: shape {param.shape}, grad {grad.shape}, moment {state.shapes[i]}")

    beta1, beta2 = state.betas
    state.step += 1
    correction1 = 1.0 - beta1**state.step
    correction2 = 1.0 - beta2**state.step
    for param, grad, m, v in zip(params, grads, state.first_moments, state.second_moments):
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        param.data -= (lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(param.dtype, copy=False)
    return state


def lr_schedule(epoch: int, config: TrainConfig) -> float:
    """Base rate times decay_factor for every decay epoch already reached (1-based epochs)."""
    passed = sum(1 for decay_epoch in config.decay_epochs if decay_epoch <= epoch)
    return config.learning_rate * config.decay_factor**passed
