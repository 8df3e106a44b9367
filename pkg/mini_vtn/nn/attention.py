"""Scaled dot-product attention, uniform multi-head attention and multiscaled multi-head
attention (MsMHA).

In MsMHA head j projects the [L, D] input to width D / 2^(j-1): the first head works at the
full feature width and every further head at half the width of the one before it. Head
outputs are concatenated (width sum(d_j)) and mapped back to D by W^O, so a stage always
returns [L, D].
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ..exceptions import ConfigurationError, ShapeError
from ..tensor import Tensor, concat_features, linear, matmul, scale, softmax_rows, transpose
from .init import glorot_uniform


ScheduleMode = Literal["pyramid", "uniform"]


@dataclass(frozen=True)
class HeadSchedule:
    """Ordered per-head attention widths for one feature width."""

    feature_width: int
    dims: tuple[int, ...]
    mode: ScheduleMode = "pyramid"

    def __post_init__(self):
        if not self.dims:
            raise ConfigurationError("A head schedule needs at least one head")
        if any(int(d) != d or d < 1 for d in self.dims):
            raise ConfigurationError(f"Head widths must be positive integers, got {list(self.dims)}")
        if self.mode == "pyramid":
            if self.dims[0] != self.feature_width:
                raise ConfigurationError(
                    f"Pyramid schedule must start at the feature width {self.feature_width}, got {self.dims[0]}"
                )
            for prev, cur in zip(self.dims, self.dims[1:]):
                if cur * 2 != prev:
                    raise ConfigurationError(f"Pyramid widths must halve head to head, got {list(self.dims)}")
        elif self.mode == "uniform":
            if len(set(self.dims)) != 1 or sum(self.dims) != self.feature_width:
                raise ConfigurationError(
                    f"Uniform schedule must split {self.feature_width} evenly, got {list(self.dims)}"
                )
        else:
            raise ConfigurationError(f"Unknown schedule mode {self.mode!r}")

    @property
    def head_count(self) -> int:
        return len(self.dims)

    @property
    def total_width(self) -> int:
        """Width of the concatenated heads, sum(d_j)."""
        return sum(self.dims)


def head_schedule(feature_width: int, head_count: int) -> HeadSchedule:
    """Pyramid schedule [D, D/2, ..., D/2^(h-1)].

    Raises:
        ConfigurationError: ``head_count < 1`` or D is not divisible by 2^(h-1)
    """
    if head_count < 1:
        raise ConfigurationError(f"head_count must be >= 1, got {head_count}")
    divisor = 2 ** (head_count - 1)
    if feature_width < 1 or feature_width % divisor:
        raise ConfigurationError(
            f"feature_width {feature_width} must be divisible by {divisor} (2^(h-1)) for {head_count} pyramid heads"
        )
    dims = tuple(feature_width >> j for j in range(head_count))
    return HeadSchedule(feature_width, dims, "pyramid")


def uniform_schedule(feature_width: int, head_count: int) -> HeadSchedule:
    """Conventional equal split: every head gets D / h."""
    if head_count < 1:
        raise ConfigurationError(f"head_count must be >= 1, got {head_count}")
    if feature_width < 1 or feature_width % head_count:
        raise ConfigurationError(f"feature_width {feature_width} must be divisible by head_count {head_count}")
    return HeadSchedule(feature_width, (feature_width // head_count,) * head_count, "uniform")


def schedule_for(mode: ScheduleMode, feature_width: int, head_count: int) -> HeadSchedule:
    if mode == "pyramid":
        return head_schedule(feature_width, head_count)
    return uniform_schedule(feature_width, head_count)


@dataclass
class MsMhaParams:
    """Per-head Q/K/V projections [D, d_j] and the output map [sum(d_j), D]."""

    w_q: list[Tensor]
    w_k: list[Tensor]
    w_v: list[Tensor]
    w_o: Tensor
    dims: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if not (len(self.w_q) == len(self.w_k) == len(self.w_v)) or not self.w_q:
            raise ConfigurationError(
                f"Head count mismatch: {len(self.w_q)} Q, {len(self.w_k)} K, {len(self.w_v)} V projections"
            )
        width = self.w_q[0].shape[0]
        for name, group in (("w_q", self.w_q), ("w_k", self.w_k), ("w_v", self.w_v)):
            for j, (w, ref) in enumerate(zip(group, self.w_q)):
                if w.ndim != 2 or w.shape != ref.shape or w.shape[0] != width:
                    raise ConfigurationError(f"{name}[{j}] has shape {w.shape}, expected {ref.shape}")
        self.dims = tuple(w.shape[1] for w in self.w_q)
        if self.w_o.shape != (sum(self.dims), width):
            raise ConfigurationError(f"w_o has shape {self.w_o.shape}, expected {(sum(self.dims), width)}")

    @classmethod
    def init(cls, schedule: HeadSchedule, rng: np.random.Generator, dtype: np.dtype) -> "MsMhaParams":
        width = schedule.feature_width
        w_q, w_k, w_v = [], [], []
        for d in schedule.dims:
            w_q.append(glorot_uniform(rng, width, d, dtype))
            w_k.append(glorot_uniform(rng, width, d, dtype))
            w_v.append(glorot_uniform(rng, width, d, dtype))
        return cls(w_q, w_k, w_v, glorot_uniform(rng, schedule.total_width, width, dtype))

    @property
    def feature_width(self) -> int:
        return self.w_o.shape[1]

    def named_tensors(self, prefix: str = "") -> list[tuple[str, Tensor]]:
        named: list[tuple[str, Tensor]] = []
        for j in range(len(self.dims)):
            named.append((f"{prefix}w_q.{j}", self.w_q[j]))
            named.append((f"{prefix}w_k.{j}", self.w_k[j]))
            named.append((f"{prefix}w_v.{j}", self.w_v[j]))
        named.append((f"{prefix}w_o", self.w_o))
        return named

    def matches(self, schedule: HeadSchedule) -> bool:
        return self.dims == schedule.dims and self.feature_width == schedule.feature_width


def scaled_dot_attention(q: Tensor, k: Tensor, v: Tensor, temperature_dim: int | None = None) -> Tensor:
    """softmax(Q K^T / sqrt(d)) V, with d the key width unless ``temperature_dim`` is given."""
    if q.ndim != 2 or k.ndim != 2 or v.ndim != 2:
        raise ShapeError(f"attention needs rank-2 Q/K/V, got {q.shape}, {k.shape}, {v.shape}")
    if q.shape[1] != k.shape[1]:
        raise ShapeError(f"Q width {q.shape[1]} does not match K width {k.shape[1]}")
    if k.shape[0] != v.shape[0]:
        raise ShapeError(f"K rows {k.shape[0]} do not match V rows {v.shape[0]}")
    d = temperature_dim or k.shape[1]
    scores = scale(matmul(q, transpose(k)), 1.0 / np.sqrt(d))
    return matmul(softmax_rows(scores), v)


def _attend(x: Tensor, params: MsMhaParams, temperature_dims: Sequence[int] | None) -> Tensor:
    if x.ndim != 2 or x.shape[1] != params.feature_width:
        raise ConfigurationError(f"Input {x.shape} does not match attention width {params.feature_width}")
    temperatures = temperature_dims or params.dims
    heads = [
        scaled_dot_attention(
            linear(x, params.w_q[j]),
            linear(x, params.w_k[j]),
            linear(x, params.w_v[j]),
            temperature_dim=temperatures[j],
        )
        for j in range(len(params.dims))
    ]
    return matmul(concat_features(heads), params.w_o)


def multi_head_attention(x: Tensor, params: MsMhaParams) -> Tensor:
    """Conventional multi-head attention; every head must have width D / h.

    Raises:
        ConfigurationError: the projection widths are not a uniform split of D
    """
    width, heads = params.feature_width, len(params.dims)
    if width % heads or any(d != width // heads for d in params.dims):
        raise ConfigurationError(
            f"multi_head_attention needs uniform heads of {width}/{heads}, got {list(params.dims)}"
        )
    return _attend(x, params, None)


def msmha(
    x: Tensor,
    params: MsMhaParams,
    schedule: HeadSchedule,
    temperature_dims: Sequence[int] | None = None,
) -> Tensor:
    """Multiscaled multi-head attention over ``x`` [L, D]; returns [L, D].

    Each head is scaled by the square root of its own width. ``temperature_dims`` replaces
    those widths in the softmax temperature only; the gradient-check negative control uses it.

    Raises:
        ConfigurationError: ``params`` or ``x`` do not match ``schedule``
    """
    if not params.matches(schedule):
        raise ConfigurationError(
            f"Parameters with head widths {list(params.dims)} (D={params.feature_width}) "
            f"do not match schedule {list(schedule.dims)} (D={schedule.feature_width})"
        )
    if temperature_dims is not None and len(temperature_dims) != schedule.head_count:
        raise ConfigurationError(f"Need {schedule.head_count} temperature widths, got {len(temperature_dims)}")
    return _attend(x, params, temperature_dims)


def attention_param_count(schedule: HeadSchedule, include_bias: bool = False) -> int:
    """3 * D * sum(d_j) projection weights plus sum(d_j) * D output weights."""
    width, total = schedule.feature_width, schedule.total_width
    count = 4 * width * total
    if include_bias:
        count += 3 * total + width
    return count


def msmha_param_count(feature_width: int, head_count: int, include_bias: bool = False) -> int:
    return attention_param_count(head_schedule(feature_width, head_count), include_bias)


def uniform_param_count(feature_width: int, head_count: int, include_bias: bool = False) -> int:
    return attention_param_count(uniform_schedule(feature_width, head_count), include_bias)


def attention_macs(schedule: HeadSchedule, length: int) -> int:
    """Multiply-accumulates of one forward pass over ``length`` tokens.

    Projections 3*L*D*sum(d), scores and weighted values 2*L^2*sum(d), output L*sum(d)*D.
    """
    width, total = schedule.feature_width, schedule.total_width
    return 3 * length * width * total + 2 * length * length * total + length * total * width
