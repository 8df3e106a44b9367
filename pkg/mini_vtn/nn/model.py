"""Video transformer classifier built from MsMHA encoder stages.

frames [T, F] -> linear embedding [T, D] -> + sinusoidal position table
-> S pre-norm encoder stages -> mean over T -> linear [D, C] -> softmax.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..config import ModelConfig
from ..exceptions import ConfigurationError, ShapeError
from ..schema import ClassPosterior
from ..tensor import Tensor, add, gelu, layer_norm, linear, mean_rows, resolve_dtype, softmax_rows
from .attention import HeadSchedule, MsMhaParams, msmha, schedule_for
from .init import constant, glorot_uniform

logger = logging.getLogger(__name__)

PE_BASE = 10000.0


@dataclass
class EncoderStageParams:
    """One pre-norm block: MsMHA sublayer and a GELU feed-forward sublayer."""

    attention: MsMhaParams
    ln1_gain: Tensor
    ln1_bias: Tensor
    ln2_gain: Tensor
    ln2_bias: Tensor
    ffn_w1: Tensor
    ffn_b1: Tensor
    ffn_w2: Tensor
    ffn_b2: Tensor

    @classmethod
    def init(
        cls, schedule: HeadSchedule, ffn_dim: int, rng: np.random.Generator, dtype: np.dtype
    ) -> "EncoderStageParams":
        width = schedule.feature_width
        return cls(
            attention=MsMhaParams.init(schedule, rng, dtype),
            ln1_gain=constant(1.0, width, dtype),
            ln1_bias=constant(0.0, width, dtype),
            ln2_gain=constant(1.0, width, dtype),
            ln2_bias=constant(0.0, width, dtype),
            ffn_w1=glorot_uniform(rng, width, ffn_dim, dtype),
            ffn_b1=constant(0.0, ffn_dim, dtype),
            ffn_w2=glorot_uniform(rng, ffn_dim, width, dtype),
            ffn_b2=constant(0.0, width, dtype),
        )

    def named_tensors(self, prefix: str = "") -> list[tuple[str, Tensor]]:
        return self.attention.named_tensors(f"{prefix}attn.") + [
            (f"{prefix}ln1.gain", self.ln1_gain),
            (f"{prefix}ln1.bias", self.ln1_bias),
            (f"{prefix}ln2.gain", self.ln2_gain),
            (f"{prefix}ln2.bias", self.ln2_bias),
            (f"{prefix}ffn.w1", self.ffn_w1),
            (f"{prefix}ffn.b1", self.ffn_b1),
            (f"{prefix}ffn.w2", self.ffn_w2),
            (f"{prefix}ffn.b2", self.ffn_b2),
        ]


@dataclass
class ModelParams:
    """Every trainable tensor of the classifier. Stages do not share weights."""

    embed_weight: Tensor
    embed_bias: Tensor
    stages: list[EncoderStageParams]
    readout_weight: Tensor
    readout_bias: Tensor

    @classmethod
    def init(cls, config: ModelConfig, seed: int = 0) -> "ModelParams":
        dtype = resolve_dtype(config.precision)
        rng = np.random.default_rng(seed)
        schedule = schedule_for(config.attention, config.feature_width, config.head_count)
        width = config.feature_width
        return cls(
            embed_weight=glorot_uniform(rng, config.input_frame_dim, width, dtype),
            embed_bias=constant(0.0, width, dtype),
            stages=[
                EncoderStageParams.init(schedule, config.ffn_dim, rng, dtype)
                for _ in range(config.stage_count)
            ],
            readout_weight=glorot_uniform(rng, width, config.class_count, dtype),
            readout_bias=constant(0.0, config.class_count, dtype),
        )

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        """Stable, ordered (name, tensor) pairs; the checkpoint and optimizer key on this order."""
        named = [("embed.weight", self.embed_weight), ("embed.bias", self.embed_bias)]
        for s, stage in enumerate(self.stages):
            named.extend(stage.named_tensors(f"stages.{s}."))
        named.extend([("readout.weight", self.readout_weight), ("readout.bias", self.readout_bias)])
        return named

    def parameters(self) -> list[Tensor]:
        return [tensor for _, tensor in self.named_parameters()]

    def numel(self) -> int:
        return sum(tensor.numel for tensor in self.parameters())


def embed_frames(frames: Tensor, w_e: Tensor, b_e: Tensor) -> Tensor:
    """Per-frame linear embedding [T, F] -> [T, D]."""
    if frames.ndim != 2:
        raise ShapeError(f"frames must be [T, F], got {frames.shape}")
    return linear(frames, w_e, b_e)


@lru_cache(maxsize=32)
def _sinusoid_table(length: int, width: int) -> np.ndarray:
    positions = np.arange(length, dtype=np.float64)[:, None]
    rates = PE_BASE ** (np.arange(0, width, 2, dtype=np.float64) / width)
    table = np.empty((length, width), dtype=np.float64)
    table[:, 0::2] = np.sin(positions / rates)
    table[:, 1::2] = np.cos(positions / rates)
    table.flags.writeable = False
    return table


def positional_encoding(length: int, width: int, dtype=None) -> Tensor:
    """Fixed table PE[t, 2i] = sin(t / 10000^(2i/D)), PE[t, 2i+1] = cos(same).

    Raises:
        ConfigurationError: odd ``width``
    """
    if width % 2:
        raise ConfigurationError(f"positional encoding needs an even width, got {width}")
    if length < 1:
        raise ConfigurationError(f"positional encoding needs length >= 1, got {length}")
    return Tensor(_sinusoid_table(length, width).astype(resolve_dtype(dtype)))


def encoder_stage(
    x: Tensor,
    p: EncoderStageParams,
    schedule: HeadSchedule,
    temperature_dims: Sequence[int] | None = None,
) -> Tensor:
    """x' = x + msmha(LN(x)); out = x' + W2 gelu(W1 LN(x') + b1) + b2."""
    if x.ndim != 2 or x.shape[1] != schedule.feature_width:
        raise ShapeError(f"stage input {x.shape} does not match width {schedule.feature_width}")
    attended = msmha(layer_norm(x, p.ln1_gain, p.ln1_bias), p.attention, schedule, temperature_dims)
    x = add(x, attended)
    hidden = gelu(linear(layer_norm(x, p.ln2_gain, p.ln2_bias), p.ffn_w1, p.ffn_b1))
    return add(x, linear(hidden, p.ffn_w2, p.ffn_b2))


def classify(
    frames: Tensor,
    params: ModelParams,
    config: ModelConfig,
    temperature_dims: Sequence[int] | None = None,
) -> Tensor:
    """Class probabilities [C] for one stream of frame features [T, F].

    ``temperature_dims`` overrides the per-head softmax temperature widths (see ``msmha``).
    """
    expected = (config.sequence_length, config.input_frame_dim)
    if frames.shape != expected:
        raise ShapeError(f"frames {frames.shape} do not match model input {expected}")
    if len(params.stages) != config.stage_count:
        raise ConfigurationError(f"{len(params.stages)} stage parameter sets for {config.stage_count} stages")
    dtype = resolve_dtype(config.precision)
    if frames.dtype != dtype:
        frames = frames.astype(dtype)

    schedule = schedule_for(config.attention, config.feature_width, config.head_count)
    tokens = embed_frames(frames, params.embed_weight, params.embed_bias)
    if config.positional_encoding:
        tokens = add(tokens, positional_encoding(config.sequence_length, config.feature_width, dtype))
    for stage in params.stages:
        tokens = encoder_stage(tokens, stage, schedule, temperature_dims)
    logits = linear(mean_rows(tokens), params.readout_weight, params.readout_bias)
    return softmax_rows(logits)


class VideoTransformer:
    """A configured classifier plus its parameters."""

    def __init__(self, config: ModelConfig, params: ModelParams | None = None, seed: int = 0):
        self.config = config
        self.params = params if params is not None else ModelParams.init(config, seed)
        logger.debug(
            "VideoTransformer: %s attention, D=%d, h=%d, S=%d, %d parameters",
            config.attention,
            config.feature_width,
            config.head_count,
            config.stage_count,
            self.params.numel(),
        )

    def classify(self, frames: Tensor, temperature_dims: Sequence[int] | None = None) -> Tensor:
        return classify(frames, self.params, self.config, temperature_dims)

    def predict(self, frames: Tensor, stream_id: str) -> ClassPosterior:
        probs = self.classify(frames).data
        return ClassPosterior(stream_id=stream_id, probs=[float(p) for p in probs])

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        return self.params.named_parameters()

    def parameters(self) -> list[Tensor]:
        return self.params.parameters()
