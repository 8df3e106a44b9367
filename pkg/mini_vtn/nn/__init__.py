"""Attention layers and the video transformer classifier."""

from .attention import (
    HeadSchedule,
    MsMhaParams,
    attention_macs,
    attention_param_count,
    head_schedule,
    msmha,
    msmha_param_count,
    multi_head_attention,
    scaled_dot_attention,
    schedule_for,
    uniform_param_count,
    uniform_schedule,
)
from .model import (
    EncoderStageParams,
    ModelParams,
    VideoTransformer,
    classify,
    embed_frames,
    encoder_stage,
    positional_encoding,
)

__all__ = [
    "EncoderStageParams",
    "HeadSchedule",
    "ModelParams",
    "MsMhaParams",
    "VideoTransformer",
    "attention_macs",
    "attention_param_count",
    "classify",
    "embed_frames",
    "encoder_stage",
    "head_schedule",
    "msmha",
    "msmha_param_count",
    "multi_head_attention",
    "positional_encoding",
    "scaled_dot_attention",
    "schedule_for",
    "uniform_param_count",
    "uniform_schedule",
]
