"""Synthetic gesture data, the MSGV container and model checkpoints."""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .dataset_io import (
    POSTERIOR_TAG,
    GestureDataset,
    read_dataset,
    read_posteriors,
    write_dataset,
    write_posteriors,
)
from .synth import GestureSample, SyntheticDataset, generate_dataset, oracle_accuracy, template_posterior

__all__ = [
    "POSTERIOR_TAG",
    "Checkpoint",
    "GestureDataset",
    "GestureSample",
    "SyntheticDataset",
    "generate_dataset",
    "load_checkpoint",
    "oracle_accuracy",
    "read_dataset",
    "read_posteriors",
    "save_checkpoint",
    "template_posterior",
    "write_dataset",
    "write_posteriors",
]
