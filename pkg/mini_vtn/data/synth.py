"""Synthetic multi-stream gesture sequences.

Each class owns a temporal template: ``latent_dim`` sinusoids whose frequency grows with the
class index and whose phases are drawn once per class. Every stream projects that template to
``frame_dim`` features through its own seeded Gaussian map, then adds noise. A fraction
``cross_stream_correlation`` of the noise variance is shared by all streams of a sample, the
rest is drawn per stream.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from ..config import SynthConfig
from ..exceptions import ConfigurationError, ShapeError
from ..fusion import late_fuse
from ..schema import ClassPosterior, stream_tag
from ..tensor import Tensor

logger = logging.getLogger(__name__)


@dataclass
class GestureSample:
    """One recording: a [T, F] frame-feature matrix per stream, plus its class."""

    streams: dict[str, Tensor]
    label: int

    def __post_init__(self):
        lengths = {tensor.shape[0] for tensor in self.streams.values()}
        if len(lengths) > 1:
            raise ShapeError(f"Streams disagree on sequence length: { {k: v.shape for k, v in self.streams.items()} }")

    @property
    def sequence_length(self) -> int:
        return next(iter(self.streams.values())).shape[0]


@dataclass
class SyntheticDataset:
    train: list[GestureSample]
    test: list[GestureSample]
    templates: dict[str, np.ndarray]  # stream tag -> [C, T, F]
    config: SynthConfig = field(repr=False)

    @property
    def stream_tags(self) -> list[str]:
        return list(self.templates)


def class_latents(config: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """[C, T, K] sinusoid channels; class c oscillates at (c + 1) / 2 cycles per sequence."""
    t = np.arange(config.sequence_length, dtype=np.float64) / config.sequence_length
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(config.class_count, config.latent_dim))
    harmonics = 1.0 + 0.5 * np.arange(config.latent_dim)
    latents = np.empty((config.class_count, config.sequence_length, config.latent_dim))
    for c in range(config.class_count):
        frequency = 0.5 * (c + 1) * harmonics
        latents[c] = np.sin(2.0 * np.pi * t[:, None] * frequency[None, :] + phases[c][None, :])
    return latents


def _draw_split(
    size: int,
    config: SynthConfig,
    templates: dict[str, np.ndarray],
    rng: np.random.Generator,
) -> list[GestureSample]:
    labels = rng.permutation(np.arange(size) % config.class_count)
    rho = config.cross_stream_correlation
    shape = (config.sequence_length, config.frame_dim)
    samples = []
    for label in labels:
        # Unit draws scaled afterwards, so only sigma changes between noise levels
        shared = rng.standard_normal(shape)
        streams = {}
        for tag, template in templates.items():
            own = rng.standard_normal(shape)
            noise = np.sqrt(rho) * shared + np.sqrt(1.0 - rho) * own
            frames = template[label] + config.noise_sigma * noise
            streams[tag] = Tensor(frames.astype(np.float32))
        samples.append(GestureSample(streams=streams, label=int(label)))
    return samples


def generate_dataset(config: SynthConfig) -> SyntheticDataset:
    """Deterministic train/test split for ``config`` (a pure function of it, seed included)."""
    if not isinstance(config, SynthConfig):
        raise ConfigurationError(f"Expected SynthConfig, got {type(config).__name__}")
    rng = np.random.default_rng(config.seed)
    latents = class_latents(config, rng)
    scale = 1.0 / np.sqrt(config.latent_dim)
    templates = {}
    for i in range(config.stream_count):
        projection = rng.normal(0.0, scale, size=(config.latent_dim, config.frame_dim))
        templates[stream_tag(i)] = latents @ projection
    train = _draw_split(config.train_size, config, templates, rng)
    test = _draw_split(config.test_size, config, templates, rng)
    logger.info(
        "Generated %d train / %d test samples, %d stream(s), sigma=%.3f, rho=%.3f",
        len(train),
        len(test),
        config.stream_count,
        config.noise_sigma,
        config.cross_stream_correlation,
    )
    return SyntheticDataset(train=train, test=test, templates=templates, config=config)


def template_posterior(
    sample: GestureSample, templates: np.ndarray, stream: str, noise_sigma: float
) -> ClassPosterior:
    """Posterior of the Gaussian nearest-template oracle for one stream.

    With ``noise_sigma == 0`` it is one-hot on the nearest template.
    """
    frames = sample.streams[stream].data.astype(np.float64)
    distances = ((templates - frames[None]) ** 2).reshape(templates.shape[0], -1).sum(axis=1)
    if noise_sigma == 0:
        probs = np.zeros(len(distances))
        probs[int(np.argmin(distances))] = 1.0
    else:
        logits = -distances / (2.0 * noise_sigma**2)
        probs = np.exp(logits - logits.max())
        probs /= probs.sum()
    return ClassPosterior(stream_id=stream, probs=probs.tolist())


def oracle_accuracy(
    samples: Sequence[GestureSample],
    templates: dict[str, np.ndarray],
    streams: Sequence[str],
    noise_sigma: float,
) -> float:
    """Accuracy of the nearest-template oracle, late-fused over ``streams``."""
    if not samples:
        return 0.0
    correct = 0
    for sample in samples:
        posteriors = [template_posterior(sample, templates[s], s, noise_sigma) for s in streams]
        correct += int(late_fuse(posteriors).label == sample.label)
    return correct / len(samples)
