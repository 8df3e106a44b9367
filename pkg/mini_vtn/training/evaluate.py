"""Unimodal evaluation: per-sample posteriors and accuracy for one stream."""

import logging
from pathlib import Path

from ..data import GestureDataset, load_checkpoint, read_dataset, write_posteriors
from ..exceptions import ConfigurationError
from ..fusion import accuracy
from ..nn import VideoTransformer
from ..schema import EvaluationResult

logger = logging.getLogger(__name__)


def resolve_stream(dataset: GestureDataset, requested: str | None) -> str:
    """``requested`` if given, else the only/first stream of ``dataset``."""
    if requested is None:
        return dataset.stream_tags[0]
    if requested not in dataset.stream_dims:
        raise ConfigurationError(f"Stream {requested!r} not in dataset streams {dataset.stream_tags}")
    return requested


def check_compatible(model: VideoTransformer, dataset: GestureDataset, stream: str) -> None:
    """Raise ConfigurationError if ``dataset`` cannot feed ``model`` on ``stream``."""
    config = model.config
    problems = []
    if dataset.sequence_length != config.sequence_length:
        problems.append(f"T={dataset.sequence_length} vs model {config.sequence_length}")
    if dataset.stream_dims[stream] != config.input_frame_dim:
        problems.append(f"F={dataset.stream_dims[stream]} vs model {config.input_frame_dim}")
    if dataset.class_count != config.class_count:
        problems.append(f"C={dataset.class_count} vs model {config.class_count}")
    if problems:
        raise ConfigurationError(f"Dataset stream {stream!r} does not fit the model: " + ", ".join(problems))


def evaluate_samples(model: VideoTransformer, dataset: GestureDataset, stream: str) -> EvaluationResult:
    """Posterior and argmax prediction for every sample, in dataset order."""
    check_compatible(model, dataset, stream)
    posteriors = [model.predict(sample.streams[stream], stream) for sample in dataset.samples]
    labels = dataset.labels
    return EvaluationResult(
        stream_id=stream,
        accuracy=accuracy(labels, [p.label for p in posteriors]),
        labels=labels,
        posteriors=posteriors,
    )


def evaluate(
    checkpoint_path: str | Path,
    dataset_path: str | Path,
    out_path: str | Path | None = None,
    stream: str | None = None,
) -> EvaluationResult:
    """Evaluate a checkpoint on a dataset file and optionally write the posterior file.

    The stream defaults to the one recorded in the checkpoint when the dataset has it.

    Raises:
        ConfigurationError: checkpoint and dataset dimensions disagree
    """
    checkpoint = load_checkpoint(checkpoint_path)
    dataset = read_dataset(dataset_path)
    if stream is None and checkpoint.meta.get("stream") in dataset.stream_dims:
        stream = checkpoint.meta["stream"]
    stream = resolve_stream(dataset, stream)

    model = VideoTransformer(checkpoint.config, checkpoint.params)
    result = evaluate_samples(model, dataset, stream)
    logger.info("Evaluated %s on %s [%s]: accuracy %.4f", checkpoint_path, dataset_path, stream, result.accuracy)

    if out_path is not None:
        write_posteriors(out_path, result.labels, result.posteriors)
    return result
