"""Decision-level late fusion.

The fused label is the argmax over classes of the summed per-stream posteriors,
lowest class index on ties. Streams carry equal weight.
"""

import logging
import math
from collections.abc import Mapping, Sequence
from itertools import combinations

from .exceptions import ArgumentError, DataValidationError, ShapeError
from .schema import ClassPosterior, FusionResult, SubsetAccuracy

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-4


def check_normalized(posterior: ClassPosterior, tolerance: float = NORMALIZATION_TOLERANCE) -> None:
    """Raise DataValidationError unless ``posterior`` is a probability vector."""
    if any(p < 0 or not math.isfinite(p) for p in posterior.probs):
        raise DataValidationError(f"Stream {posterior.stream_id!r} has negative or non-finite probabilities")
    total = math.fsum(posterior.probs)
    if abs(total - 1.0) > tolerance:
        raise DataValidationError(f"Stream {posterior.stream_id!r} sums to {total:.6f}, not 1")


def late_fuse(posteriors: Sequence[ClassPosterior], validate: bool = True) -> FusionResult:
    """Sum the stream posteriors and take the argmax.

    Sums are exactly rounded, so the result does not depend on stream order.

    Args:
        posteriors: One posterior per stream, all over the same classes
        validate: Check every input is normalized; only tests turn this off

    Raises:
        ArgumentError: no posteriors
        ShapeError: class counts differ
        DataValidationError: an input is not a probability vector
    """
    if not posteriors:
        raise ArgumentError("late_fuse needs at least one posterior")
    class_count = posteriors[0].class_count
    for posterior in posteriors:
        if posterior.class_count != class_count:
            raise ShapeError(
                f"Stream {posterior.stream_id!r} has {posterior.class_count} classes, expected {class_count}"
            )
        if validate:
            check_normalized(posterior)

    score_sum = [math.fsum(p.probs[j] for p in posteriors) for j in range(class_count)]
    best = max(score_sum)
    return FusionResult(label=score_sum.index(best), score_sum=score_sum, per_stream=list(posteriors))


def _check_aligned(streams: Mapping[str, Sequence[ClassPosterior]], labels: Sequence[int]) -> None:
    if not streams:
        raise ArgumentError("Need at least one stream")
    for name, posteriors in streams.items():
        if len(posteriors) != len(labels):
            raise DataValidationError(f"Stream {name!r} has {len(posteriors)} samples, expected {len(labels)}")


def fused_predictions(streams: Mapping[str, Sequence[ClassPosterior]], labels: Sequence[int]) -> list[int]:
    """Per-sample fused labels across all ``streams``."""
    _check_aligned(streams, labels)
    per_sample = zip(*streams.values())
    return [late_fuse(list(sample)).label for sample in per_sample]


def accuracy(labels: Sequence[int], predictions: Sequence[int]) -> float:
    if len(labels) != len(predictions):
        raise DataValidationError(f"{len(labels)} labels vs {len(predictions)} predictions")
    if not labels:
        return 0.0
    return sum(int(a == b) for a, b in zip(labels, predictions)) / len(labels)


def subset_sweep(
    streams: Mapping[str, Sequence[ClassPosterior]], labels: Sequence[int]
) -> list[SubsetAccuracy]:
    """Fused accuracy for every non-empty subset of streams, smallest subsets first."""
    _check_aligned(streams, labels)
    names = list(streams)
    results = []
    for size in range(1, len(names) + 1):
        for subset in combinations(names, size):
            predictions = fused_predictions({name: streams[name] for name in subset}, labels)
            results.append(SubsetAccuracy(streams=subset, accuracy=accuracy(labels, predictions)))
    logger.debug("Evaluated %d stream subsets", len(results))
    return results


def best_per_size(results: Sequence[SubsetAccuracy]) -> dict[int, SubsetAccuracy]:
    """Highest-accuracy subset for each subset size (first one wins ties)."""
    best: dict[int, SubsetAccuracy] = {}
    for result in results:
        current = best.get(result.size)
        if current is None or result.accuracy > current.accuracy:
            best[result.size] = result
    return best
