"""Schema definitions for Mini VTN."""

from .schema import (
    BenchRow,
    ClassPosterior,
    EpochMetrics,
    EvaluationResult,
    FusionResult,
    GradcheckReport,
    GradcheckRow,
    Modality,
    SubsetAccuracy,
    stream_tag,
)

__all__ = [
    "BenchRow",
    "ClassPosterior",
    "EpochMetrics",
    "EvaluationResult",
    "FusionResult",
    "GradcheckReport",
    "GradcheckRow",
    "Modality",
    "SubsetAccuracy",
    "stream_tag",
]
