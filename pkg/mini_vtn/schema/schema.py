from enum import Enum

from pydantic import BaseModel, Field


class Modality(str, Enum):
    """Named input streams of a gesture recording."""

    COLOR = "color"
    DEPTH = "depth"
    IR = "ir"
    NORMALS = "normals"
    FLOW = "flow"


def stream_tag(index: int) -> str:
    """Tag of the ``index``-th stream: the five modalities first, then ``synthetic-k``."""
    modalities = list(Modality)
    if index < len(modalities):
        return modalities[index].value
    return f"synthetic-{index - len(modalities)}"


class ClassPosterior(BaseModel):
    """Probability vector over gesture classes for one input stream."""

    stream_id: str
    probs: list[float]

    @property
    def class_count(self) -> int:
        return len(self.probs)

    @property
    def label(self) -> int:
        """Argmax class, lowest index on ties."""
        best = max(self.probs)
        return self.probs.index(best)


class FusionResult(BaseModel):
    """Decision-level fusion of several streams."""

    label: int
    score_sum: list[float]
    per_stream: list[ClassPosterior]


class SubsetAccuracy(BaseModel):
    """Fused accuracy of one combination of streams."""

    streams: tuple[str, ...]
    accuracy: float

    @property
    def size(self) -> int:
        return len(self.streams)


class EpochMetrics(BaseModel):
    """One row of the training curve."""

    epoch: int
    learning_rate: float
    train_loss: float
    train_accuracy: float
    test_accuracy: float | None = None
    seconds: float = 0.0


class EvaluationResult(BaseModel):
    """Accuracy of a classifier on a dataset, with its per-sample posteriors."""

    stream_id: str
    accuracy: float
    labels: list[int]
    posteriors: list[ClassPosterior] = Field(repr=False)


class GradcheckRow(BaseModel):
    """Worst backward-vs-finite-difference disagreement for one parameter group."""

    group: str
    numel: int
    max_relative_error: float
    passed: bool


class GradcheckReport(BaseModel):
    rows: list[GradcheckRow]
    seeds: int
    tolerance: float
    sabotaged: bool = False

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def max_relative_error(self) -> float:
        return max((row.max_relative_error for row in self.rows), default=0.0)


class BenchRow(BaseModel):
    """One CSV row of the attention cost benchmark."""

    D: int
    h: int
    L: int
    variant: str
    params: int
    macs: int
    median_ns: int
