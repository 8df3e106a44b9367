"""Finite-difference gradient suite.

Every parameter tensor of a small classifier is checked against central differences of the
cross-entropy loss, over several seeds, at float64. The primitive ops and one MsMHA layer are
checked the same way on random inputs.
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from ..config import GradcheckConfig, ModelConfig
from ..nn import MsMhaParams, ModelParams, classify, head_schedule, msmha
from ..schema import GradcheckReport, GradcheckRow
from ..tensor import (
    FLOAT64,
    Tensor,
    add,
    backward,
    concat_features,
    finite_diff_entries,
    gelu,
    layer_norm,
    linear,
    matmul,
    mean_rows,
    mul,
    relative_error,
    scale,
    slice_columns,
    softmax_rows,
    sub,
    sum_all,
    transpose,
)
from .loss import cross_entropy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrimitiveCase:
    name: str
    shapes: tuple[tuple[int, ...], ...]
    forward: Callable[..., Tensor]


PRIMITIVE_CASES: tuple[PrimitiveCase, ...] = (
    PrimitiveCase("matmul", ((3, 4), (4, 2)), matmul),
    PrimitiveCase("matmul.vector", ((4,), (4, 3)), matmul),
    PrimitiveCase("transpose", ((3, 4),), transpose),
    PrimitiveCase("softmax_rows", ((3, 5),), softmax_rows),
    PrimitiveCase("linear", ((3, 4), (4, 2), (2,)), linear),
    PrimitiveCase("concat_features", ((3, 2), (3, 3)), lambda a, b: concat_features([a, b])),
    PrimitiveCase("slice_columns", ((3, 5),), lambda x: slice_columns(x, 1, 4)),
    PrimitiveCase("add", ((3, 4), (3, 4)), add),
    PrimitiveCase("sub", ((3, 4), (3, 4)), sub),
    PrimitiveCase("mul", ((3, 4), (3, 4)), mul),
    PrimitiveCase("scale", ((3, 4),), lambda x: scale(x, 0.7)),
    PrimitiveCase("mean_rows", ((3, 4),), mean_rows),
    PrimitiveCase("layer_norm", ((3, 4), (4,), (4,)), layer_norm),
    PrimitiveCase("gelu", ((3, 4),), gelu),
)


def _entry_indices(shape: tuple[int, ...], limit: int | None, rng: np.random.Generator) -> list[tuple[int, ...]]:
    total = math.prod(shape)
    if limit is None or limit >= total:
        flat = range(total)
    else:
        flat = sorted(rng.choice(total, size=limit, replace=False).tolist())
    return [tuple(int(i) for i in np.unravel_index(k, shape)) for k in flat]


def _compare(
    loss_fn: Callable[[], Tensor],
    analytic: np.ndarray,
    tensor: Tensor,
    eps: float,
    limit: int | None,
    rng: np.random.Generator,
) -> float:
    indices = _entry_indices(tensor.shape, limit, rng)
    numeric = finite_diff_entries(lambda _: loss_fn(), tensor, indices, eps)
    return relative_error(np.asarray([analytic[i] for i in indices]), numeric)


def _weighted_total(out: Tensor, weights: Tensor) -> Tensor:
    return sum_all(mul(out, weights))


def check_primitives(
    seed: int = 0, eps: float = 1e-6, tolerance: float = 1e-6, cases: Sequence[PrimitiveCase] = PRIMITIVE_CASES
) -> list[GradcheckRow]:
    """One row per primitive; the loss is a fixed random projection of the op's output."""
    rng = np.random.default_rng(seed)
    rows = []
    for case in cases:
        inputs = [Tensor(rng.standard_normal(shape), requires_grad=True, dtype=FLOAT64) for shape in case.shapes]
        weights = Tensor(rng.standard_normal(case.forward(*inputs).shape), dtype=FLOAT64)

        def loss_fn(case=case, inputs=inputs, weights=weights) -> Tensor:
            return _weighted_total(case.forward(*inputs), weights)

        grads = backward(loss_fn(), inputs)
        worst = max(_compare(loss_fn, grads.array(x), x, eps, None, rng) for x in inputs)
        rows.append(
            GradcheckRow(
                group=f"op.{case.name}",
                numel=sum(x.numel for x in inputs),
                max_relative_error=worst,
                passed=worst <= tolerance,
            )
        )
    return rows


def check_msmha(
    seed: int = 0,
    feature_width: int = 8,
    head_count: int = 2,
    length: int = 4,
    eps: float = 1e-6,
    tolerance: float = 1e-6,
    sabotage: bool = False,
) -> GradcheckRow:
    """A single MsMHA layer: input and every projection checked together."""
    rng = np.random.default_rng(seed)
    schedule = head_schedule(feature_width, head_count)
    params = MsMhaParams.init(schedule, rng, FLOAT64)
    x = Tensor(rng.standard_normal((length, feature_width)), requires_grad=True, dtype=FLOAT64)
    weights = Tensor(rng.standard_normal((length, feature_width)), dtype=FLOAT64)
    leaves = [x] + [t for _, t in params.named_tensors()]
    temperatures = [2 * d for d in schedule.dims] if sabotage else None

    grads = backward(_weighted_total(msmha(x, params, schedule, temperatures), weights), leaves)

    def loss_fn() -> Tensor:
        return _weighted_total(msmha(x, params, schedule), weights)

    worst = max(_compare(loss_fn, grads.array(t), t, eps, None, rng) for t in leaves)
    return GradcheckRow(
        group="op.msmha",
        numel=sum(t.numel for t in leaves),
        max_relative_error=worst,
        passed=worst <= tolerance,
    )


def _as_float64(model: ModelConfig) -> ModelConfig:
    if model.precision == "float64":
        return model
    logger.warning("Gradient check forces float64; config asked for %s", model.precision)
    return model.model_copy(update={"precision": "float64"})


def check_model(config: GradcheckConfig, sabotage: bool = False) -> list[GradcheckRow]:
    """End-to-end check of every named parameter; errors are the worst over all seeds.

    With ``sabotage`` the analytic pass scales head j by sqrt(2 d_j) instead of sqrt(d_j) while the
    finite differences keep the correct model, so the check must fail.
    """
    model = _as_float64(config.model)
    worst: dict[str, float] = {}
    sizes: dict[str, int] = {}

    for seed in range(config.seeds):
        rng = np.random.default_rng(seed)
        params = ModelParams.init(model, seed=seed)
        frames = Tensor(rng.standard_normal((model.sequence_length, model.input_frame_dim)), dtype=FLOAT64)
        label = seed % model.class_count
        named = params.named_parameters()

        temperatures = None
        if sabotage:
            temperatures = [2 * d for d in params.stages[0].attention.dims]
        loss = cross_entropy(classify(frames, params, model, temperatures), label)
        grads = backward(loss, [t for _, t in named])

        def loss_fn(params=params, frames=frames, label=label) -> Tensor:
            return cross_entropy(classify(frames, params, model), label)

        for name, tensor in named:
            error = _compare(loss_fn, grads.array(tensor), tensor, config.eps, config.max_entries_per_tensor, rng)
            worst[name] = max(worst.get(name, 0.0), error)
            sizes[name] = tensor.numel
        logger.debug("gradcheck seed %d done, worst so far %.3e", seed, max(worst.values()))

    return [
        GradcheckRow(group=name, numel=sizes[name], max_relative_error=error, passed=error <= config.tolerance)
        for name, error in worst.items()
    ]


def run_gradcheck(
    config: GradcheckConfig | None = None,
    sabotage: bool = False,
    include_primitives: bool = True,
) -> GradcheckReport:
    """The full suite: primitives, one MsMHA layer, then the end-to-end classifier."""
    config = config or GradcheckConfig()
    rows: list[GradcheckRow] = []
    if include_primitives:
        rows.extend(check_primitives(tolerance=config.tolerance))
        rows.append(check_msmha(tolerance=config.tolerance, sabotage=sabotage))
    rows.extend(check_model(config, sabotage))
    report = GradcheckReport(rows=rows, seeds=config.seeds, tolerance=config.tolerance, sabotaged=sabotage)
    logger.info(
        "gradcheck %s: %d groups, max relative error %.3e",
        "passed" if report.passed else "FAILED",
        len(rows),
        report.max_relative_error,
    )
    return report
