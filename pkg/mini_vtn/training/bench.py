"""Attention cost benchmark: analytic parameter/MAC counts and measured forward time."""

import csv
import logging
import statistics
import time
from collections.abc import Iterator, Sequence
from pathlib import Path
from typing import TextIO

import numpy as np

from ..config import BenchConfig
from ..exceptions import ConfigurationError
from ..nn import HeadSchedule, MsMhaParams, attention_macs, attention_param_count, msmha, schedule_for
from ..schema import BenchRow
from ..tensor import FLOAT32, Tensor

logger = logging.getLogger(__name__)

VARIANTS = ("pyramid", "uniform")
CSV_COLUMNS = list(BenchRow.model_fields)


def time_forward(schedule: HeadSchedule, length: int, repeats: int, rng: np.random.Generator) -> list[int]:
    """Wall time in ns of ``repeats`` forward passes over one random [L, D] input."""
    params = MsMhaParams.init(schedule, rng, FLOAT32)
    x = Tensor(rng.standard_normal((length, schedule.feature_width)), dtype=FLOAT32)
    samples = []
    for _ in range(repeats):
        started = time.perf_counter_ns()
        msmha(x, params, schedule)
        samples.append(max(1, time.perf_counter_ns() - started))
    return samples


def iter_bench_rows(config: BenchConfig) -> Iterator[BenchRow]:
    """Rows in (D, h, L, variant) order; configurations a variant cannot build are skipped."""
    rng = np.random.default_rng(config.seed)
    for width in config.feature_widths:
        for heads in config.head_counts:
            for length in config.sequence_lengths:
                for variant in VARIANTS:
                    try:
                        schedule = schedule_for(variant, width, heads)
                    except ConfigurationError as e:
                        logger.warning("Skipping %s D=%d h=%d: %s", variant, width, heads, e)
                        continue
                    samples = time_forward(schedule, length, config.repeats, rng)
                    yield BenchRow(
                        D=width,
                        h=heads,
                        L=length,
                        variant=variant,
                        params=attention_param_count(schedule),
                        macs=attention_macs(schedule, length),
                        median_ns=int(statistics.median(samples)),
                    )


def bench_rows(config: BenchConfig) -> list[BenchRow]:
    return list(iter_bench_rows(config))


def write_bench_csv(rows: Sequence[BenchRow], out: str | Path | TextIO) -> None:
    """CSV with header D,h,L,variant,params,macs,median_ns."""
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="") as f:
            write_bench_csv(rows, f)
        return
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow(row.model_dump())
