"""Loss, optimizer, training loop, evaluation, gradient suite and benchmark."""

from .bench import CSV_COLUMNS, VARIANTS, bench_rows, iter_bench_rows, time_forward, write_bench_csv
from .evaluate import check_compatible, evaluate, evaluate_samples, resolve_stream
from .gradcheck import check_model, check_msmha, check_primitives, run_gradcheck
from .loss import PROB_FLOOR, cross_entropy
from .optim import AdamState, adam_step, lr_schedule
from .trainer import CHECKPOINT_NAME, METRICS_NAME, TrainResult, Trainer, load_training_data, train

__all__ = [
    "CHECKPOINT_NAME",
    "CSV_COLUMNS",
    "METRICS_NAME",
    "PROB_FLOOR",
    "AdamState",
    "TrainResult",
    "VARIANTS",
    "Trainer",
    "adam_step",
    "bench_rows",
    "check_compatible",
    "check_model",
    "check_msmha",
    "check_primitives",
    "cross_entropy",
    "evaluate",
    "evaluate_samples",
    "iter_bench_rows",
    "load_training_data",
    "lr_schedule",
    "resolve_stream",
    "run_gradcheck",
    "time_forward",
    "train",
    "write_bench_csv",
]
