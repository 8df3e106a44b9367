"""Mini-batch training loop."""

import json
import logging
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..config import TrainConfig
from ..data import GestureDataset, generate_dataset, read_dataset, save_checkpoint
from ..exceptions import ConfigurationError
from ..logger import RunLogger
from ..nn import ModelParams, VideoTransformer
from ..schema import EpochMetrics
from ..tensor import backward
from .evaluate import check_compatible, evaluate_samples, resolve_stream
from .loss import cross_entropy
from .optim import AdamState, adam_step, lr_schedule

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "checkpoint.msvt"
METRICS_NAME = "metrics.json"


@dataclass
class TrainResult:
    model: VideoTransformer
    stream: str
    metrics: list[EpochMetrics]
    checkpoint_path: Path | None = None

    @property
    def params(self) -> ModelParams:
        return self.model.params


def load_training_data(config: TrainConfig) -> tuple[GestureDataset, GestureDataset | None]:
    """Train/test datasets from the synthetic generator or from dataset files."""
    if config.data is not None:
        synthetic = generate_dataset(config.data)
        return (
            GestureDataset.from_samples(synthetic.train, config.data.class_count),
            GestureDataset.from_samples(synthetic.test, config.data.class_count),
        )
    if config.dataset_path is None:
        raise ConfigurationError("Training needs either a `data` section or a `dataset_path`")
    train_set = read_dataset(config.dataset_path)
    test_set = read_dataset(config.test_dataset_path) if config.test_dataset_path else None
    return train_set, test_set


class Trainer:
    """Trains one unimodal classifier.

    Samples of a batch are independent [T, D] sequences; their gradients are summed in
    ascending sample index so the result does not depend on scheduling when ``workers > 1``.
    """

    def __init__(
        self,
        config: TrainConfig,
        run_logger: RunLogger | None = None,
        on_epoch: Callable[[EpochMetrics], None] | None = None,
    ):
        self.config = config
        self.run_logger = run_logger
        self.on_epoch = on_epoch

        self.train_set, self.test_set = load_training_data(config)
        self.stream = resolve_stream(self.train_set, config.stream)
        self.model = VideoTransformer(config.model, seed=config.seed)
        check_compatible(self.model, self.train_set, self.stream)
        if self.test_set is not None:
            check_compatible(self.model, self.test_set, self.stream)

        self.parameters = self.model.parameters()
        self.state = AdamState.zeros_like(self.parameters, betas=config.adam_betas, eps=config.adam_eps)
        self.rng = np.random.default_rng(config.seed)

    def _sample_gradients(self, index: int) -> tuple[float, list[np.ndarray]]:
        sample = self.train_set.samples[index]
        posterior = self.model.classify(sample.streams[self.stream])
        loss = cross_entropy(posterior, sample.label)
        grads = backward(loss, self.parameters)
        return loss.item(), [grads.array(p) for p in self.parameters]

    def _run_batch(self, indices: list[int], pool: ThreadPoolExecutor | None, lr: float) -> float:
        indices = sorted(indices)
        results = pool.map(self._sample_gradients, indices) if pool else map(self._sample_gradients, indices)
        total_loss = 0.0
        summed: list[np.ndarray] | None = None
        for loss, grads in results:
            total_loss += loss
            if summed is None:
                summed = [g.copy() for g in grads]
            else:
                for acc, g in zip(summed, grads):
                    acc += g
        batch = len(indices)
        adam_step(self.parameters, [g / batch for g in summed], self.state, lr)
        return total_loss

    def run(self) -> list[EpochMetrics]:
        config = self.config
        sample_count = len(self.train_set.samples)
        metrics: list[EpochMetrics] = []
        if self.run_logger:
            self.run_logger.log_config(config)

        pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
        try:
            for epoch in range(1, config.epochs + 1):
                started = time.perf_counter()
                lr = lr_schedule(epoch, config)
                order = self.rng.permutation(sample_count)
                total_loss = 0.0
                for start in range(0, sample_count, config.batch_size):
                    batch = [int(i) for i in order[start : start + config.batch_size]]
                    total_loss += self._run_batch(batch, pool, lr)

                train_eval = evaluate_samples(self.model, self.train_set, self.stream)
                test_accuracy = None
                if self.test_set is not None:
                    test_accuracy = evaluate_samples(self.model, self.test_set, self.stream).accuracy
                row = EpochMetrics(
                    epoch=epoch,
                    learning_rate=lr,
                    train_loss=total_loss / sample_count,
                    train_accuracy=train_eval.accuracy,
                    test_accuracy=test_accuracy,
                    seconds=time.perf_counter() - started,
                )
                metrics.append(row)
                logger.info(
                    "epoch %d lr=%.2e loss=%.4f train_acc=%.4f test_acc=%s",
                    epoch,
                    lr,
                    row.train_loss,
                    row.train_accuracy,
                    "n/a" if test_accuracy is None else f"{test_accuracy:.4f}",
                )
                if self.run_logger:
                    self.run_logger.log_epoch(row)
                if self.on_epoch:
                    self.on_epoch(row)
        finally:
            if pool:
                pool.shutdown()
        return metrics


def train(
    config: TrainConfig,
    out_dir: str | Path | None = None,
    run_logger: RunLogger | None = None,
    on_epoch: Callable[[EpochMetrics], None] | None = None,
) -> TrainResult:
    """Train a classifier; with ``out_dir``, write the checkpoint and metrics.json there."""
    trainer = Trainer(config, run_logger, on_epoch)
    metrics = trainer.run()
    result = TrainResult(model=trainer.model, stream=trainer.stream, metrics=metrics)

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        result.checkpoint_path = out_dir / CHECKPOINT_NAME
        save_checkpoint(
            result.checkpoint_path,
            trainer.model.params,
            config.model,
            meta={"stream": trainer.stream, "seed": config.seed, "epochs": config.epochs},
        )
        (out_dir / METRICS_NAME).write_text(
            json.dumps([m.model_dump(mode="json", exclude={"seconds"}) for m in metrics], indent=2),
            encoding="utf-8",
        )
    return result
