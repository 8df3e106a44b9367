"""Tests for the training loop."""

import json
import tempfile
from pathlib import Path

import pytest

from mini_vtn.config import ModelConfig, SynthConfig, TrainConfig
from mini_vtn.data import GestureDataset, generate_dataset, load_checkpoint, write_dataset
from mini_vtn.exceptions import ConfigurationError
from mini_vtn.logger import RunLogger
from mini_vtn.training import CHECKPOINT_NAME, METRICS_NAME, Trainer, train


def quick_config(**overrides) -> TrainConfig:
    model = ModelConfig(
        feature_width=8, head_count=2, stage_count=1, sequence_length=4, class_count=3, input_frame_dim=6
    )
    data = SynthConfig(class_count=3, sequence_length=4, frame_dim=6, train_size=12, test_size=6, noise_sigma=0.3)
    base = dict(model=model, data=data, learning_rate=1e-2, decay_epochs=[2], epochs=3, batch_size=4)
    base.update(overrides)
    return TrainConfig(**base)


def toy_config() -> TrainConfig:
    model = ModelConfig(
        feature_width=32, head_count=4, stage_count=2, sequence_length=8, class_count=5, input_frame_dim=16
    )
    data = SynthConfig(class_count=5, sequence_length=8, frame_dim=16, train_size=200, test_size=100, noise_sigma=0.5)
    return TrainConfig(model=model, data=data, learning_rate=1e-3, decay_epochs=[20, 25], epochs=30, batch_size=8)


@pytest.fixture
def tmp_dir():
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


def test_metrics_per_epoch():
    metrics = Trainer(quick_config()).run()
    assert [m.epoch for m in metrics] == [1, 2, 3]
    assert [m.learning_rate for m in metrics] == pytest.approx([1e-2, 1e-3, 1e-3])
    assert all(m.train_loss > 0 for m in metrics)
    assert all(0.0 <= m.train_accuracy <= 1.0 for m in metrics)
    assert all(m.test_accuracy is not None for m in metrics)


def test_same_seed_gives_identical_curves():
    a = Trainer(quick_config()).run()
    b = Trainer(quick_config()).run()
    assert [(m.train_loss, m.train_accuracy, m.test_accuracy) for m in a] == [
        (m.train_loss, m.train_accuracy, m.test_accuracy) for m in b
    ]


def test_workers_do_not_change_results():
    single = Trainer(quick_config()).run()
    threaded = Trainer(quick_config(workers=3)).run()
    assert [m.train_loss for m in single] == [m.train_loss for m in threaded]


def test_parameters_change():
    trainer = Trainer(quick_config(epochs=1))
    before = trainer.model.params.readout_weight.data.copy()
    trainer.run()
    assert (trainer.model.params.readout_weight.data != before).any()


def test_partial_last_batch():
    metrics = Trainer(quick_config(batch_size=5, epochs=1)).run()
    assert len(metrics) == 1


def test_epochs_zero_rejected():
    with pytest.raises(ValueError):
        quick_config(epochs=0)


def test_data_must_match_model():
    with pytest.raises(ValueError):
        quick_config(data=SynthConfig(class_count=4, sequence_length=4, frame_dim=6))


def test_needs_a_data_source():
    with pytest.raises(ConfigurationError):
        Trainer(quick_config(data=None))


def test_train_from_files_on_chosen_stream(tmp_dir):
    synth = SynthConfig(class_count=3, sequence_length=4, frame_dim=6, stream_count=2, train_size=9, test_size=3)
    dataset = generate_dataset(synth)
    write_dataset(tmp_dir / "train.msgv", GestureDataset.from_samples(dataset.train, 3))
    write_dataset(tmp_dir / "test.msgv", GestureDataset.from_samples(dataset.test, 3))

    config = quick_config(
        data=None,
        dataset_path=str(tmp_dir / "train.msgv"),
        test_dataset_path=str(tmp_dir / "test.msgv"),
        stream="depth",
        epochs=1,
    )
    trainer = Trainer(config)
    assert trainer.stream == "depth"
    assert trainer.run()[0].test_accuracy is not None


def test_unknown_stream(tmp_dir):
    with pytest.raises(ConfigurationError):
        Trainer(quick_config(stream="flow"))


def test_dataset_width_mismatch(tmp_dir):
    synth = SynthConfig(class_count=3, sequence_length=4, frame_dim=7, train_size=3, test_size=3)
    write_dataset(tmp_dir / "train.msgv", GestureDataset.from_samples(generate_dataset(synth).train, 3))
    with pytest.raises(ConfigurationError):
        Trainer(quick_config(data=None, dataset_path=str(tmp_dir / "train.msgv")))


def test_train_writes_outputs(tmp_dir):
    run_logger = RunLogger(tmp_dir / "log")
    run_logger.start_new_run("train")
    seen = []
    result = train(quick_config(), out_dir=tmp_dir / "run", run_logger=run_logger, on_epoch=seen.append)

    assert result.checkpoint_path == tmp_dir / "run" / CHECKPOINT_NAME
    checkpoint = load_checkpoint(result.checkpoint_path)
    assert checkpoint.meta == {"stream": "color", "seed": 0, "epochs": 3}

    metrics = json.loads((tmp_dir / "run" / METRICS_NAME).read_text(encoding="utf-8"))
    assert [m["epoch"] for m in metrics] == [1, 2, 3]
    assert metrics[-1]["train_accuracy"] == result.metrics[-1].train_accuracy
    assert len(seen) == 3

    log_text = run_logger.get_log_file_path().read_text(encoding="utf-8")
    assert log_text.count("] EPOCH") == 3
    assert "] CONFIG" in log_text


def test_checkpoint_bytes_are_deterministic(tmp_dir):
    train(quick_config(), out_dir=tmp_dir / "a")
    train(quick_config(), out_dir=tmp_dir / "b")
    assert (tmp_dir / "a" / CHECKPOINT_NAME).read_bytes() == (tmp_dir / "b" / CHECKPOINT_NAME).read_bytes()


@pytest.mark.slow
def test_toy_problem_is_learned():
    """C=5, T=8, F=16, D=32, h=4, S=2, 200/100 samples, noise 0.5, 30 epochs."""
    metrics = Trainer(toy_config()).run()
    final = metrics[-1]
    assert final.train_accuracy >= 0.95
    assert final.test_accuracy >= 0.80
    assert final.train_loss <= 0.5 * metrics[0].train_loss
