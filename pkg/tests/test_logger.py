"""Tests for the run logger."""

import json
import tempfile
from pathlib import Path

import pytest

from mini_vtn.config import TrainConfig
from mini_vtn.logger import RunLogger
from mini_vtn.schema import EpochMetrics


@pytest.fixture
def tmp_dir():
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


def _blocks(text: str) -> list[tuple[str, str]]:
    """(header, body) pairs of the numbered log blocks."""
    parts = text.split("-" * 80 + "\n")
    return [(parts[i].strip(), parts[i + 1].strip()) for i in range(1, len(parts) - 1, 2)]


def test_nothing_written_before_a_run(tmp_dir):
    run_logger = RunLogger(tmp_dir)
    run_logger.log_event("ignored")
    assert run_logger.get_log_file_path() is None
    assert list(tmp_dir.iterdir()) == []


def test_numbered_blocks(tmp_dir):
    run_logger = RunLogger(tmp_dir)
    run_logger.start_new_run("train")
    run_logger.log_config(TrainConfig(epochs=2))
    run_logger.log_epoch(EpochMetrics(epoch=1, learning_rate=1e-3, train_loss=1.5, train_accuracy=0.4))
    run_logger.log_eval("depth", 0.75, 4)

    path = run_logger.get_log_file_path()
    assert path.parent == tmp_dir
    assert path.name.startswith("train_run_")

    blocks = _blocks(path.read_text(encoding="utf-8"))
    headers = [header.splitlines()[0] for header, _ in blocks]
    assert headers == ["[1] CONFIG", "[2] EPOCH", "[3] EVAL"]
    assert json.loads(blocks[0][1])["epochs"] == 2
    assert json.loads(blocks[1][1])["train_loss"] == 1.5
    assert json.loads(blocks[2][1]) == {"stream_id": "depth", "accuracy": 0.75, "samples": 4}


def test_event_names_are_upper_case(tmp_dir):
    run_logger = RunLogger(tmp_dir)
    run_logger.start_new_run("gradcheck")
    run_logger.log_event("checkpoint", path=tmp_dir / "x.msvt")
    text = run_logger.get_log_file_path().read_text(encoding="utf-8")
    assert "[1] CHECKPOINT" in text
    assert str(tmp_dir / "x.msvt") in text


def test_new_run_restarts_numbering(tmp_dir):
    run_logger = RunLogger(tmp_dir)
    run_logger.start_new_run("eval")
    run_logger.log_event("a")
    first = run_logger.get_log_file_path()
    run_logger.start_new_run("eval")
    run_logger.log_event("b")
    assert run_logger.get_log_file_path() != first
    assert "[1] B" in run_logger.get_log_file_path().read_text(encoding="utf-8")


def test_env_log_dir(tmp_dir, monkeypatch):
    monkeypatch.setenv("MINI_VTN_LOG_DIR", str(tmp_dir / "env"))
    assert RunLogger().log_dir == tmp_dir / "env"
    assert (tmp_dir / "env").is_dir()


def test_home_relative_log_dir(tmp_dir, monkeypatch):
    monkeypatch.setenv("HOME", str(tmp_dir))
    run_logger = RunLogger("~/runs/log")
    assert run_logger.log_dir == tmp_dir / "runs" / "log"
    assert run_logger.log_dir.is_dir()
