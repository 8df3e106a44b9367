"""End-to-end tests for the mini-vtn command line."""

import csv
import tempfile
from pathlib import Path

import pytest
import yaml

from mini_vtn.cli import build_parser, main
from mini_vtn.data import read_dataset, read_posteriors

CONFIG = {
    "model": {
        "feature_width": 8,
        "head_count": 2,
        "stage_count": 1,
        "sequence_length": 4,
        "class_count": 3,
        "input_frame_dim": 6,
    },
    "data": {
        "class_count": 3,
        "sequence_length": 4,
        "frame_dim": 6,
        "stream_count": 2,
        "train_size": 9,
        "test_size": 6,
        "noise_sigma": 0.3,
    },
    "learning_rate": 0.01,
    "decay_epochs": [],
    "epochs": 2,
    "batch_size": 3,
    "gradcheck": {"seeds": 1, "max_entries_per_tensor": 3},
}


@pytest.fixture
def workspace(monkeypatch):
    monkeypatch.delenv("MINI_VTN_SEED", raising=False)
    monkeypatch.delenv("MINI_VTN_LOG_DIR", raising=False)
    with tempfile.TemporaryDirectory() as tmpdir:
        tmp_dir = Path(tmpdir)
        config = {**CONFIG, "log_dir": str(tmp_dir / "log")}
        (tmp_dir / "config.yaml").write_text(yaml.safe_dump(config), encoding="utf-8")
        yield tmp_dir


def run(workspace: Path, *argv: str) -> int:
    command, *rest = argv
    return main([command, "--config", str(workspace / "config.yaml"), *rest])


def eval_to(workspace: Path, checkpoint, data, out) -> int:
    return run(workspace, "eval", "--checkpoint", str(checkpoint), "--data", str(data), "--out", str(out))


def test_gen_data(workspace, capsys):
    assert run(workspace, "gen-data", "--out", str(workspace / "data"), "--rho", "0.5") == 0
    train = read_dataset(workspace / "data" / "train.msgv")
    assert train.stream_tags == ["color", "depth"]
    assert len(train.samples) == 9
    out = capsys.readouterr().out
    assert "oracle" in out
    assert "fused" in out


def test_gen_data_without_data_section_fits_the_model(workspace, capsys):
    config = {key: value for key, value in CONFIG.items() if key != "data"}
    config["log_dir"] = str(workspace / "log")
    (workspace / "config.yaml").write_text(yaml.safe_dump(config), encoding="utf-8")
    data = workspace / "data"

    assert run(workspace, "gen-data", "--out", str(data), "--train-size", "6", "--test-size", "3") == 0
    train = read_dataset(data / "train.msgv")
    assert (train.class_count, train.sequence_length, train.stream_dims["color"]) == (3, 4, 6)
    assert "model.input_frame_dim=6" in capsys.readouterr().out
    assert run(workspace, "train", "--data", str(data / "train.msgv"), "--epochs", "1") == 0


def test_gen_data_per_stream(workspace):
    assert run(workspace, "gen-data", "--out", str(workspace), "--per-stream", "--streams", "3") == 0
    names = sorted(path.name for path in workspace.glob("*.msgv"))
    assert names == [f"{split}-{tag}.msgv" for split in ("test", "train") for tag in ("color", "depth", "ir")]


def test_train_eval_fuse(workspace, capsys):
    data = workspace / "data"
    assert run(workspace, "gen-data", "--out", str(data)) == 0

    for stream in ("color", "depth"):
        args = ["--data", str(data / "train.msgv"), "--test-data", str(data / "test.msgv")]
        assert run(workspace, "train", *args, "--stream", stream, "--out", str(workspace / stream)) == 0
        assert (workspace / stream / "checkpoint.msvt").exists()
        assert (workspace / stream / "metrics.json").exists()

        checkpoint = str(workspace / stream / "checkpoint.msvt")
        posterior = str(workspace / f"{stream}.msgv")
        assert eval_to(workspace, checkpoint, data / "test.msgv", posterior) == 0
        _, posteriors = read_posteriors(posterior)
        assert posteriors[0].stream_id == stream

    capsys.readouterr()
    assert run(workspace, "fuse", str(workspace / "color.msgv"), str(workspace / "depth.msgv")) == 0
    out = capsys.readouterr().out
    assert "Fused accuracy (2 streams)" in out
    assert out.count("✓") == 4

    logs = list((workspace / "log").glob("*.log"))
    train_logs = [p for p in logs if p.name.startswith("train_run_")]
    assert len(train_logs) == 2
    assert all("CHECKPOINT" in p.read_text(encoding="utf-8") for p in train_logs)
    assert len([p for p in logs if p.name.startswith("eval_run_")]) == 2


def test_train_on_synthetic_data(workspace, capsys):
    assert run(workspace, "train", "--epochs", "1") == 0
    assert "Trained on stream 'color'" in capsys.readouterr().out


def test_fuse_same_file_twice(workspace, capsys):
    data = workspace / "data"
    run(workspace, "gen-data", "--out", str(data))
    run(workspace, "train", "--out", str(workspace / "run"))
    posterior = str(workspace / "p.msgv")
    eval_to(workspace, workspace / "run" / "checkpoint.msvt", data / "test.msgv", posterior)
    capsys.readouterr()
    assert run(workspace, "fuse", posterior, posterior) == 0
    assert "p'" in capsys.readouterr().out


def test_gradcheck_passes(workspace, capsys):
    assert run(workspace, "gradcheck") == 0
    out = capsys.readouterr().out
    assert "op.msmha" in out
    assert "Gradient check passed" in out


def test_gradcheck_sabotage_fails(workspace, capsys):
    assert run(workspace, "gradcheck", "--sabotage") == 1
    assert "FAIL" in capsys.readouterr().out


def test_bench_csv(workspace):
    out = workspace / "bench.csv"
    args = ["--D", "16", "32", "--h", "1", "2", "--L", "4", "--repeats", "1", "--out", str(out)]
    assert run(workspace, "bench", *args) == 0
    with open(out, encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 8
    assert {row["variant"] for row in rows} == {"pyramid", "uniform"}


def test_bench_stdout(workspace, capsys):
    assert run(workspace, "bench", "--D", "8", "--h", "2", "--L", "2", "--repeats", "1") == 0
    assert capsys.readouterr().out.splitlines()[0] == "D,h,L,variant,params,macs,median_ns"


def test_bench_nothing_valid(workspace, capsys):
    assert run(workspace, "bench", "--D", "6", "--h", "4", "--repeats", "1") == 1
    assert "Error" in capsys.readouterr().err


class TestErrors:
    def test_missing_checkpoint(self, workspace, capsys):
        assert eval_to(workspace, workspace / "nope.msvt", workspace / "x.msgv", workspace / "y.msgv") == 1
        assert "File not found" in capsys.readouterr().err

    def test_eval_needs_arguments(self, workspace):
        assert run(workspace, "eval") == 1

    def test_missing_config(self, workspace):
        assert main(["gradcheck", "--config", str(workspace / "absent.yaml")]) == 1

    def test_invalid_override(self, workspace):
        assert run(workspace, "gen-data", "--out", str(workspace), "--rho", "1.5") == 1

    def test_unknown_stream(self, workspace):
        data = workspace / "data"
        run(workspace, "gen-data", "--out", str(data))
        assert run(workspace, "train", "--data", str(data / "train.msgv"), "--stream", "flow") == 1

    def test_fuse_misaligned(self, workspace):
        data = workspace / "data"
        run(workspace, "gen-data", "--out", str(data))
        run(workspace, "train", "--out", str(workspace / "run"))
        checkpoint = str(workspace / "run" / "checkpoint.msvt")
        eval_to(workspace, checkpoint, data / "train.msgv", workspace / "a.msgv")
        eval_to(workspace, checkpoint, data / "test.msgv", workspace / "b.msgv")
        assert run(workspace, "fuse", str(workspace / "a.msgv"), str(workspace / "b.msgv")) == 1


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
