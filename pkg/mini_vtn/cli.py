"""
Mini VTN - command line interface

Usage:
    mini-vtn <command> [options]

Examples:
    mini-vtn gen-data --out data/ --streams 2 --rho 0.3
    mini-vtn train --data data/train.msgv --test-data data/test.msgv --stream color --out runs/color
    mini-vtn eval --checkpoint runs/color/checkpoint.msvt --data data/test.msgv --out color.msgv
    mini-vtn fuse color.msgv depth.msgv
    mini-vtn gradcheck --sabotage
    mini-vtn bench --D 512 --h 8 --L 40 --out bench.csv
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from pydantic import BaseModel, ValidationError

from mini_vtn import __version__
from mini_vtn.config import Config, SynthConfig
from mini_vtn.data import (
    GestureDataset,
    generate_dataset,
    oracle_accuracy,
    read_posteriors,
    write_dataset,
)
from mini_vtn.exceptions import ConfigurationError, DataValidationError, MiniVtnError
from mini_vtn.fusion import best_per_size, subset_sweep
from mini_vtn.logger import RunLogger
from mini_vtn.schema import EpochMetrics
from mini_vtn.training import bench_rows, evaluate, run_gradcheck, train, write_bench_csv
from mini_vtn.utils import render_table


# ANSI color codes
class Colors:
    """Terminal color definitions"""

    RESET = "\033[0m"
    BOLD = "\033[1m"
    DIM = "\033[2m"

    RED = "\033[31m"
    GREEN = "\033[32m"

    BRIGHT_GREEN = "\033[92m"


def _override(model: BaseModel, **updates) -> BaseModel:
    """Re-validated copy of ``model`` with ``updates`` applied."""
    try:
        return type(model).model_validate({**model.model_dump(), **updates})
    except ValidationError as e:
        raise ConfigurationError(f"Invalid override {updates}: {e}") from e


def load_config(args: argparse.Namespace) -> Config:
    """Config file (explicit or from the search path) with --seed applied."""
    config = Config.from_yaml(args.config) if args.config else Config.load()
    if args.seed is not None:
        train_config = config.train
        if train_config.data is not None:
            train_config = _override(train_config, data=_override(train_config.data, seed=args.seed).model_dump())
        config.train = _override(train_config, seed=args.seed)
        config.bench = _override(config.bench, seed=args.seed)
    return config


def _pct(value: float | None) -> str:
    return "n/a" if value is None else f"{100.0 * value:.2f}%"


def cmd_gen_data(args: argparse.Namespace, config: Config) -> int:
    synth = config.train.data or SynthConfig.matching(config.train.model)
    updates = {
        key: value
        for key, value in (
            ("stream_count", args.streams),
            ("noise_sigma", args.noise),
            ("cross_stream_correlation", args.rho),
            ("train_size", args.train_size),
            ("test_size", args.test_size),
            ("seed", args.seed),
        )
        if value is not None
    }
    synth = _override(synth, **updates) if updates else synth
    dataset = generate_dataset(synth)

    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    for split, samples in (("train", dataset.train), ("test", dataset.test)):
        full = GestureDataset.from_samples(samples, synth.class_count)
        if args.per_stream:
            for tag in full.stream_tags:
                path = out_dir / f"{split}-{tag}.msgv"
                size = write_dataset(path, full.select(tag))
                print(f"{Colors.GREEN}✅ Wrote {path} ({size} bytes){Colors.RESET}")
        else:
            path = out_dir / f"{split}.msgv"
            size = write_dataset(path, full)
            print(f"{Colors.GREEN}✅ Wrote {path} ({len(samples)} samples, {size} bytes){Colors.RESET}")

    tags = dataset.stream_tags
    rows = [[tag, _pct(oracle_accuracy(dataset.test, dataset.templates, [tag], synth.noise_sigma))] for tag in tags]
    if len(tags) > 1:
        rows.append(["fused", _pct(oracle_accuracy(dataset.test, dataset.templates, tags, synth.noise_sigma))])
    print(f"\n{Colors.BOLD}Nearest-template oracle, test split{Colors.RESET}")
    for line in render_table(["stream", "accuracy"], rows, ["left", "right"]):
        print(line)
    print(
        f"\n{Colors.DIM}Train on these files with model.class_count={synth.class_count}, "
        f"model.sequence_length={synth.sequence_length}, model.input_frame_dim={synth.frame_dim}{Colors.RESET}"
    )
    return 0


def cmd_train(args: argparse.Namespace, config: Config) -> int:
    train_config = config.train
    updates = {}
    if args.data:
        updates.update(data=None, dataset_path=args.data, test_dataset_path=args.test_data)
    if args.stream:
        updates["stream"] = args.stream
    if args.epochs is not None:
        updates["epochs"] = args.epochs
    if updates:
        train_config = _override(train_config, **updates)

    run_logger = RunLogger(config.log_dir)
    run_logger.start_new_run("train")

    def on_epoch(row: EpochMetrics):
        print(
            f"{Colors.DIM}epoch {row.epoch:>4}{Colors.RESET}  lr {row.learning_rate:.1e}  "
            f"loss {row.train_loss:.4f}  train {_pct(row.train_accuracy)}  test {_pct(row.test_accuracy)}"
        )

    result = train(train_config, out_dir=args.out, run_logger=run_logger, on_epoch=on_epoch)
    final = result.metrics[-1]
    print(
        f"\n{Colors.GREEN}✅ Trained on stream {result.stream!r}: "
        f"train {_pct(final.train_accuracy)}, test {_pct(final.test_accuracy)}{Colors.RESET}"
    )
    if result.checkpoint_path:
        run_logger.log_event("checkpoint", path=result.checkpoint_path, stream=result.stream)
        print(f"{Colors.DIM}Checkpoint: {result.checkpoint_path}{Colors.RESET}")
    print(f"{Colors.DIM}Log: {run_logger.get_log_file_path()}{Colors.RESET}")
    return 0


def cmd_eval(args: argparse.Namespace, config: Config) -> int:
    if not args.checkpoint or not args.data:
        raise ConfigurationError("eval needs --checkpoint and --data")
    result = evaluate(args.checkpoint, args.data, out_path=args.out, stream=args.stream)

    run_logger = RunLogger(config.log_dir)
    run_logger.start_new_run("eval")
    run_logger.log_eval(result.stream_id, result.accuracy, len(result.labels))

    print(
        f"{Colors.BOLD}Accuracy [{result.stream_id}]: {_pct(result.accuracy)}{Colors.RESET} "
        f"({len(result.labels)} samples)"
    )
    if args.out:
        print(f"{Colors.DIM}Posteriors: {args.out}{Colors.RESET}")
    return 0


def cmd_fuse(args: argparse.Namespace, config: Config) -> int:
    streams = {}
    labels = None
    for file in args.files:
        name = Path(file).stem
        while name in streams:
            name += "'"
        file_labels, posteriors = read_posteriors(file, stream_id=name)
        if labels is None:
            labels = file_labels
        elif file_labels != labels:
            raise DataValidationError(f"{file} is not aligned with {args.files[0]}: labels differ")
        streams[name] = posteriors

    results = subset_sweep(streams, labels)
    best = best_per_size(results)
    names = list(streams)
    rows = []
    for result in results:
        marks = ["✓" if name in result.streams else "" for name in names]
        accuracy = _pct(result.accuracy)
        if best[result.size] is result:
            accuracy = f"{Colors.BOLD}{Colors.BRIGHT_GREEN}{accuracy}{Colors.RESET}"
        rows.append([str(result.size)] + marks + [accuracy])

    align = ["right"] + ["center"] * len(names) + ["right"]
    for line in render_table(["#"] + names + ["accuracy"], rows, align):
        print(line)

    full = results[-1]
    print(f"\n{Colors.BOLD}Fused accuracy ({len(names)} streams): {_pct(full.accuracy)}{Colors.RESET}")
    return 0


def cmd_gradcheck(args: argparse.Namespace, config: Config) -> int:
    gradcheck_config = config.gradcheck
    updates = {}
    if args.seeds is not None:
        updates["seeds"] = args.seeds
    if args.max_entries is not None:
        updates["max_entries_per_tensor"] = args.max_entries
    if updates:
        gradcheck_config = _override(gradcheck_config, **updates)

    report = run_gradcheck(gradcheck_config, sabotage=args.sabotage, include_primitives=not args.no_primitives)
    rows = [
        [
            row.group,
            str(row.numel),
            f"{row.max_relative_error:.2e}",
            f"{Colors.GREEN}ok{Colors.RESET}" if row.passed else f"{Colors.RED}FAIL{Colors.RESET}",
        ]
        for row in report.rows
    ]
    for line in render_table(["group", "numel", "max rel err", "status"], rows, ["left", "right", "right", "left"]):
        print(line)

    summary = f"{len(report.rows)} groups, {report.seeds} seeds, tolerance {report.tolerance:.0e}"
    if report.sabotaged:
        summary += ", sabotaged"
    if report.passed:
        print(f"\n{Colors.GREEN}✅ Gradient check passed ({summary}){Colors.RESET}")
        return 0
    print(f"\n{Colors.RED}❌ Gradient check failed ({summary}){Colors.RESET}")
    return 1


def cmd_bench(args: argparse.Namespace, config: Config) -> int:
    bench_config = config.bench
    updates = {
        key: value
        for key, value in (
            ("feature_widths", args.D),
            ("head_counts", args.h),
            ("sequence_lengths", args.L),
            ("repeats", args.repeats),
        )
        if value is not None
    }
    if updates:
        bench_config = _override(bench_config, **updates)

    rows = bench_rows(bench_config)
    if not rows:
        raise ConfigurationError("No valid (D, h) combination to benchmark")
    if args.out:
        write_bench_csv(rows, args.out)
        print(f"{Colors.GREEN}✅ Wrote {len(rows)} rows to {args.out}{Colors.RESET}")
    else:
        write_bench_csv(rows, sys.stdout)
    return 0


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "eval": cmd_eval,
    "fuse": cmd_fuse,
    "gradcheck": cmd_gradcheck,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", type=str, default=None, help="YAML or JSON config file")
    common.add_argument("--seed", type=int, default=None, help="Override every seed in the config")
    common.add_argument("--verbose", action="store_true", help="Log at INFO level")

    parser = argparse.ArgumentParser(
        prog="mini-vtn",
        description="Mini VTN - multiscaled multi-head attention video transformer",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("Examples:", 1)[1],
    )
    parser.add_argument("--version", "-v", action="version", version=f"mini-vtn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", parents=[common], help="Write a synthetic multi-stream dataset")
    gen.add_argument("--out", "-o", type=str, default=None, help="Output directory (default: .)")
    gen.add_argument("--streams", type=int, default=None, help="Number of streams")
    gen.add_argument("--noise", type=float, default=None, help="Noise sigma")
    gen.add_argument("--rho", type=float, default=None, help="Cross-stream noise correlation in [0, 1]")
    gen.add_argument("--train-size", type=int, default=None)
    gen.add_argument("--test-size", type=int, default=None)
    gen.add_argument("--per-stream", action="store_true", help="One file per stream and split")

    tr = sub.add_parser("train", parents=[common], help="Train a unimodal classifier")
    tr.add_argument("--out", "-o", type=str, default=None, help="Directory for checkpoint and metrics")
    tr.add_argument("--data", type=str, default=None, help="Training MSGV file (replaces the synthetic data)")
    tr.add_argument("--test-data", type=str, default=None, help="Test MSGV file")
    tr.add_argument("--stream", type=str, default=None, help="Stream tag to train on")
    tr.add_argument("--epochs", type=int, default=None)

    ev = sub.add_parser("eval", parents=[common], help="Evaluate a checkpoint and write posteriors")
    ev.add_argument("--checkpoint", type=str, default=None)
    ev.add_argument("--data", type=str, default=None)
    ev.add_argument("--out", "-o", type=str, default=None, help="Posterior file to write")
    ev.add_argument("--stream", type=str, default=None)

    fu = sub.add_parser("fuse", parents=[common], help="Late-fuse posterior files")
    fu.add_argument("files", nargs="+", help="Posterior files written by eval")

    gc = sub.add_parser("gradcheck", parents=[common], help="Finite-difference gradient suite")
    gc.add_argument("--seeds", type=int, default=None)
    gc.add_argument("--max-entries", type=int, default=None, help="Entries checked per tensor (default: all)")
    gc.add_argument("--sabotage", action="store_true", help="Scale heads by sqrt(2 d_j); must fail")
    gc.add_argument("--no-primitives", action="store_true", help="Only check the classifier")

    be = sub.add_parser("bench", parents=[common], help="Attention parameter/MAC counts and timings")
    be.add_argument("--D", type=int, nargs="+", default=None, help="Feature widths")
    be.add_argument("--h", type=int, nargs="+", default=None, help="Head counts")
    be.add_argument("--L", type=int, nargs="+", default=None, help="Sequence lengths")
    be.add_argument("--repeats", type=int, default=None)
    be.add_argument("--out", "-o", type=str, default=None, help="CSV file (default: stdout)")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for CLI; returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args)
        return COMMANDS[args.command](args, config)
    except FileNotFoundError as e:
        print(f"{Colors.RED}❌ Error: File not found: {e.filename or e}{Colors.RESET}", file=sys.stderr)
    except MiniVtnError as e:
        print(f"{Colors.RED}❌ Error: {e}{Colors.RESET}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
