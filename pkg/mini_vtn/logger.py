"""Run logger"""

import json
import os
from datetime import datetime
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from .config import CONFIG_DIR_NAME


class RunLogger:
    """Run logger

    Records one training, evaluation or check run as numbered JSON blocks in a log file:
    - the resolved configuration
    - per-epoch metrics
    - evaluation results and free-form events
    """

    def __init__(self, log_dir: str | Path | None = None):
        """Initialize logger

        Logs go to ``log_dir``, else $MINI_VTN_LOG_DIR, else ~/.mini-vtn/log/
        """
        env_dir = os.getenv("MINI_VTN_LOG_DIR")
        self.log_dir = Path(log_dir or env_dir or Path.home() / CONFIG_DIR_NAME / "log").expanduser()
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self.log_file: Path | None = None
        self.log_index = 0

    def start_new_run(self, kind: str = "train"):
        """Start new run, create new log file"""
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S_%f")
        self.log_file = self.log_dir / f"{kind}_run_{timestamp}.log"
        self.log_index = 0

        with open(self.log_file, "w", encoding="utf-8") as f:
            f.write("=" * 80 + "\n")
            f.write(f"Mini VTN {kind} run - {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}\n")
            f.write("=" * 80 + "\n\n")

    def log_config(self, config: BaseModel):
        self._write_log("CONFIG", json.dumps(config.model_dump(mode="json"), indent=2))

    def log_epoch(self, metrics: BaseModel):
        self._write_log("EPOCH", json.dumps(metrics.model_dump(mode="json"), indent=2))

    def log_eval(self, stream_id: str, accuracy: float, sample_count: int):
        content = {"stream_id": stream_id, "accuracy": accuracy, "samples": sample_count}
        self._write_log("EVAL", json.dumps(content, indent=2))

    def log_event(self, name: str, **details: Any):
        self._write_log(name.upper(), json.dumps(details, indent=2, default=str))

    def _write_log(self, log_type: str, content: str):
        """Write log entry

        Args:
            log_type: Log type (CONFIG, EPOCH, EVAL, ...)
            content: Log content
        """
        if self.log_file is None:
            return

        self.log_index += 1
        with open(self.log_file, "a", encoding="utf-8") as f:
            f.write("\n" + "-" * 80 + "\n")
            f.write(f"[{self.log_index}] {log_type}\n")
            f.write(f"Timestamp: {datetime.now().strftime('%Y-%m-%d %H:%M:%S.%f')[:-3]}\n")
            f.write("-" * 80 + "\n")
            f.write(content + "\n")

    def get_log_file_path(self) -> Path | None:
        """Get current log file path"""
        return self.log_file
