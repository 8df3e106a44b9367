"""Configuration management module

Provides the pydantic config models and unified loading from YAML/JSON files,
with environment-variable overrides.
"""

import os
from pathlib import Path
from typing import Any, Literal

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .exceptions import ConfigurationError

CONFIG_DIR_NAME = ".mini-vtn"


# Load environment variables from .env file
# Search for .env in the same priority order as config files
def _load_env_file():
    """Load .env file from config directories with priority order."""
    candidates = [
        Path.cwd() / "mini_vtn" / "config" / ".env",
        Path.home() / CONFIG_DIR_NAME / "config" / ".env",
        Path(__file__).parent / "config" / ".env",
        Path.cwd() / ".env",
    ]
    for env_file in candidates:
        if env_file.exists():
            load_dotenv(env_file)
            return


_load_env_file()


class ModelConfig(BaseModel):
    """Classifier shape: frame embedding, encoder stack and readout."""

    feature_width: int = Field(default=512, ge=2)
    head_count: int = Field(default=8, ge=1)
    stage_count: int = Field(default=6, ge=1)
    sequence_length: int = Field(default=40, ge=1)
    class_count: int = Field(default=25, ge=2)
    ffn_width: int | None = Field(default=None, ge=1)  # None means 4 * feature_width
    input_frame_dim: int = Field(default=512, ge=1)
    attention: Literal["pyramid", "uniform"] = "pyramid"
    positional_encoding: bool = True
    precision: Literal["float32", "float64"] = "float32"

    @property
    def ffn_dim(self) -> int:
        return self.ffn_width or 4 * self.feature_width

    @model_validator(mode="after")
    def _check_head_layout(self) -> "ModelConfig":
        width, heads = self.feature_width, self.head_count
        if self.attention == "pyramid" and width % (2 ** (heads - 1)):
            raise ValueError(
                f"feature_width {width} must be divisible by {2 ** (heads - 1)} for {heads} pyramid heads"
            )
        if self.attention == "uniform" and width % heads:
            raise ValueError(f"feature_width {width} must be divisible by head_count {heads}")
        if self.positional_encoding and width % 2:
            raise ValueError(f"sinusoidal positional encoding needs an even feature_width, got {width}")
        return self


class SynthConfig(BaseModel):
    """Synthetic multi-stream gesture data."""

    class_count: int = Field(default=5, ge=2)
    sequence_length: int = Field(default=40, ge=1)
    frame_dim: int = Field(default=64, ge=1)
    stream_count: int = Field(default=1, ge=1)
    train_size: int = Field(default=200, ge=1)
    test_size: int = Field(default=100, ge=1)
    noise_sigma: float = Field(default=0.5, ge=0.0)
    cross_stream_correlation: float = Field(default=0.0, ge=0.0, le=1.0)
    latent_dim: int = Field(default=4, ge=1)  # sinusoid channels per class template
    seed: int = 0

    @classmethod
    def matching(cls, model: ModelConfig, **overrides: Any) -> "SynthConfig":
        """Data whose class count, sequence length and frame width fit ``model``."""
        fields = {
            "class_count": model.class_count,
            "sequence_length": model.sequence_length,
            "frame_dim": model.input_frame_dim,
        }
        return cls(**{**fields, **overrides})


class TrainConfig(BaseModel):
    """Optimizer, schedule and data source for one training run."""

    model: ModelConfig = Field(default_factory=ModelConfig)
    data: SynthConfig | None = None
    dataset_path: str | None = None
    test_dataset_path: str | None = None
    stream: str | None = None  # modality tag; None picks the first stream
    learning_rate: float = Field(default=1e-4, gt=0.0)
    decay_epochs: list[int] = Field(default_factory=lambda: [50, 75])
    decay_factor: float = Field(default=0.1, gt=0.0, le=1.0)
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = Field(default=1e-8, gt=0.0)
    epochs: int = Field(default=100, ge=1)
    batch_size: int = Field(default=8, ge=1)
    workers: int = Field(default=1, ge=1)
    seed: int = 0

    @field_validator("decay_epochs")
    @classmethod
    def _strictly_increasing(cls, value: list[int]) -> list[int]:
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError(f"decay_epochs must be strictly increasing, got {value}")
        if any(epoch < 1 for epoch in value):
            raise ValueError(f"decay_epochs are 1-based, got {value}")
        return value

    @field_validator("adam_betas")
    @classmethod
    def _betas_in_range(cls, value: tuple[float, float]) -> tuple[float, float]:
        if not all(0.0 <= beta < 1.0 for beta in value):
            raise ValueError(f"adam_betas must lie in [0, 1), got {value}")
        return value

    @model_validator(mode="after")
    def _check_data_matches_model(self) -> "TrainConfig":
        if self.data is None:
            return self
        mismatches = [
            f"{data_field}={getattr(self.data, data_field)} vs model.{model_field}={getattr(self.model, model_field)}"
            for data_field, model_field in (
                ("class_count", "class_count"),
                ("sequence_length", "sequence_length"),
                ("frame_dim", "input_frame_dim"),
            )
            if getattr(self.data, data_field) != getattr(self.model, model_field)
        ]
        if mismatches:
            raise ValueError("data and model disagree: " + ", ".join(mismatches))
        return self


def tiny_model_config() -> ModelConfig:
    """Smallest configuration the end-to-end gradient check runs on."""
    return ModelConfig(
        feature_width=8,
        head_count=2,
        stage_count=2,
        sequence_length=4,
        class_count=3,
        input_frame_dim=6,
        precision="float64",
    )


class GradcheckConfig(BaseModel):
    """End-to-end finite-difference suite."""

    model: ModelConfig = Field(default_factory=tiny_model_config)
    seeds: int = Field(default=20, ge=1)
    tolerance: float = Field(default=1e-4, gt=0.0)
    eps: float = Field(default=1e-5, gt=0.0)
    max_entries_per_tensor: int | None = Field(default=None, ge=1)  # None checks every entry


class BenchConfig(BaseModel):
    """Attention cost benchmark grid."""

    feature_widths: list[int] = Field(default_factory=lambda: [64, 128, 256, 512])
    head_counts: list[int] = Field(default_factory=lambda: [1, 2, 4, 8])
    sequence_lengths: list[int] = Field(default_factory=lambda: [40])
    repeats: int = Field(default=5, ge=1)
    seed: int = 0


class Config(BaseModel):
    """Main configuration class"""

    train: TrainConfig = Field(default_factory=TrainConfig)
    gradcheck: GradcheckConfig = Field(default_factory=GradcheckConfig)
    bench: BenchConfig = Field(default_factory=BenchConfig)
    log_dir: str | None = None

    @classmethod
    def load(cls) -> "Config":
        """Load configuration from the default search path, or defaults if none is found."""
        config_path = cls.find_config_file("config.yaml")
        if config_path is None:
            return cls.from_dict({})
        return cls.from_yaml(config_path)

    @classmethod
    def from_yaml(cls, config_path: str | Path) -> "Config":
        """Load configuration from a YAML or JSON file

        Training fields live at the top level (mirroring TrainConfig); ``gradcheck``,
        ``bench`` and ``log_dir`` are separate sections.

        Args:
            config_path: Configuration file path

        Returns:
            Config instance

        Raises:
            FileNotFoundError: Configuration file does not exist
            ConfigurationError: Invalid configuration format or values
        """
        config_path = Path(config_path)

        if not config_path.exists():
            raise FileNotFoundError(f"Configuration file does not exist: {config_path}")

        with open(config_path, encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ConfigurationError(f"Cannot parse {config_path}: {e}") from e

        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigurationError(f"{config_path} must contain a mapping at the top level")

        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Config":
        """Build a Config from a parsed mapping, applying environment overrides."""
        data = dict(data)
        sections = {key: data.pop(key) for key in ("gradcheck", "bench", "log_dir") if key in data}

        env_seed = os.getenv("MINI_VTN_SEED")
        if env_seed is not None:
            try:
                seed = int(env_seed)
            except ValueError as e:
                raise ConfigurationError(f"MINI_VTN_SEED must be an integer, got {env_seed!r}") from e
            data["seed"] = seed
            if isinstance(data.get("data"), dict):
                data["data"] = {**data["data"], "seed": seed}
            sections["bench"] = {**(sections.get("bench") or {}), "seed": seed}

        try:
            return cls(
                train=TrainConfig(**data),
                gradcheck=GradcheckConfig(**(sections.get("gradcheck") or {})),
                bench=BenchConfig(**(sections.get("bench") or {})),
                log_dir=os.getenv("MINI_VTN_LOG_DIR") or sections.get("log_dir"),
            )
        except ValidationError as e:
            raise ConfigurationError(f"Invalid configuration: {e}") from e

    @staticmethod
    def get_package_dir() -> Path:
        """Get the package installation directory"""
        return Path(__file__).parent

    @classmethod
    def find_config_file(cls, filename: str) -> Path | None:
        """Find configuration file with priority order

        1) mini_vtn/config/{filename} in current directory (development mode)
        2) ~/.mini-vtn/config/{filename} in user home directory
        3) {package}/config/{filename} in package installation directory

        Args:
            filename: Configuration file name (e.g., "config.yaml")

        Returns:
            Path to found config file, or None if not found
        """
        for candidate in (
            Path.cwd() / "mini_vtn" / "config" / filename,
            Path.home() / CONFIG_DIR_NAME / "config" / filename,
            cls.get_package_dir() / "config" / filename,
        ):
            if candidate.exists():
                return candidate
        return None
