"""Mini VTN - multiscaled multi-head attention video transformer on a small numpy autograd."""

from .config import Config, ModelConfig, SynthConfig, TrainConfig
from .exceptions import MiniVtnError
from .fusion import late_fuse
from .nn import VideoTransformer, head_schedule, msmha
from .schema import ClassPosterior, FusionResult
from .tensor import Tensor

__version__ = "0.1.0"

__all__ = [
    "ClassPosterior",
    "Config",
    "FusionResult",
    "MiniVtnError",
    "ModelConfig",
    "SynthConfig",
    "Tensor",
    "TrainConfig",
    "VideoTransformer",
    "head_schedule",
    "late_fuse",
    "msmha",
]
