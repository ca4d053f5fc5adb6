"""Online periodicity-based speech enhancement with a complex gammatone filterbank."""

from .config import ConfigError, RunConfig, load_config
from .pipeline import Enhancer, FrameResult, enhance, track_pitch

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Enhancer",
    "FrameResult",
    "RunConfig",
    "enhance",
    "load_config",
    "track_pitch",
]
