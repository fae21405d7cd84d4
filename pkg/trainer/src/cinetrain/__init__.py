"""Standalone trainer for the cinediff conditional denoiser.

Shares no code with the consumer package: the binary tensor and weights
formats are the entire contract.
"""

from .data import VideoPair, discover, load_pair, sample_batch
from .formats import FormatError, checksums, load_weights, read_tensor, save_weights, write_tensor
from .model import TinyCondNet, from_arrays, parameter_count, time_embedding, to_arrays
from .schedule import cosine_alpha_bars
from .train import TrainConfig, TrainError, TrainResult, export_fixture, load_model, train

__version__ = "0.1.0"

__all__ = [
    "FormatError",
    "TinyCondNet",
    "TrainConfig",
    "TrainError",
    "TrainResult",
    "VideoPair",
    "checksums",
    "cosine_alpha_bars",
    "discover",
    "export_fixture",
    "from_arrays",
    "load_model",
    "load_pair",
    "load_weights",
    "parameter_count",
    "read_tensor",
    "sample_batch",
    "save_weights",
    "time_embedding",
    "to_arrays",
    "train",
    "write_tensor",
    "__version__",
]
