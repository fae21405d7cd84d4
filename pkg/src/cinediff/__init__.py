"""Desk-scale diffusion enhancement pipeline for dynamic 2D+time MRI.

Simulates undersampled multi-coil cine acquisitions, reconstructs them with
fast classical stand-ins, and sharpens the result with a short, windowed,
partially-started reverse diffusion chain followed by a k-space restore step.
Everything is deterministic given a seed, including threaded runs.
"""

__version__ = "0.1.0"

from .denoiser import (
    DenoiserInput,
    GaussianPriorDenoiser,
    OracleDenoiser,
    TinyCondNetDenoiser,
)
from .initialrecon import InitialReconstructor, view_share, zero_filled
from .mimo import WindowPlan, make_plan, ungroup, window
from .operators import fft2c, ifft2c, kspace_replace, pseudo_dc, rss_combine
from .phantom import (
    CoilSensitivities,
    KSpaceData,
    PhantomConfig,
    SamplingMask,
    generate_coils,
    generate_mask,
    generate_phantom,
    simulate_kspace,
)
from .sampler import (
    EnhanceConfig,
    NormalizationRecord,
    RunStats,
    ccdf_start,
    enhance_video,
    make_normalization,
)
from .schedule import make_schedule, posterior_step, q_sample, respace
from .tensorio import load_weights, read_tensor, save_weights, write_tensor

__all__ = [
    "__version__",
    "CoilSensitivities",
    "DenoiserInput",
    "EnhanceConfig",
    "GaussianPriorDenoiser",
    "InitialReconstructor",
    "KSpaceData",
    "NormalizationRecord",
    "OracleDenoiser",
    "PhantomConfig",
    "RunStats",
    "SamplingMask",
    "TinyCondNetDenoiser",
    "WindowPlan",
    "ccdf_start",
    "enhance_video",
    "fft2c",
    "generate_coils",
    "generate_mask",
    "generate_phantom",
    "ifft2c",
    "kspace_replace",
    "load_weights",
    "make_normalization",
    "make_plan",
    "make_schedule",
    "posterior_step",
    "pseudo_dc",
    "q_sample",
    "read_tensor",
    "respace",
    "rss_combine",
    "save_weights",
    "simulate_kspace",
    "ungroup",
    "view_share",
    "window",
    "write_tensor",
    "zero_filled",
]
