"""Quality metrics, temporal-profile export, and the cost benchmark harness.

PSNR and SSIM quantify spatial fidelity; temporal gradient energy (TGE) is a
sharpness proxy for motion rendition: blurred reconstructions smear frame-to-
frame change, so their TGE drops below the ground truth's. The bench harness
accounts inference cost in denoiser calls (NFE), the hardware-independent
currency, alongside measured wall time.

Profile images are written as binary PGM (P5), an 8-bit grayscale format with
a three-line ASCII header, so no imaging library is needed to view them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d

from .denoiser import Denoiser
from .phantom import SamplingMask
from .sampler import EnhanceConfig, enhance_video

PSNR_CAP_DB = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class EvalReport:
    method: str
    psnr: float
    ssim: float
    tge: float

    def as_dict(self) -> dict:
        return {"method": self.method, "psnr": self.psnr, "ssim": self.ssim, "tge": self.tge}


@dataclass(frozen=True)
class BenchReport:
    method: str
    nfe: int
    images: int
    calls_per_image: float
    wall_ms: float  # median over repeats
    wall_ms_runs: tuple[float, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "nfe": self.nfe,
            "images": self.images,
            "calls_per_image": self.calls_per_image,
            "wall_ms": self.wall_ms,
            "wall_ms_runs": list(self.wall_ms_runs),
        }


def psnr(x: np.ndarray, y: np.ndarray, data_range: float) -> float:
    """10*log10(range^2 / MSE), reported as the 99 dB cap for (near-)identical inputs."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if data_range <= 0:
        raise ValueError("data_range must be positive")
    mse = np.mean((x - y) ** 2)
    if mse < 1e-12:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(data_range**2 / mse), PSNR_CAP_DB)


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    r = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(r**2) / (2.0 * sigma**2))
    win = np.outer(g, g)
    return win / win.sum()


def _ssim_frame(x: np.ndarray, y: np.ndarray, data_range: float) -> float:
    win = _gaussian_window()
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mu_x = convolve2d(x, win, mode="valid")
    mu_y = convolve2d(y, win, mode="valid")
    var_x = convolve2d(x * x, win, mode="valid") - mu_x**2
    var_y = convolve2d(y * y, win, mode="valid") - mu_y**2
    cov = convolve2d(x * y, win, mode="valid") - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def ssim(x: np.ndarray, y: np.ndarray, data_range: float = 1.0) -> float:
    """Mean SSIM, 11x11 Gaussian window (sigma 1.5), per frame then averaged."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if x.ndim == 2:
        x, y = x[None], y[None]
    if x.ndim != 3:
        raise ValueError(f"expected [T, H, W] or [H, W], got shape {x.shape}")
    if x.shape[1] < SSIM_WINDOW or x.shape[2] < SSIM_WINDOW:
        raise ValueError(f"frames must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    return float(np.mean([_ssim_frame(x[t], y[t], data_range) for t in range(x.shape[0])]))


def temporal_gradient_energy(video: np.ndarray, roi: tuple[slice, slice] | None = None) -> float:
    """Mean |v[t+1] - v[t]|, optionally restricted to a spatial region."""
    video = np.asarray(video, dtype=np.float64)
    if video.ndim != 3 or video.shape[0] < 2:
        raise ValueError("need a [T, H, W] video with T >= 2")
    if roi is not None:
        video = video[:, roi[0], roi[1]]
    return float(np.mean(np.abs(np.diff(video, axis=0))))


def temporal_profile(video: np.ndarray, row: int) -> np.ndarray:
    """x-t profile: one spatial row against time, shape [T, W]."""
    video = np.asarray(video)
    if video.ndim != 3:
        raise ValueError(f"expected a [T, H, W] video, got shape {video.shape}")
    if not 0 <= row < video.shape[1]:
        raise ValueError(f"row {row} out of range [0, {video.shape[1]})")
    return video[:, row, :].copy()


def temporal_sharpness(profile: np.ndarray) -> float:
    """Mean |d/dt| over an x-t profile; lower values mean temporal blurring."""
    profile = np.asarray(profile, dtype=np.float64)
    if profile.ndim != 2 or profile.shape[0] < 2:
        raise ValueError("need a [T, W] profile with T >= 2")
    return float(np.mean(np.abs(np.diff(profile, axis=0))))


def write_profile_pgm(path, profile: np.ndarray) -> None:
    """8-bit binary PGM (P5), min-max scaled; constant profiles map to black."""
    profile = np.asarray(profile, dtype=np.float64)
    lo, hi = profile.min(), profile.max()
    if hi > lo:
        img = np.round((profile - lo) / (hi - lo) * 255.0)
    else:
        img = np.zeros_like(profile)
    data = img.astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def write_profile_csv(path, profile: np.ndarray) -> None:
    np.savetxt(path, np.asarray(profile, dtype=np.float64), delimiter=",", fmt="%.9g")


def evaluate(
    gt: np.ndarray,
    video: np.ndarray,
    method: str,
    data_range: float | None = None,
    roi: tuple[slice, slice] | None = None,
) -> EvalReport:
    if data_range is None:
        data_range = float(np.max(gt) - np.min(gt))
    return EvalReport(
        method=method,
        psnr=psnr(video, gt, data_range),
        ssim=ssim(video, gt, data_range),
        tge=temporal_gradient_energy(video, roi),
    )


def bench(
    dlrecon: np.ndarray,
    mask: SamplingMask | None,
    runs: list[tuple[str, EnhanceConfig, Denoiser]],
    repeats: int = 3,
) -> list[BenchReport]:
    """Run each config on the same input; NFE is exact, wall time is measured.

    Configs run sequentially (never interleaved) so timings do not contend.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    reports = []
    n_images = dlrecon.shape[0]
    for label, cfg, den in runs:
        walls = []
        nfe = 0
        for _ in range(repeats):
            t0 = time.perf_counter()
            _, stats = enhance_video(dlrecon, cfg, den, mask=mask)
            walls.append((time.perf_counter() - t0) * 1000.0)
            nfe = stats.nfe
        reports.append(
            BenchReport(
                method=label,
                nfe=nfe,
                images=n_images,
                calls_per_image=nfe / n_images,
                wall_ms=float(np.median(walls)),
                wall_ms_runs=tuple(walls),
            )
        )
    return reports
