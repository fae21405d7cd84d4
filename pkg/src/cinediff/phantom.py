"""Simulated dynamic cardiac-like acquisitions.

Stands in for clinical cine data: a beating-annulus phantom, smooth complex
coil sensitivities, interleaved real-time undersampling masks, and noisy
multi-coil k-space. Everything is deterministic given the config seed, with
per-(coil, frame) noise substreams so generation can be parallelized without
changing results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .operators import fft2c

TORSO_INTENSITY = 0.3
BLOB_INTENSITIES = (0.5, 0.7)
MYOCARDIUM_INTENSITY = 0.9
# Metadata only; mirrors a typical cine voxel size, nothing downstream uses it.
PIXEL_SPACING_MM = 1.82


class PhantomConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PhantomConfig:
    height: int = 64
    width: int = 64
    n_frames: int = 25
    n_coils: int = 8
    cycle_amplitude: float = 0.15
    noise_sigma: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.height < 16 or self.width < 16:
            raise PhantomConfigError("height and width must be >= 16")
        if self.n_frames < 3:
            raise PhantomConfigError("need at least 3 cardiac phases")
        if self.n_coils < 1:
            raise PhantomConfigError("need at least one coil")
        if not 0.0 <= self.cycle_amplitude < 0.5:
            raise PhantomConfigError("cycle_amplitude must lie in [0, 0.5)")
        if self.noise_sigma < 0.0:
            raise PhantomConfigError("noise_sigma must be non-negative")
        geo = _geometry(self)
        if base_inner_radius(self) >= geo["myo"][2] - 0.5:
            raise PhantomConfigError("annulus radii cross: inner radius reaches the outer wall")


@dataclass(frozen=True)
class SamplingMask:
    """Boolean phase-encode pattern [T, H]; a true entry samples a whole ky line."""

    pattern: np.ndarray
    accel: int
    n_center: int
    scheme: str

    @property
    def effective_accel(self) -> float:
        return self.pattern.size / float(np.count_nonzero(self.pattern))

    def lines_per_frame(self) -> np.ndarray:
        return np.count_nonzero(self.pattern, axis=1)


@dataclass(frozen=True)
class CoilSensitivities:
    maps: np.ndarray  # complex [C, H, W], RSS-normalized to 1 pointwise


@dataclass(frozen=True)
class KSpaceData:
    data: np.ndarray  # complex [C, T, H, W]; unsampled entries exactly zero
    mask: SamplingMask


def base_inner_radius(cfg: PhantomConfig) -> float:
    """Diastolic (t = 0) inner radius of the myocardium annulus, in pixels."""
    return 0.16 * min(cfg.height, cfg.width)


def annulus_row(cfg: PhantomConfig) -> int:
    """Image row through the annulus center; the natural x-t profile cut."""
    return int(round((cfg.height - 1) / 2.0 + 0.08 * min(cfg.height, cfg.width)))


def inner_radius(cfg: PhantomConfig, t: int) -> float:
    """Inner radius at phase t: r0 * (1 - a * (1 - cos(2 pi t / T)) / 2).

    The phase angle uses t mod T, so the cycle is exactly periodic.
    """
    r0 = base_inner_radius(cfg)
    phase = 2.0 * math.pi * (t % cfg.n_frames) / cfg.n_frames
    return r0 * (1.0 - cfg.cycle_amplitude * (1.0 - math.cos(phase)) / 2.0)


def _geometry(cfg: PhantomConfig) -> dict:
    """Ellipse parameters (cy, cx, ry, rx) in pixels; blob placement is seed-jittered."""
    h, w = cfg.height, cfg.width
    m = min(h, w)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    g = rng.substream(cfg.seed, rng.PHANTOM_GEOMETRY)
    jitter = g.uniform(-0.03, 0.03, size=4) * m
    stretch = g.uniform(0.9, 1.1, size=4)
    return {
        "torso": (cy, cx, 0.42 * h, 0.46 * w),
        "blob_a": (cy - 0.18 * m + jitter[0], cx - 0.22 * m + jitter[1], 0.11 * m * stretch[0], 0.08 * m * stretch[1]),
        "blob_b": (cy - 0.12 * m + jitter[2], cx + 0.22 * m + jitter[3], 0.12 * m * stretch[2], 0.09 * m * stretch[3]),
        "myo": (cy + 0.08 * m, cx - 0.06 * m, 0.22 * m, 0.22 * m),
    }


def _paint_ellipse(img: np.ndarray, cy: float, cx: float, ry: float, rx: float, value: float) -> None:
    """Alpha-composite an ellipse with a ~1 px soft edge (keeps values in [0, 1])."""
    h, w = img.shape
    yy = np.arange(h, dtype=np.float64)[:, None]
    xx = np.arange(w, dtype=np.float64)[None, :]
    d = np.sqrt(((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2)
    edge = 1.0 / min(ry, rx)
    alpha = np.clip((1.0 - d) / edge + 0.5, 0.0, 1.0)
    img *= 1.0 - alpha
    img += alpha * value


def render_frame(cfg: PhantomConfig, t: int) -> np.ndarray:
    """Ground-truth magnitude image of cardiac phase t, float32 in [0, 1]."""
    geo = _geometry(cfg)
    img = np.zeros((cfg.height, cfg.width), dtype=np.float64)
    _paint_ellipse(img, *geo["torso"], TORSO_INTENSITY)
    _paint_ellipse(img, *geo["blob_a"], BLOB_INTENSITIES[0])
    _paint_ellipse(img, *geo["blob_b"], BLOB_INTENSITIES[1])
    cy, cx, r_out, _ = geo["myo"]
    _paint_ellipse(img, cy, cx, r_out, r_out, MYOCARDIUM_INTENSITY)
    r_in = inner_radius(cfg, t)
    _paint_ellipse(img, cy, cx, r_in, r_in, TORSO_INTENSITY)
    return img.astype(np.float32)


def generate_phantom(cfg: PhantomConfig) -> np.ndarray:
    """Ground-truth cine volume [T, H, W], float32 in [0, 1]."""
    cfg.validate()
    return np.stack([render_frame(cfg, t) for t in range(cfg.n_frames)])


def generate_coils(height: int, width: int, n_coils: int, seed: int = 0) -> CoilSensitivities:
    """Gaussian-profile coil maps on a ring, RSS-normalized to 1 at every pixel.

    Coil centers sit at equally spaced angles on a circle of radius
    0.6 * min(H, W) / 2; the seed only randomizes the smooth phase ramps.
    """
    if n_coils < 1:
        raise ValueError("need at least one coil")
    m = min(height, width)
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    ring = 0.6 * m / 2.0
    sigma = 0.5 * m
    yy = np.arange(height, dtype=np.float64)[:, None]
    xx = np.arange(width, dtype=np.float64)[None, :]
    maps = np.empty((n_coils, height, width), dtype=np.complex128)
    for c in range(n_coils):
        angle = 2.0 * math.pi * c / n_coils
        ccy, ccx = cy + ring * math.sin(angle), cx + ring * math.cos(angle)
        mag = np.exp(-((yy - ccy) ** 2 + (xx - ccx) ** 2) / (2.0 * sigma**2))
        g = rng.substream(seed, rng.COIL_PHASE, c)
        gy, gx = g.uniform(-0.5, 0.5, size=2)
        phi0 = g.uniform(0.0, 2.0 * math.pi)
        phase = 2.0 * math.pi * (gy * yy + gx * xx) / m + phi0
        maps[c] = mag * np.exp(1j * phase)
    maps /= np.sqrt(np.sum(np.abs(maps) ** 2, axis=0))[None]
    return CoilSensitivities(maps=maps)


def generate_mask(
    n_frames: int,
    height: int,
    accel: int,
    n_center: int = 4,
    scheme: str = "lattice",
    seed: int = 0,
) -> SamplingMask:
    """Per-frame phase-encode sampling pattern.

    lattice: frame t samples {ky : ky mod R == t mod R} plus the center block,
    so any R consecutive frames cover every line. uniform_random: per frame,
    ceil(H/R) lines drawn without replacement plus the center block.
    """
    if not 1 <= accel <= height:
        raise ValueError(f"acceleration {accel} out of range [1, {height}]")
    if n_center % 2 != 0 or n_center < 0 or n_center > height // 4:
        raise ValueError("n_center must be even and at most H/4")
    if scheme not in ("lattice", "uniform_random"):
        raise ValueError(f"unknown mask scheme: {scheme!r}")
    pattern = np.zeros((n_frames, height), dtype=bool)
    center = slice(height // 2 - n_center // 2, height // 2 + n_center // 2)
    for t in range(n_frames):
        if scheme == "lattice":
            pattern[t, np.arange(t % accel, height, accel)] = True
        else:
            g = rng.substream(seed, rng.MASK_LINES, t)
            lines = g.choice(height, size=math.ceil(height / accel), replace=False)
            pattern[t, lines] = True
        pattern[t, center] = True
    return SamplingMask(pattern=pattern, accel=accel, n_center=n_center, scheme=scheme)


def simulate_kspace(
    gt: np.ndarray,
    coils: CoilSensitivities,
    mask: SamplingMask,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> KSpaceData:
    """Masked multi-coil k-space of the ground truth, with complex Gaussian noise.

    k[c, t] = mask[t] * (fft2c(gt[t] * maps[c]) + noise), one noise substream
    per (coil, frame).
    """
    gt = np.asarray(gt)
    n_coils, height, width = coils.maps.shape
    if gt.ndim != 3 or gt.shape[1:] != (height, width):
        raise ValueError(f"ground truth shape {gt.shape} does not match coil maps {coils.maps.shape}")
    n_frames = gt.shape[0]
    if mask.pattern.shape != (n_frames, height):
        raise ValueError(f"mask shape {mask.pattern.shape} does not match [T={n_frames}, H={height}]")
    data = np.zeros((n_coils, n_frames, height, width), dtype=np.complex128)
    for c in range(n_coils):
        for t in range(n_frames):
            k = fft2c(gt[t] * coils.maps[c])
            if noise_sigma > 0.0:
                k = k + rng.complex_normal(rng.substream(seed, rng.KSPACE_NOISE, c, t), (height, width), noise_sigma)
            data[c, t] = np.where(mask.pattern[t][:, None], k, 0.0)
    return KSpaceData(data=data, mask=mask)
