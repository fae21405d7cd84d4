"""End-to-end enhancement pipeline.

Takes an initial magnitude reconstruction, normalizes it, splits it into
G-frame windows, starts reverse diffusion from a noised copy of the
reconstruction itself (partial diffusion, not pure noise), runs a short
respaced chain per window with the reconstruction as fixed conditioning,
reassembles the frames, undoes the normalization, and finally restores the
sampled k-space lines from the input (pseudo data consistency).

Windows are independent work units. All noise comes from counter-based
substreams keyed (seed, window) and (seed, window, step), so results are
bit-identical regardless of thread count or scheduling order.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import mimo, rng
from .denoiser import Denoiser, DenoiserInput
from .operators import pseudo_dc
from .phantom import SamplingMask
from .schedule import RespacedSchedule, make_schedule, posterior_step, q_sample, respace


class SamplerError(RuntimeError):
    pass


@dataclass(frozen=True)
class EnhanceConfig:
    t_train: int = 1000
    respace_steps: int = 50
    infer_steps: int = 10
    group: int = 3
    eta: int = 0
    seed: int = 0
    pdc_enabled: bool = True
    norm_percentile: float = 0.99
    threads: int = 1
    schedule_kind: str = "cosine"
    s_offset: float = 0.008

    def validate(self) -> None:
        if not 0 <= self.infer_steps <= self.respace_steps <= self.t_train:
            raise SamplerError(
                f"need infer_steps <= respace_steps <= t_train, got "
                f"{self.infer_steps}/{self.respace_steps}/{self.t_train}"
            )
        if self.group < 1:
            raise SamplerError("group must be >= 1")
        if self.eta not in (0, 1):
            raise SamplerError("eta must be 0 or 1")
        if not 0.0 < self.norm_percentile <= 1.0:
            raise SamplerError("norm_percentile must lie in (0, 1]")
        if self.threads < 1:
            raise SamplerError("threads must be >= 1")


@dataclass(frozen=True)
class NormalizationRecord:
    """Affine map into the sampler's [-1, 1] working range.

    forward: u = clip(x / scale, 0, 2) - 1; inverse: x = (u + 1) * scale.
    Exactly invertible on [0, 2 * scale].
    """

    scale: float
    percentile: float

    def forward(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x / self.scale, 0.0, 2.0) - 1.0

    def inverse(self, u: np.ndarray) -> np.ndarray:
        return (u + 1.0) * self.scale


def make_normalization(video: np.ndarray, percentile: float = 0.99) -> NormalizationRecord:
    scale = float(np.quantile(video, percentile))
    if scale <= 0.0:
        raise SamplerError("normalization scale is not positive; input video is degenerate")
    return NormalizationRecord(scale=scale, percentile=percentile)


@dataclass(frozen=True)
class SamplingContext:
    """Run-wide read-only state handed to Denoiser.prepare()."""

    norm: NormalizationRecord
    plan: mimo.WindowPlan
    resched: RespacedSchedule
    cfg: EnhanceConfig


@dataclass
class RunStats:
    nfe: int
    steps: int
    windows: int
    wall_ms: float
    dc_merged: np.ndarray | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {"nfe": self.nfe, "steps": self.steps, "windows": self.windows, "wall_ms": self.wall_ms}


def ccdf_start(
    dlrecon_group: np.ndarray, i0: int, resched: RespacedSchedule, gen: np.random.Generator
) -> np.ndarray:
    """Noise the initial recon up to respaced step i0 instead of sampling pure noise."""
    eps = gen.standard_normal(dlrecon_group.shape)
    return q_sample(dlrecon_group, i0, eps, resched)


def _run_window(
    w: int,
    cond: np.ndarray,
    frames: tuple[int, ...],
    cfg: EnhanceConfig,
    resched: RespacedSchedule,
    denoiser: Denoiser,
) -> tuple[np.ndarray, int]:
    steps = cfg.infer_steps
    x = ccdf_start(cond, steps, resched, rng.substream(cfg.seed, rng.DIFFUSION_START, w))
    calls = 0
    for i in range(steps, 0, -1):
        inp = DenoiserInput(noisy=x, condition=cond, timestep=resched.timestep(i), frames=frames)
        eps_hat = denoiser.predict(inp)
        calls += 1
        z = None
        if cfg.eta == 1 and i > 1:
            z = rng.substream(cfg.seed, rng.DIFFUSION_STEP, w, i).standard_normal(x.shape)
        x = posterior_step(x, eps_hat, i, resched, z=z, eta=cfg.eta)
        if not np.isfinite(x).all():
            raise SamplerError(f"non-finite state in window {w} at step {i}")
    return x, calls


def enhance_video(
    dlrecon: np.ndarray,
    cfg: EnhanceConfig,
    denoiser: Denoiser,
    mask: SamplingMask | None = None,
    keep_dc_merged: bool = False,
) -> tuple[np.ndarray, RunStats]:
    """Full pipeline: normalize, window, diffuse, reassemble, denormalize, pDC.

    dlrecon is the conditioning video [T, H, W]; mask is required when pDC is
    enabled. With infer_steps == 0 the diffusion stage is a no-op and the
    output is dlrecon after pDC projection (a fixed point).
    """
    cfg.validate()
    dlrecon = np.asarray(dlrecon, dtype=np.float64)
    if dlrecon.ndim != 3:
        raise SamplerError(f"expected a [T, H, W] video, got shape {dlrecon.shape}")
    if cfg.pdc_enabled and mask is None:
        raise SamplerError("pseudo data consistency needs the sampling mask")

    t0 = time.perf_counter()
    norm = make_normalization(dlrecon, cfg.norm_percentile)
    resched = respace(make_schedule(cfg.schedule_kind, cfg.t_train, cfg.s_offset), cfg.respace_steps)
    groups, plan = mimo.window(norm.forward(dlrecon), cfg.group)
    denoiser.prepare(SamplingContext(norm=norm, plan=plan, resched=resched, cfg=cfg))

    if cfg.infer_steps == 0:
        enhanced = dlrecon.copy()
        nfe = 0
    else:
        def job(w: int) -> tuple[np.ndarray, int]:
            return _run_window(w, groups[w], plan.frames[w], cfg, resched, denoiser)

        if cfg.threads == 1:
            results = [job(w) for w in range(plan.n_windows)]
        else:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                results = list(pool.map(job, range(plan.n_windows)))
        enhanced = norm.inverse(mimo.ungroup([r[0] for r in results], plan))
        nfe = sum(r[1] for r in results)

    merged = None
    if cfg.pdc_enabled:
        if keep_dc_merged:
            out, merged = pseudo_dc(enhanced, dlrecon, mask, return_merged=True)
        else:
            out = pseudo_dc(enhanced, dlrecon, mask)
    else:
        out = np.maximum(enhanced, 0.0)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    stats = RunStats(
        nfe=nfe, steps=cfg.infer_steps, windows=plan.n_windows, wall_ms=wall_ms, dc_merged=merged
    )
    return out, stats
