"""Dataset access: directories of gt.ctns + dlrecon.ctns pairs.

Each training example is produced by the consumer's `phantom` and `recon`
CLI stages; this module only reads the tensor files back. Videos are
normalized exactly the way the consumer normalizes them at inference time:
scale = 0.99-quantile of the initial reconstruction, then
clip(v / scale, 0, 2) - 1 applied to both the reconstruction and the ground
truth. Training in any other domain would hand the network inputs it never
sees in production.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .formats import FormatError, read_tensor

NORM_PERCENTILE = 0.99


@dataclass(frozen=True)
class VideoPair:
    name: str
    gt: np.ndarray  # [T, H, W] float32, normalized to [-1, 1]
    dl: np.ndarray  # same shape and domain
    scale: float


def discover(root: str | Path) -> list[Path]:
    """Run directories under `root` holding both tensor files, sorted by name.
    `root` itself counts when it holds a pair directly."""
    root = Path(root)
    if not root.is_dir():
        raise FormatError(f"dataset directory not found: {root}")
    def has_pair(d: Path) -> bool:
        return (d / "gt.ctns").is_file() and (d / "dlrecon.ctns").is_file()
    if has_pair(root):
        return [root]
    return sorted(d for d in root.iterdir() if d.is_dir() and has_pair(d))


def load_pair(rundir: Path) -> VideoPair:
    gt = read_tensor(rundir / "gt.ctns").astype(np.float64)
    dl = read_tensor(rundir / "dlrecon.ctns").astype(np.float64)
    if gt.ndim != 3 or gt.shape != dl.shape:
        raise FormatError(f"{rundir}: gt {gt.shape} and dlrecon {dl.shape} must be equal [T,H,W]")
    if not (np.isfinite(gt).all() and np.isfinite(dl).all()):
        raise FormatError(f"{rundir}: non-finite values in input tensors")
    scale = float(np.quantile(dl, NORM_PERCENTILE))
    if scale <= 0.0:
        raise FormatError(f"{rundir}: degenerate reconstruction, normalization scale <= 0")
    def norm(v: np.ndarray) -> np.ndarray:
        return (np.clip(v / scale, 0.0, 2.0) - 1.0).astype(np.float32)
    return VideoPair(name=rundir.name, gt=norm(gt), dl=norm(dl), scale=scale)


def sample_batch(
    pairs: list[VideoPair],
    batch_size: int,
    group: int,
    crop: int,
    gen: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Random (gt_group, dl_group) batch, each [B, G, crop, crop] float32.

    Frame windows wrap cyclically, matching how the consumer windows videos.
    """
    gt_out = np.empty((batch_size, group, crop, crop), dtype=np.float32)
    dl_out = np.empty_like(gt_out)
    for b in range(batch_size):
        pair = pairs[int(gen.integers(len(pairs)))]
        t_len, h, w = pair.gt.shape
        if crop > h or crop > w:
            raise FormatError(f"crop {crop} exceeds video size {h}x{w}")
        start = int(gen.integers(t_len))
        frames = [(start + j) % t_len for j in range(group)]
        top = int(gen.integers(h - crop + 1))
        left = int(gen.integers(w - crop + 1))
        gt_out[b] = pair.gt[frames, top : top + crop, left : left + crop]
        dl_out[b] = pair.dl[frames, top : top + crop, left : left + crop]
    return gt_out, dl_out
