"""Fast initial reconstructions used as the conditioning input.

Produces a dealiased-but-blurry magnitude video from undersampled multi-coil
k-space. Two built-in reconstructors: plain zero-filling, and temporal
view-sharing (nearest sampled neighbor per ky line). A learned reconstructor
can be slotted in externally by supplying its output video through the CLI.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .operators import ifft2c, rss_combine
from .phantom import KSpaceData

RECON_KINDS = ("zero_filled", "view_share")


@dataclass(frozen=True)
class InitialReconstructor:
    kind: str = "view_share"
    window: int = 4

    def __post_init__(self) -> None:
        if self.kind not in RECON_KINDS:
            raise ValueError(f"unknown reconstructor kind: {self.kind!r}")
        if self.window < 0:
            raise ValueError("view-share window must be non-negative")

    def __call__(self, ksp: KSpaceData) -> np.ndarray:
        if self.kind == "zero_filled":
            return zero_filled(ksp)
        return view_share(ksp, self.window)


def zero_filled(ksp: KSpaceData) -> np.ndarray:
    """RSS of the per-coil inverse FFTs of the masked k-space, real [T, H, W]."""
    coil_imgs = ifft2c(ksp.data)  # [C, T, H, W], coil axis first
    return rss_combine(coil_imgs).astype(np.float64)


def share_sources(mask: np.ndarray, window: int) -> np.ndarray:
    """Per (frame, ky) index of the frame whose line to borrow, -1 if none.

    A sampled line borrows from itself. Missing lines take the nearest sampled
    frame within cyclic distance `window`; on a distance tie the earlier
    (preceding) frame wins.
    """
    n_frames, height = mask.shape
    src = np.full((n_frames, height), -1, dtype=np.int64)
    src[mask] = np.nonzero(mask)[0]
    for d in range(1, window + 1):
        for step in (-d, d):  # earlier frame first at each distance
            cand = np.roll(mask, -step, axis=0)
            take = (src == -1) & cand
            src[take] = (np.nonzero(take)[0] + step) % n_frames
    return src


def view_share(ksp: KSpaceData, window: int) -> np.ndarray:
    """Temporal view-sharing reconstruction, real [T, H, W].

    Fills each missing ky line from the nearest frame (|dt| <= window, cyclic)
    where that line was sampled, then reconstructs like zero_filled. Lines with
    no donor stay zero; window 0 degenerates to zero_filled. With a lattice
    mask of acceleration R, window >= R/2 fills every line.
    """
    if ksp.mask.scheme != "lattice":
        warnings.warn(
            f"view sharing assumes an interleaved mask; got scheme {ksp.mask.scheme!r}",
            stacklevel=2,
        )
    src = share_sources(ksp.mask.pattern, window)
    filled = np.where(
        (src >= 0)[None, :, :, None],
        ksp.data[:, np.maximum(src, 0), np.arange(src.shape[1])[None, :], :],
        0.0,
    )
    shared = KSpaceData(data=filled, mask=ksp.mask)
    return zero_filled(shared)


def reconstruct(ksp: KSpaceData, recon: InitialReconstructor) -> np.ndarray:
    return recon(ksp)
