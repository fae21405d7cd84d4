"""Frame grouping for multi-in-multi-out processing.

A T-phase video is split into non-overlapping windows of G consecutive frames
that travel through the network as channels, dividing the number of model
calls by G. When G does not divide T the tail window wraps around to the
start of the cycle; on reassembly those wrapped duplicates are dropped, so
window/ungroup is an exact round trip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WindowPlan:
    n_frames: int
    group: int
    frames: tuple[tuple[int, ...], ...]  # source frame index per (window, slot)

    @property
    def n_windows(self) -> int:
        return len(self.frames)

    @property
    def padded_length(self) -> int:
        return self.n_windows * self.group

    @property
    def n_padded(self) -> int:
        return self.padded_length - self.n_frames


def make_plan(n_frames: int, group: int) -> WindowPlan:
    if n_frames < 1 or group < 1:
        raise ValueError("n_frames and group must be >= 1")
    n_windows = math.ceil(n_frames / group)
    frames = tuple(
        tuple((w * group + j) % n_frames for j in range(group))
        for w in range(n_windows)
    )
    return WindowPlan(n_frames=n_frames, group=group, frames=frames)


def window(video: np.ndarray, group: int) -> tuple[list[np.ndarray], WindowPlan]:
    """Split [T, H, W] into ceil(T/G) groups of shape [G, H, W]."""
    video = np.asarray(video)
    if video.ndim != 3:
        raise ValueError(f"expected a [T, H, W] video, got shape {video.shape}")
    plan = make_plan(video.shape[0], group)
    groups = [video[list(idx)].copy() for idx in plan.frames]
    return groups, plan


def ungroup(groups: list[np.ndarray], plan: WindowPlan) -> np.ndarray:
    """Reassemble windows into [T, H, W]; cyclic pad slots are discarded."""
    if len(groups) != plan.n_windows:
        raise ValueError(f"plan expects {plan.n_windows} windows, got {len(groups)}")
    first = np.asarray(groups[0])
    if first.ndim != 3 or first.shape[0] != plan.group:
        raise ValueError(f"groups must be [G={plan.group}, H, W], got shape {first.shape}")
    out = np.empty((plan.n_frames,) + first.shape[1:], dtype=first.dtype)
    for w, g in enumerate(groups):
        g = np.asarray(g)
        if g.shape != first.shape:
            raise ValueError("all groups must share one shape")
        for j in range(plan.group):
            slot = w * plan.group + j
            if slot < plan.n_frames:  # wrapped duplicates never written back
                out[slot] = g[j]
    return out
