"""Cosine DDPM noise schedule, recomputed independently on the trainer side.

The cumulative products are exported next to the weights so the consumer can
refuse to run them under a different schedule (numerical agreement to 1e-6
elementwise is the contract; in practice the two computations match to
machine precision).
"""

from __future__ import annotations

import numpy as np


def cosine_alpha_bars(t_train: int = 1000, s_offset: float = 0.008) -> np.ndarray:
    """alpha_bar_t = prod(1 - beta_t) with beta_t = min(1 - f(t)/f(t-1), 0.999),
    f(t) = cos^2(((t/T + s) / (1 + s)) * pi/2)."""
    if t_train < 2:
        raise ValueError("t_train must be >= 2")
    t = np.arange(t_train + 1, dtype=np.float64)
    f = np.cos(((t / t_train + s_offset) / (1.0 + s_offset)) * (np.pi / 2.0)) ** 2
    betas = np.minimum(1.0 - f[1:] / f[:-1], 0.999)
    return np.cumprod(1.0 - betas)
