"""DDPM noise schedules, timestep respacing, forward noising, ancestral steps.

Conventions: steps are 1-based, matching the usual subscripting
``x_1 .. x_T``. Array index ``t - 1`` holds the coefficients of step ``t``.
A respaced schedule selects a subsequence tau_1 < ... < tau_K of training
steps and recomputes per-step rates so that its cumulative products are
bit-identical to the training schedule's at the selected steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BETA_MAX = 0.999


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step rates beta_t, alpha_t = 1 - beta_t, alpha_bar_t = prod alpha_s."""

    kind: str
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray
    posterior_variances: np.ndarray
    s_offset: float = 0.008

    @property
    def n_steps(self) -> int:
        return len(self.betas)


@dataclass(frozen=True)
class RespacedSchedule:
    """Subsequence schedule for K-step inference over a T-step training schedule."""

    base: NoiseSchedule
    taus: np.ndarray  # 1-based training-step indices, strictly increasing
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray
    posterior_variances: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.taus)

    def _check(self, i: int) -> int:
        if not 1 <= i <= self.n_steps:
            raise IndexError(f"respaced step {i} out of range [1, {self.n_steps}]")
        return i - 1

    def timestep(self, i: int) -> int:
        """Training-schedule index tau_i for respaced step i."""
        return int(self.taus[self._check(i)])

    def alpha_bar(self, i: int) -> float:
        return float(self.alpha_bars[self._check(i)])

    def alpha_bar_at_timestep(self, tau: int) -> float:
        """alpha_bar of the training schedule at step tau (== alpha_bar(i) when tau == tau_i)."""
        if not 1 <= tau <= self.base.n_steps:
            raise IndexError(f"training step {tau} out of range [1, {self.base.n_steps}]")
        return float(self.base.alpha_bars[tau - 1])


def make_schedule(kind: str = "cosine", t_train: int = 1000, s_offset: float = 0.008) -> NoiseSchedule:
    """Build a training noise schedule.

    cosine: alpha_bar_t = f(t)/f(0) with f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2),
    realized through beta_t = min(1 - f(t)/f(t-1), 0.999).
    linear: beta linearly spaced from 1e-4 to 0.02 (scaled by 1000/T).
    """
    if t_train < 2:
        raise ValueError("t_train must be >= 2")
    if kind == "cosine":
        t = np.arange(t_train + 1, dtype=np.float64)
        f = np.cos(((t / t_train + s_offset) / (1.0 + s_offset)) * (np.pi / 2.0)) ** 2
        betas = np.minimum(1.0 - f[1:] / f[:-1], BETA_MAX)
    elif kind == "linear":
        scale = 1000.0 / t_train
        betas = np.minimum(np.linspace(1e-4 * scale, 0.02 * scale, t_train), BETA_MAX)
    else:
        raise ValueError(f"unknown schedule kind: {kind!r}")
    alphas = 1.0 - betas
    alpha_bars = np.cumprod(alphas)
    prev_bars = np.concatenate(([1.0], alpha_bars[:-1]))
    posterior = betas * (1.0 - prev_bars) / (1.0 - alpha_bars)
    return NoiseSchedule(kind, betas, alphas, alpha_bars, posterior, s_offset)


def respace(sched: NoiseSchedule, k: int) -> RespacedSchedule:
    """Select K steps tau_i = round(i*T/K) and recompute the per-step rates.

    beta'_i = 1 - alpha_bar_{tau_i} / alpha_bar_{tau_{i-1}} (alpha_bar_{tau_0} := 1).
    alpha_bar' is copied from the base schedule, never recomputed, so the
    subsequence property holds bit-for-bit. Over single-step segments beta'
    reuses the base beta, the algebraically identical value, which keeps
    identity respacing (K == T) exact.
    """
    t = sched.n_steps
    if not 1 <= k <= t:
        raise ValueError(f"respace count {k} out of range [1, {t}]")
    i = np.arange(1, k + 1, dtype=np.int64)
    taus = (2 * i * t + k) // (2 * k)  # round(i*T/K), half away from zero
    alpha_bars = sched.alpha_bars[taus - 1].copy()
    prev_bars = np.concatenate(([1.0], alpha_bars[:-1]))
    betas = 1.0 - alpha_bars / prev_bars
    single = np.diff(np.concatenate(([0], taus))) == 1
    betas[single] = sched.betas[taus[single] - 1]
    alphas = 1.0 - betas
    posterior = betas * (1.0 - prev_bars) / (1.0 - alpha_bars)
    return RespacedSchedule(sched, taus, betas, alphas, alpha_bars, posterior)


def q_sample(x0: np.ndarray, i: int, eps: np.ndarray, resched: RespacedSchedule) -> np.ndarray:
    """Forward noising to respaced step i: sqrt(ab)*x0 + sqrt(1-ab)*eps."""
    x0 = np.asarray(x0)
    eps = np.asarray(eps)
    if eps.shape != x0.shape:
        raise ValueError(f"eps shape {eps.shape} != x0 shape {x0.shape}")
    ab = resched.alpha_bar(i)
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * eps


def posterior_step(
    x: np.ndarray,
    eps_hat: np.ndarray,
    i: int,
    resched: RespacedSchedule,
    z: np.ndarray | None = None,
    eta: int = 0,
) -> np.ndarray:
    """One reverse step x_i -> x_{i-1}.

    mean = (x - beta'_i / sqrt(1 - alpha_bar'_i) * eps_hat) / sqrt(alpha'_i),
    plus eta * sqrt(posterior variance) * z. The final step (i == 1) is
    always noiseless: its posterior variance is identically zero.
    """
    if eta not in (0, 1):
        raise ValueError("eta must be 0 or 1")
    idx = resched._check(i)
    beta = resched.betas[idx]
    alpha = resched.alphas[idx]
    ab = resched.alpha_bars[idx]
    mean = (x - (beta / np.sqrt(1.0 - ab)) * eps_hat) / np.sqrt(alpha)
    if eta == 1 and i > 1:
        if z is None:
            raise ValueError("eta=1 requires a noise draw z")
        if np.shape(z) != np.shape(x):
            raise ValueError("z must match x in shape")
        mean = mean + np.sqrt(resched.posterior_variances[idx]) * z
    return mean
