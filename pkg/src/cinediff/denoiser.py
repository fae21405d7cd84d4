"""Noise predictors consumed by the sampler.

Three interchangeable implementations of the same [G, H, W] -> [G, H, W]
interface: an exact oracle that inverts the forward noising against known
ground truth (testing), a closed-form predictor for a per-pixel Gaussian
prior (statistical validation), and TinyCondNet, a small fixed convolutional
network whose weights come from a WeightsFile (the learned enhancer).

All predictors output epsilon estimates. The network sees the timestep as the
original-schedule index, not the respaced position, so weights trained on the
full schedule stay valid after respacing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import rng
from .schedule import RespacedSchedule
from .tensorio import load_weights

EMBED_DIM = 32
HIDDEN = 32
TIME_DIM = 64
N_BLOCKS = 3


class DenoiserError(ValueError):
    pass


@dataclass(frozen=True)
class DenoiserInput:
    """One window's worth of sampler state.

    noisy and condition are [G, H, W] in normalized units; timestep is the
    original-schedule index; frames are the window's source frame indices,
    carried so ground-truth-aware denoisers can line up their reference.
    """

    noisy: np.ndarray
    condition: np.ndarray
    timestep: int
    frames: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.noisy.shape != self.condition.shape:
            raise DenoiserError(
                f"noisy {self.noisy.shape} and condition {self.condition.shape} shapes differ"
            )
        if self.noisy.ndim != 3:
            raise DenoiserError(f"expected [G, H, W] inputs, got shape {self.noisy.shape}")
        if not (np.isfinite(self.noisy).all() and np.isfinite(self.condition).all()):
            raise DenoiserError("non-finite values in denoiser input")


class Denoiser:
    """Interface: prepare(context) once per run, then pure predict() calls."""

    def prepare(self, ctx) -> None:  # noqa: ANN001 - sampler-owned context
        pass

    def predict(self, inp: DenoiserInput) -> np.ndarray:
        raise NotImplementedError


def oracle_predict(inp: DenoiserInput, x0_truth: np.ndarray, resched: RespacedSchedule) -> np.ndarray:
    """Exact epsilon given the clean target: inverts the forward noising."""
    if x0_truth.shape != inp.noisy.shape:
        raise DenoiserError(f"truth shape {x0_truth.shape} != noisy shape {inp.noisy.shape}")
    ab = resched.alpha_bar_at_timestep(inp.timestep)
    if ab >= 1.0:
        raise DenoiserError("alpha_bar == 1 at this timestep; epsilon is undefined")
    return (inp.noisy - np.sqrt(ab) * x0_truth) / np.sqrt(1.0 - ab)


def gaussian_prior_predict(
    inp: DenoiserInput,
    mu0: float | np.ndarray,
    var0: float,
    resched: RespacedSchedule,
) -> np.ndarray:
    """Posterior-mean epsilon for a per-pixel Gaussian prior x0 ~ N(mu0, var0).

    E[x0 | x] = (sqrt(ab) * var0 * x + (1 - ab) * mu0) / (ab * var0 + 1 - ab);
    mu0 may be a scalar or broadcast against the frame stack. Condition
    channels are ignored.
    """
    if var0 <= 0.0:
        raise DenoiserError("prior variance must be positive")
    ab = resched.alpha_bar_at_timestep(inp.timestep)
    x = inp.noisy
    x0_hat = (np.sqrt(ab) * var0 * x + (1.0 - ab) * mu0) / (ab * var0 + 1.0 - ab)
    return (x - np.sqrt(ab) * x0_hat) / np.sqrt(1.0 - ab)


class OracleDenoiser(Denoiser):
    """Predicts exact epsilon against a known raw ground-truth video."""

    def __init__(self, gt_video: np.ndarray):
        self.gt = np.asarray(gt_video, dtype=np.float64)
        self._norm = None
        self._resched = None

    def prepare(self, ctx) -> None:
        self._norm = ctx.norm
        self._resched = ctx.resched

    def predict(self, inp: DenoiserInput) -> np.ndarray:
        if self._resched is None:
            raise DenoiserError("OracleDenoiser used before prepare()")
        gt_group = self._norm.forward(self.gt[list(inp.frames)])
        return oracle_predict(inp, gt_group, self._resched)


class GaussianPriorDenoiser(Denoiser):
    def __init__(self, mu0: float = 0.0, var0: float = 1.0):
        if var0 <= 0.0:
            raise DenoiserError("prior variance must be positive")
        self.mu0 = float(mu0)
        self.var0 = float(var0)
        self._resched = None

    def prepare(self, ctx) -> None:
        self._resched = ctx.resched

    def predict(self, inp: DenoiserInput) -> np.ndarray:
        if self._resched is None:
            raise DenoiserError("GaussianPriorDenoiser used before prepare()")
        return gaussian_prior_predict(inp, self.mu0, self.var0, self._resched)


# --- TinyCondNet ------------------------------------------------------------


def layer_shapes(group: int = 3) -> dict[str, tuple[int, ...]]:
    """Fixed layer table; load-time validation rejects any deviation."""
    shapes: dict[str, tuple[int, ...]] = {
        "stem.weight": (HIDDEN, 2 * group, 3, 3),
        "stem.bias": (HIDDEN,),
        "time_mlp.fc1.weight": (TIME_DIM, EMBED_DIM),
        "time_mlp.fc1.bias": (TIME_DIM,),
        "time_mlp.fc2.weight": (TIME_DIM, TIME_DIM),
        "time_mlp.fc2.bias": (TIME_DIM,),
    }
    for b in range(1, N_BLOCKS + 1):
        shapes[f"b{b}.conv1.weight"] = (HIDDEN, HIDDEN, 3, 3)
        shapes[f"b{b}.conv1.bias"] = (HIDDEN,)
        shapes[f"b{b}.time_proj.weight"] = (HIDDEN, TIME_DIM)
        shapes[f"b{b}.time_proj.bias"] = (HIDDEN,)
        shapes[f"b{b}.conv2.weight"] = (HIDDEN, HIDDEN, 3, 3)
        shapes[f"b{b}.conv2.bias"] = (HIDDEN,)
    shapes["head.weight"] = (group, HIDDEN, 3, 3)
    shapes["head.bias"] = (group,)
    return shapes


def parameter_count(group: int = 3) -> int:
    return sum(int(np.prod(s)) for s in layer_shapes(group).values())


def sinusoidal_embedding(timestep: int, dim: int = EMBED_DIM) -> np.ndarray:
    """Half sin / half cos embedding; computed in f64 then cast to f32."""
    half = dim // 2
    freqs = np.power(10000.0, -2.0 * np.arange(half, dtype=np.float64) / dim)
    args = float(timestep) * freqs
    return np.concatenate([np.sin(args), np.cos(args)]).astype(np.float32)


def silu(x: np.ndarray) -> np.ndarray:
    return x * expit(x)


def conv3x3(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """3x3 cross-correlation, stride 1, zero-padding 1, f32 throughout."""
    out_c = weight.shape[0]
    h, w = x.shape[1], x.shape[2]
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (3, 3), axis=(1, 2))  # [C,H,W,3,3]
    col = np.ascontiguousarray(win.transpose(1, 2, 0, 3, 4)).reshape(h * w, -1)
    out = col @ weight.reshape(out_c, -1).T + bias
    return out.T.reshape(out_c, h, w)


def _linear(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    return weight @ x + bias


def tinycondnet_predict(inp: DenoiserInput, weights: dict[str, np.ndarray]) -> np.ndarray:
    group = inp.noisy.shape[0]
    x = np.concatenate([inp.noisy, inp.condition]).astype(np.float32)
    x = silu(conv3x3(x, weights["stem.weight"], weights["stem.bias"]))
    emb = sinusoidal_embedding(inp.timestep)
    e = _linear(emb, weights["time_mlp.fc1.weight"], weights["time_mlp.fc1.bias"])
    e = _linear(silu(e), weights["time_mlp.fc2.weight"], weights["time_mlp.fc2.bias"])
    for b in range(1, N_BLOCKS + 1):
        h = conv3x3(x, weights[f"b{b}.conv1.weight"], weights[f"b{b}.conv1.bias"])
        t = _linear(e, weights[f"b{b}.time_proj.weight"], weights[f"b{b}.time_proj.bias"])
        h = silu(h + t[:, None, None])
        x = x + conv3x3(h, weights[f"b{b}.conv2.weight"], weights[f"b{b}.conv2.bias"])
    out = conv3x3(x, weights["head.weight"], weights["head.bias"])
    if out.shape[0] != group:
        raise DenoiserError(f"weights produce {out.shape[0]} channels, window has {group}")
    if not np.isfinite(out).all():
        raise DenoiserError(f"non-finite network output at timestep {inp.timestep}")
    return out


class TinyCondNetDenoiser(Denoiser):
    def __init__(self, weights: dict[str, np.ndarray], group: int = 3):
        expected = layer_shapes(group)
        got = {k: tuple(v.shape) for k, v in weights.items()}
        if got != expected:
            raise DenoiserError(f"weights do not match the layer table for group={group}: {got}")
        self.weights = {k: np.asarray(v, dtype=np.float32) for k, v in weights.items()}
        self.group = group

    @classmethod
    def from_file(cls, path, group: int = 3) -> "TinyCondNetDenoiser":
        return cls(load_weights(path, expected_shapes=layer_shapes(group)), group=group)

    def predict(self, inp: DenoiserInput) -> np.ndarray:
        return tinycondnet_predict(inp, self.weights)


def zero_weights(group: int = 3) -> dict[str, np.ndarray]:
    return {k: np.zeros(s, dtype=np.float32) for k, s in layer_shapes(group).items()}


def random_weights(group: int = 3, seed: int = 0) -> dict[str, np.ndarray]:
    """He-scaled random weights, one RNG substream per layer (order-free)."""
    out: dict[str, np.ndarray] = {}
    for idx, (name, shape) in enumerate(layer_shapes(group).items()):
        g = rng.substream(seed, rng.WEIGHT_INIT, idx)
        if name.endswith("bias"):
            out[name] = np.zeros(shape, dtype=np.float32)
        else:
            fan_in = int(np.prod(shape[1:]))
            std = np.sqrt(2.0 / fan_in)
            out[name] = (g.standard_normal(shape) * std).astype(np.float32)
    return out
