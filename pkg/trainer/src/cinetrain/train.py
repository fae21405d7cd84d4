"""Training loop for the conditional epsilon predictor, plus artifact export.

One training step: draw a frame window and its initial-recon condition, draw
t uniform in [1, T] and eps ~ N(0, I), form x_t = sqrt(ab_t) * x0 +
sqrt(1 - ab_t) * eps, and minimize ||eps - net(x_t, cond, t)||^2. All
randomness (batch composition, timesteps, noise) comes from one seeded numpy
generator and the weight init from torch's seeded RNG, so a run is fully
reproducible; torch is pinned to one thread while training for that reason.

Exports: the weights file, an alpha_bar sidecar (`<stem>.schedule.ctns`) the
consumer checks at load time, per-layer checksums, a loss-curve CSV, and a
forward-pass parity fixture.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from . import data, formats
from .model import TinyCondNet, from_arrays, to_arrays
from .schedule import cosine_alpha_bars


class TrainError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    data_dir: str
    out_dir: str
    t_train: int = 1000
    s_offset: float = 0.008
    group: int = 3
    batch_size: int = 16
    lr: float = 2e-3
    epochs: int = 20
    steps_per_epoch: int = 100
    crop: int = 32
    holdout_videos: int = 2
    holdout_batch: int = 64
    min_videos: int = 20
    seed: int = 0
    torch_threads: int = 1
    weights_name: str = "tinycondnet_g3.cdwt"

    def validate(self) -> None:
        if min(self.epochs, self.steps_per_epoch, self.batch_size, self.group) < 1:
            raise TrainError("epochs, steps_per_epoch, batch_size, and group must be >= 1")
        if self.t_train < 2 or not 1 <= self.holdout_videos:
            raise TrainError("t_train must be >= 2 and holdout_videos >= 1")
        if self.lr <= 0.0:
            raise TrainError("learning rate must be positive")


@dataclass
class TrainResult:
    weights_path: Path
    schedule_path: Path
    checksums_path: Path
    loss_csv_path: Path
    fixture_paths: dict[str, Path]
    init_holdout_loss: float
    final_holdout_loss: float
    epoch_rows: list[tuple[int, float, float]]


def _noised(gt: np.ndarray, t: np.ndarray, eps: np.ndarray, abar: np.ndarray) -> np.ndarray:
    ab = abar[t - 1].astype(np.float32)[:, None, None, None]
    return np.sqrt(ab) * gt + np.sqrt(1.0 - ab) * eps


def _holdout_loss(net: TinyCondNet, noisy, cond, t, eps) -> float:
    net.eval()
    with torch.no_grad():
        pred = net(noisy, cond, t)
        return float(F.mse_loss(pred, eps))


def train(cfg: TrainConfig) -> TrainResult:
    cfg.validate()
    torch.set_num_threads(cfg.torch_threads)
    rundirs = data.discover(cfg.data_dir)
    if len(rundirs) < cfg.min_videos:
        raise TrainError(f"need at least {cfg.min_videos} videos, found {len(rundirs)}")
    pairs = [data.load_pair(d) for d in rundirs]
    holdout = pairs[-cfg.holdout_videos :]
    train_pairs = pairs[: -cfg.holdout_videos]
    if not train_pairs:
        raise TrainError("holdout_videos leaves no videos to train on")

    abar = cosine_alpha_bars(cfg.t_train, cfg.s_offset)
    torch.manual_seed(cfg.seed)
    net = TinyCondNet(cfg.group)
    gen = np.random.default_rng(cfg.seed)

    # one fixed held-out batch, reused every epoch so the curve is comparable
    hold_gen = np.random.default_rng(cfg.seed + 1)
    hgt, hdl = data.sample_batch(holdout, cfg.holdout_batch, cfg.group, cfg.crop, hold_gen)
    ht = hold_gen.integers(1, cfg.t_train + 1, size=cfg.holdout_batch)
    heps = hold_gen.standard_normal(hgt.shape).astype(np.float32)
    hold_args = (
        torch.from_numpy(_noised(hgt, ht, heps, abar)),
        torch.from_numpy(hdl),
        torch.from_numpy(ht),
        torch.from_numpy(heps),
    )

    init_loss = _holdout_loss(net, *hold_args)
    opt = torch.optim.Adam(net.parameters(), lr=cfg.lr)
    rows: list[tuple[int, float, float]] = []
    for epoch in range(1, cfg.epochs + 1):
        net.train()
        acc = 0.0
        for step in range(1, cfg.steps_per_epoch + 1):
            gt_b, dl_b = data.sample_batch(
                train_pairs, cfg.batch_size, cfg.group, cfg.crop, gen
            )
            t = gen.integers(1, cfg.t_train + 1, size=cfg.batch_size)
            eps = gen.standard_normal(gt_b.shape).astype(np.float32)
            pred = net(
                torch.from_numpy(_noised(gt_b, t, eps, abar)),
                torch.from_numpy(dl_b),
                torch.from_numpy(t),
            )
            loss = F.mse_loss(pred, torch.from_numpy(eps))
            if not torch.isfinite(loss):
                raise TrainError(f"loss diverged (non-finite) at epoch {epoch} step {step}")
            opt.zero_grad()
            loss.backward()
            opt.step()
            acc += float(loss.detach())
        rows.append((epoch, acc / cfg.steps_per_epoch, _holdout_loss(net, *hold_args)))

    outdir = Path(cfg.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    arrays = to_arrays(net)
    weights_path = outdir / cfg.weights_name
    formats.save_weights(weights_path, arrays)
    schedule_path = weights_path.with_suffix(".schedule.ctns")
    formats.write_tensor(schedule_path, abar.astype(np.float32))
    checksums_path = outdir / "checksums.json"
    checksums_path.write_text(
        json.dumps(formats.checksums(arrays), indent=2, sort_keys=True) + "\n"
    )
    loss_csv_path = outdir / "loss.csv"
    loss_csv_path.write_text(
        "epoch,train_loss,holdout_loss\n"
        + "".join(f"{e},{tr:.8g},{ho:.8g}\n" for e, tr, ho in rows)
    )
    fixture_paths = export_fixture(net, outdir, seed=cfg.seed, group=cfg.group)
    return TrainResult(
        weights_path=weights_path,
        schedule_path=schedule_path,
        checksums_path=checksums_path,
        loss_csv_path=loss_csv_path,
        fixture_paths=fixture_paths,
        init_holdout_loss=init_loss,
        final_holdout_loss=rows[-1][2],
        epoch_rows=rows,
    )


def export_fixture(
    net: TinyCondNet, outdir: str | Path, seed: int = 0, group: int = 3, size: int = 8
) -> dict[str, Path]:
    """Fixed random input + timestep + the network's output, as loose files.

    The consumer replays the input through its own forward pass and compares
    against the recorded output; same seed always writes identical bytes.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    gen = np.random.default_rng(seed)
    stacked = gen.standard_normal((2 * group, size, size)).astype(np.float32)
    timestep = int(gen.integers(1, 1001))
    net.eval()
    with torch.no_grad():
        out = net(
            torch.from_numpy(stacked[:group][None]),
            torch.from_numpy(stacked[group:][None]),
            torch.tensor([timestep]),
        )
    paths = {
        "input": outdir / "parity_input.ctns",
        "output": outdir / "parity_output.ctns",
        "meta": outdir / "parity.json",
    }
    formats.write_tensor(paths["input"], stacked)
    formats.write_tensor(paths["output"], out[0].numpy().astype(np.float32))
    paths["meta"].write_text(
        json.dumps(
            {
                "input": "parity_input.ctns",
                "output": "parity_output.ctns",
                "timestep": timestep,
                "group": group,
                "seed": seed,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    return paths


def load_model(weights_path: str | Path, group: int = 3) -> TinyCondNet:
    return from_arrays(TinyCondNet(group), formats.load_weights(weights_path))
