"""Command-line front end: staged pipeline with persisted artifacts.

Stages write TensorFiles plus a JSON sidecar into one output directory:

    phantom  -> gt.ctns, coils.ctns, mask.ctns, kspace.ctns, phantom.json
    recon    -> dlrecon.ctns, recon.json
    enhance  -> enhanced.ctns, enhance.json (run stats included)
    eval     -> eval.json, profile_{gt,dlrecon,enhanced}.{pgm,csv}
    bench    -> bench.json

Each sidecar records a hash over the dataset-defining config fields; `eval`
refuses to compare artifacts whose hashes disagree unless --force is given.
Stage-level knobs (steps, threads, denoiser choice) are excluded from the
hash on purpose: they change how a dataset is processed, not which dataset
it is.

Config files are `key = value` lines; `#` starts a comment. Every key has a
default, unknown keys are rejected by name, and serialize -> parse is an
exact round trip.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, metrics, phantom, tensorio
from .denoiser import (
    Denoiser,
    GaussianPriorDenoiser,
    OracleDenoiser,
    TinyCondNetDenoiser,
)
from .initialrecon import InitialReconstructor
from .phantom import PhantomConfig, SamplingMask
from .sampler import EnhanceConfig, enhance_video
from .schedule import make_schedule

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING_INPUT = 3
EXIT_COMPONENT = 4
EXIT_HASH_MISMATCH = 5

DENOISER_KINDS = ("oracle", "gaussian", "tinycondnet", "passthrough")


class ConfigError(ValueError):
    pass


class MissingInputError(FileNotFoundError):
    pass


class HashMismatchError(RuntimeError):
    pass


@dataclass
class RunConfig:
    # phantom / acquisition
    height: int = 64
    width: int = 64
    frames: int = 25
    coils: int = 8
    cycle_amplitude: float = 0.15
    noise_sigma: float = 0.0
    accel: int = 8
    center_lines: int = 4
    mask_scheme: str = "lattice"
    # initial reconstruction
    recon: str = "view_share"
    share_window: int = 4
    # enhancement
    t_train: int = 1000
    respace_steps: int = 50
    steps: int = 10
    group: int = 3
    eta: int = 0
    pdc: bool = True
    norm_percentile: float = 0.99
    denoiser: str = "oracle"
    weights: str = ""
    gauss_mu0: float = 0.0
    gauss_var0: float = 1.0
    schedule: str = "cosine"
    s_offset: float = 0.008
    # run control
    seed: int = 0
    threads: int = 1
    out: str = "./run"
    dlrecon_in: str = ""
    eval_row: int = -1  # -1 picks the row through the annulus center
    bench_repeats: int = 3

    def phantom_config(self) -> PhantomConfig:
        return PhantomConfig(
            height=self.height,
            width=self.width,
            n_frames=self.frames,
            n_coils=self.coils,
            cycle_amplitude=self.cycle_amplitude,
            noise_sigma=self.noise_sigma,
            seed=self.seed,
        )

    def enhance_config(self) -> EnhanceConfig:
        steps = 0 if self.denoiser == "passthrough" else self.steps
        return EnhanceConfig(
            t_train=self.t_train,
            respace_steps=self.respace_steps,
            infer_steps=steps,
            group=self.group,
            eta=self.eta,
            seed=self.seed,
            pdc_enabled=self.pdc,
            norm_percentile=self.norm_percentile,
            threads=self.threads,
            schedule_kind=self.schedule,
            s_offset=self.s_offset,
        )


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}

# Fields that define the dataset itself; the sidecar hash covers exactly these.
HASHED_FIELDS = (
    "height",
    "width",
    "frames",
    "coils",
    "cycle_amplitude",
    "noise_sigma",
    "accel",
    "center_lines",
    "mask_scheme",
    "recon",
    "share_window",
    "seed",
)


def _parse_value(key: str, raw: str):
    kind = _FIELDS[key].type
    raw = raw.strip()
    if kind == "bool" or kind is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"key {key!r}: expected a boolean, got {raw!r}")
    try:
        if kind == "int" or kind is int:
            return int(raw)
        if kind == "float" or kind is float:
            return float(raw)
    except ValueError as e:
        raise ConfigError(f"key {key!r}: {e}") from None
    return raw


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = dataclasses.replace(base) if base is not None else RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        setattr(cfg, key, _parse_value(key, raw))
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for name in _FIELDS:
        value = getattr(cfg, name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"config file not found: {path}")
    return parse_config(path.read_text())


def config_hash(cfg: RunConfig) -> str:
    payload = json.dumps({k: getattr(cfg, k) for k in HASHED_FIELDS}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def _validate(cfg: RunConfig) -> None:
    if cfg.mask_scheme not in ("lattice", "uniform_random"):
        raise ConfigError(f"unknown mask_scheme {cfg.mask_scheme!r}")
    if cfg.recon not in ("zero_filled", "view_share"):
        raise ConfigError(f"unknown recon {cfg.recon!r}")
    if cfg.denoiser not in DENOISER_KINDS:
        raise ConfigError(f"unknown denoiser {cfg.denoiser!r}")
    if cfg.denoiser == "tinycondnet" and not cfg.weights:
        raise ConfigError("denoiser 'tinycondnet' needs a weights file (--weights)")


# --- artifacts ---------------------------------------------------------------


def write_sidecar(outdir: Path, stage: str, cfg: RunConfig, extra: dict | None = None) -> None:
    payload = {
        "stage": stage,
        "version": f"cinediff {__version__}",
        "config_hash": config_hash(cfg),
        "config": dataclasses.asdict(cfg),
    }
    if extra:
        payload.update(extra)
    (outdir / f"{stage}.json").write_text(json.dumps(payload, indent=2) + "\n")


def read_sidecar(outdir: Path, stage: str) -> dict:
    path = outdir / f"{stage}.json"
    if not path.exists():
        raise MissingInputError(f"missing sidecar for stage {stage!r}: {path} (run `{stage}` first)")
    return json.loads(path.read_text())


def _load_tensor(outdir: Path, name: str, stage_hint: str) -> np.ndarray:
    path = outdir / name
    if not path.exists():
        raise MissingInputError(f"missing artifact {path} (run `{stage_hint}` first)")
    return tensorio.read_tensor(path)


def _load_mask(outdir: Path, cfg: RunConfig) -> SamplingMask:
    pattern = _load_tensor(outdir, "mask.ctns", "phantom").astype(bool)
    return SamplingMask(
        pattern=pattern, accel=cfg.accel, n_center=cfg.center_lines, scheme=cfg.mask_scheme
    )


# --- stages ------------------------------------------------------------------


def cmd_phantom(cfg: RunConfig) -> int:
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    pc = cfg.phantom_config()
    pc.validate()
    gt = phantom.generate_phantom(pc)
    coils = phantom.generate_coils(cfg.height, cfg.width, cfg.coils, seed=cfg.seed)
    mask = phantom.generate_mask(
        cfg.frames, cfg.height, cfg.accel, cfg.center_lines, cfg.mask_scheme, seed=cfg.seed
    )
    ksp = phantom.simulate_kspace(gt, coils, mask, noise_sigma=cfg.noise_sigma, seed=cfg.seed)
    tensorio.write_tensor(outdir / "gt.ctns", gt.astype(np.float32))
    tensorio.write_tensor(outdir / "coils.ctns", coils.maps.astype(np.complex64))
    tensorio.write_tensor(outdir / "mask.ctns", mask.pattern)
    tensorio.write_tensor(outdir / "kspace.ctns", ksp.data.astype(np.complex64))
    write_sidecar(outdir, "phantom", cfg, {"effective_accel": mask.effective_accel})
    return EXIT_OK


def cmd_recon(cfg: RunConfig) -> int:
    outdir = Path(cfg.out)
    ksp_data = _load_tensor(outdir, "kspace.ctns", "phantom").astype(np.complex128)
    mask = _load_mask(outdir, cfg)
    ksp = phantom.KSpaceData(data=ksp_data, mask=mask)
    recon = InitialReconstructor(kind=cfg.recon, window=cfg.share_window)
    dlrecon = recon(ksp)
    tensorio.write_tensor(outdir / "dlrecon.ctns", dlrecon.astype(np.float32))
    write_sidecar(outdir, "recon", cfg)
    return EXIT_OK


def _build_denoiser(cfg: RunConfig, outdir: Path) -> Denoiser:
    if cfg.denoiser == "oracle":
        gt = _load_tensor(outdir, "gt.ctns", "phantom").astype(np.float64)
        return OracleDenoiser(gt)
    if cfg.denoiser == "gaussian":
        return GaussianPriorDenoiser(mu0=cfg.gauss_mu0, var0=cfg.gauss_var0)
    if cfg.denoiser == "tinycondnet":
        path = Path(cfg.weights)
        if not path.exists():
            raise MissingInputError(f"weights file not found: {path}")
        _check_weight_schedule(path, cfg)
        return TinyCondNetDenoiser.from_file(path, group=cfg.group)
    return GaussianPriorDenoiser()  # passthrough: never called (0 steps)


def _check_weight_schedule(weights_path: Path, cfg: RunConfig) -> None:
    """Weights may ship a `<stem>.schedule.ctns` sidecar holding the trainer's
    alpha_bar array; refuse to run them under a different noise schedule."""
    sidecar = weights_path.with_suffix(".schedule.ctns")
    if not sidecar.exists():
        return
    theirs = tensorio.read_tensor(sidecar).astype(np.float64)
    sched = make_schedule(cfg.schedule, cfg.t_train, cfg.s_offset)
    if theirs.shape != sched.alpha_bars.shape or np.abs(theirs - sched.alpha_bars).max() > 1e-6:
        raise ConfigError(
            f"weights {weights_path.name} were trained under a different noise "
            f"schedule than {cfg.schedule}/{cfg.t_train} (see {sidecar.name})"
        )


def cmd_enhance(cfg: RunConfig) -> int:
    outdir = Path(cfg.out)
    if cfg.dlrecon_in:
        src = Path(cfg.dlrecon_in)
        if not src.exists():
            raise MissingInputError(f"dlrecon input not found: {src}")
        dlrecon = tensorio.read_tensor(src).astype(np.float64)
    else:
        dlrecon = _load_tensor(outdir, "dlrecon.ctns", "recon").astype(np.float64)
    mask = _load_mask(outdir, cfg) if cfg.pdc else None
    den = _build_denoiser(cfg, outdir)
    enhanced, stats = enhance_video(dlrecon, cfg.enhance_config(), den, mask=mask)
    tensorio.write_tensor(outdir / "enhanced.ctns", enhanced.astype(np.float32))
    write_sidecar(outdir, "enhance", cfg, {"stats": stats.as_dict()})
    return EXIT_OK


def _check_hashes(outdir: Path, stages: list[str], cfg: RunConfig, force: bool) -> None:
    hashes = {s: read_sidecar(outdir, s)["config_hash"] for s in stages}
    hashes["eval(request)"] = config_hash(cfg)
    if len(set(hashes.values())) > 1 and not force:
        detail = ", ".join(f"{s}={h}" for s, h in hashes.items())
        raise HashMismatchError(f"artifact config hashes disagree ({detail}); rerun or pass --force")


def cmd_eval(cfg: RunConfig, force: bool = False) -> int:
    outdir = Path(cfg.out)
    _check_hashes(outdir, ["phantom", "recon", "enhance"], cfg, force)
    gt = _load_tensor(outdir, "gt.ctns", "phantom").astype(np.float64)
    dlrecon = _load_tensor(outdir, "dlrecon.ctns", "recon").astype(np.float64)
    enhanced = _load_tensor(outdir, "enhanced.ctns", "enhance").astype(np.float64)
    reports = [
        metrics.evaluate(gt, gt, "gt"),  # PSNR/SSIM trivially capped; TGE is the reference
        metrics.evaluate(gt, dlrecon, "dlrecon"),
        metrics.evaluate(gt, enhanced, "enhanced"),
    ]
    row = cfg.eval_row if cfg.eval_row >= 0 else phantom.annulus_row(cfg.phantom_config())
    sharp = {}
    for name, video in (("gt", gt), ("dlrecon", dlrecon), ("enhanced", enhanced)):
        profile = metrics.temporal_profile(video, row)
        metrics.write_profile_pgm(outdir / f"profile_{name}.pgm", profile)
        metrics.write_profile_csv(outdir / f"profile_{name}.csv", profile)
        sharp[name] = metrics.temporal_sharpness(profile)
    write_sidecar(
        outdir,
        "eval",
        cfg,
        {
            "reports": {r.method: r.as_dict() for r in reports},
            "profile_row": row,
            "profile_temporal_sharpness": sharp,
        },
    )
    return EXIT_OK


def cmd_bench(cfg: RunConfig) -> int:
    outdir = Path(cfg.out)
    dlrecon = _load_tensor(outdir, "dlrecon.ctns", "recon").astype(np.float64)
    mask = _load_mask(outdir, cfg) if cfg.pdc else None
    base = cfg.enhance_config()
    runs = [
        (
            "baseline_perframe_fullchain",
            dataclasses.replace(
                base, group=1, infer_steps=cfg.t_train, respace_steps=cfg.t_train
            ),
            GaussianPriorDenoiser(),
        ),
        (
            "grouped_short_chain",
            dataclasses.replace(base, group=cfg.group, infer_steps=cfg.steps),
            GaussianPriorDenoiser(),
        ),
    ]
    reports = metrics.bench(dlrecon, mask, runs, repeats=cfg.bench_repeats)
    ratio = reports[0].nfe / reports[1].nfe
    write_sidecar(
        outdir,
        "bench",
        cfg,
        {"reports": [r.as_dict() for r in reports], "nfe_ratio": round(ratio, 2)},
    )
    return EXIT_OK


# --- argument parsing --------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None, help="key = value config file")
    p.add_argument("--out", type=str, default=None, help="artifact directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--steps", type=int, default=None, help="reverse diffusion steps")
    p.add_argument("--group", type=int, default=None, help="frames per window")
    p.add_argument("--accel", type=int, default=None, help="acceleration factor R")
    p.add_argument("--denoiser", choices=DENOISER_KINDS, default=None)
    p.add_argument("--weights", type=str, default=None, help="WeightsFile for tinycondnet")
    p.add_argument("--dlrecon-in", type=str, default=None, help="external dlrecon TensorFile")
    p.add_argument("--no-pdc", action="store_true", help="skip the k-space restore step")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cinediff",
        description="Fast diffusion enhancement for dynamic MRI, desk-scale simulation included.",
    )
    parser.add_argument("--version", action="version", version=f"cinediff {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("phantom", "simulate ground truth, coils, mask, and undersampled k-space"),
        ("recon", "initial reconstruction (zero-filled or view-shared)"),
        ("enhance", "diffusion enhancement of the initial reconstruction"),
        ("eval", "PSNR/SSIM/TGE report and x-t profiles"),
        ("bench", "NFE and wall-time comparison of pipeline configs"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "eval":
            p.add_argument("--force", action="store_true", help="ignore config hash mismatches")
    return parser


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    for flag, key in (
        ("out", "out"),
        ("seed", "seed"),
        ("threads", "threads"),
        ("steps", "steps"),
        ("group", "group"),
        ("accel", "accel"),
        ("denoiser", "denoiser"),
        ("weights", "weights"),
        ("dlrecon_in", "dlrecon_in"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "no_pdc", False):
        cfg.pdc = False
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    stage = args.command
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = _apply_overrides(cfg, args)
        _validate(cfg)
        if stage == "phantom":
            return cmd_phantom(cfg)
        if stage == "recon":
            return cmd_recon(cfg)
        if stage == "enhance":
            return cmd_enhance(cfg)
        if stage == "eval":
            return cmd_eval(cfg, force=args.force)
        return cmd_bench(cfg)
    except ConfigError as e:
        print(f"{stage}: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingInputError as e:
        print(f"{stage}: {e}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except HashMismatchError as e:
        print(f"{stage}: {e}", file=sys.stderr)
        return EXIT_HASH_MISMATCH
    except Exception as e:  # component failures get a stage-tagged diagnostic
        print(f"{stage}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_COMPONENT


if __name__ == "__main__":
    sys.exit(main())
