"""Command-line entry points: `train` and `export-fixture`."""

from __future__ import annotations

import argparse
import sys

from .formats import FormatError
from .train import TrainConfig, TrainError, export_fixture, load_model, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cinetrain", description="Train the conditional denoiser on simulated video pairs."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on gt/dlrecon tensor pairs and export artifacts")
    p.add_argument("--data", required=True, help="directory of run dirs with gt.ctns + dlrecon.ctns")
    p.add_argument("--out", required=True, help="artifact output directory")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--steps-per-epoch", type=int, default=100)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--lr", type=float, default=2e-3)
    p.add_argument("--crop", type=int, default=32)
    p.add_argument("--group", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--holdout", type=int, default=2, help="videos reserved for the held-out loss")
    p.add_argument("--min-videos", type=int, default=20)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--weights-name", default="tinycondnet_g3.cdwt")

    f = sub.add_parser("export-fixture", help="re-export the parity fixture for a weights file")
    f.add_argument("--weights", required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--group", type=int, default=3)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            cfg = TrainConfig(
                data_dir=args.data,
                out_dir=args.out,
                epochs=args.epochs,
                steps_per_epoch=args.steps_per_epoch,
                batch_size=args.batch,
                lr=args.lr,
                crop=args.crop,
                group=args.group,
                seed=args.seed,
                holdout_videos=args.holdout,
                min_videos=args.min_videos,
                torch_threads=args.threads,
                weights_name=args.weights_name,
            )
            result = train(cfg)
            for epoch, tr, ho in result.epoch_rows:
                print(f"epoch {epoch:3d}  train {tr:.5f}  holdout {ho:.5f}")
            print(
                f"holdout loss {result.init_holdout_loss:.5f} -> {result.final_holdout_loss:.5f}; "
                f"wrote {result.weights_path}"
            )
        else:
            net = load_model(args.weights, group=args.group)
            paths = export_fixture(net, args.out, seed=args.seed, group=args.group)
            print(f"wrote {paths['meta']}")
        return 0
    except (TrainError, FormatError, OSError) as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
