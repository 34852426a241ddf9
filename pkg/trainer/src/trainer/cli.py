"""Command-line entry point: train --kind di|gr --out weights.json [...]."""

from __future__ import annotations

import argparse
import logging
import sys

from .train import TrainConfig, train_policy


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="train",
        description="Train a neural controller by imitating an MPC expert",
    )
    parser.add_argument("--kind", required=True, choices=["di", "gr"])
    parser.add_argument("--out", required=True, help="weights JSON path")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=2000,
                        help="number of (state, input) training pairs")
    parser.add_argument("--epochs", type=int, default=300)
    parser.add_argument("--expert-horizon", type=int, default=0,
                        help="MPC lookahead; 0 uses the task default")
    parser.add_argument("--weight-decay", type=float, default=1e-4)
    parser.add_argument("--hidden", default="",
                        help="comma list overriding the default hidden sizes")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    hidden = [int(v) for v in args.hidden.split(",")] if args.hidden else []
    try:
        cfg = TrainConfig(
            kind=args.kind,
            out=args.out,
            hidden=hidden,
            expert_horizon=args.expert_horizon,
            dataset_size=args.samples,
            epochs=args.epochs,
            seed=args.seed,
            weight_decay=args.weight_decay,
        )
        path = train_policy(cfg)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path} and {path.with_suffix('.report.json')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
