"""Command line entry point: ``lab run --config config.json [overrides]``."""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigInvalid, SolitonLabError
from .experiments import EXPERIMENTS, RunConfig, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lab",
        description="Run laboratory experiments for the soliton energy functionals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run experiments and write manifest + CSVs")
    run.add_argument("--config", help="JSON config file; flags override its keys")
    run.add_argument("--experiment", choices=list(EXPERIMENTS) + ["all"])
    run.add_argument("--backend")
    run.add_argument("--grid", type=int)
    run.add_argument("--kappa", type=float)
    run.add_argument("--seed", type=int)
    run.add_argument("--t-max", dest="t_max", type=float)
    run.add_argument("--out", dest="out_dir")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = {}
        if args.config:
            cfg0 = RunConfig.from_json(args.config)
            data = cfg0.__dict__.copy()
        for key in ("experiment", "backend", "grid", "kappa", "seed",
                    "t_max", "out_dir"):
            val = getattr(args, key, None)
            if val is not None:
                data[key] = val
        cfg = RunConfig.from_dict(data)
        return run_experiment(cfg)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolitonLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
