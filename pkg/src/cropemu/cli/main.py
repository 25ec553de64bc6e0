"""Argument parsing and stage dispatch for the `cropemu` command."""

import argparse
import sys
from dataclasses import replace

from .config import RunConfig, load_config
from .stages import STAGE_ORDER, run_stage


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cropemu",
        description="Crop-emulation pipeline: quasi-random design, "
                    "mechanistic oracle, weather autoencoders, neural "
                    "emulator with weight-space uncertainty, and "
                    "resilient-trait discovery.")
    sub = parser.add_subparsers(dest="stage", required=True)
    descriptions = {
        "design": "draw the quasi-random trait design",
        "simulate": "run the mechanistic oracle over the design",
        "train-weather": "train the weather autoencoders",
        "synth-weather": "generate synthetic weather series",
        "train-emulator": "encode weather latents and fit the emulator",
        "swag": "collect the weight-space posterior",
        "evaluate": "score ensemble calibration on held-out rows",
        "discover": "rank, filter, cluster and explain candidate traits",
        "report": "aggregate stage outputs into one validated report",
        "run": "execute every stage in order",
    }
    for name, text in descriptions.items():
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", default=None,
                         help="JSON run configuration (defaults apply "
                              "when omitted)")
        cmd.add_argument("--jobs", type=int, default=None,
                         help="cap on oracle worker processes")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override every stage seed")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg = replace(
            cfg,
            sampling=replace(cfg.sampling, seed=args.seed),
            weather=replace(cfg.weather, seed=args.seed),
            emulator=replace(cfg.emulator, seed=args.seed),
            swag=replace(cfg.swag, seed=args.seed),
            discovery=replace(cfg.discovery, seed=args.seed),
        )
    if args.jobs is not None:
        if args.jobs < 1:
            raise ValueError("--jobs must be >= 1")
        cfg = replace(cfg, oracle=replace(
            cfg.oracle, jobs=min(cfg.oracle.jobs, args.jobs)))
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = _apply_overrides(cfg, args)
        stages = STAGE_ORDER if args.stage == "run" else (args.stage,)
        for stage in stages:
            print(run_stage(stage, cfg, cfg.paths.output_dir), flush=True)
    except (ValueError, FloatingPointError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
