"""Command-line interface.

Exit codes: 0 success, 1 invariant failure (selftest), 2 config/usage/IO
errors.
"""

import argparse
import sys
from dataclasses import replace

from . import bench
from .config import ExperimentConfig, load_config
from .exceptions import ConfigError, DDSenseError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddsense",
        description="Delay-Doppler ISAC waveform and radar chain simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
            ("ambiguity", "ambiguity-function cut CSVs for both waveforms"),
            ("detect", "detection probability vs SNR CSV"),
            ("mse", "delay/Doppler estimation MSE vs SNR CSV"),
            ("rdmap", "range-Doppler map, threshold, and detections CSVs"),
            ("selftest", "run the transform/equivalence invariant suite")):
        p = sub.add_parser(name, help=text)
        if name != "selftest":
            p.add_argument("--config", help="TOML experiment config")
            p.add_argument("--seed", type=int, help="master seed override")
            p.add_argument("--out", help="output directory override")
            p.add_argument("--workers", type=int, help="worker pool size")
            p.add_argument("--waveform", choices=("dd", "tf", "both"),
                           help="waveform selection override")
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    if args.waveform is not None:
        cfg = replace(cfg, waveform=args.waveform)
    return cfg


_RUNNERS = {
    "ambiguity": bench.run_ambiguity,
    "detect": bench.run_detection,
    "mse": bench.run_mse,
    "rdmap": bench.run_rdmap_demo,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "selftest":
        from .selftest import run_selftest
        return 0 if run_selftest() else 1
    try:
        cfg = _load(args)
        paths = _RUNNERS[args.command](cfg, out_dir=args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, DDSenseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
