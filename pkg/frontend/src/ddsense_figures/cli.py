"""``make-figures``: render simulator CSV artifacts to images."""

import argparse
import sys

from .render import DB_FLOOR, FigureJob, render
from .schema import SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="make-figures",
        description="Render ambiguity cuts, range-Doppler surfaces, and "
                    "detection/MSE curves from simulator CSV files")
    parser.add_argument("--kind", required=True,
                        choices=("cuts", "rdmap3d", "pd", "mse"))
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="CSV",
                        help="input CSVs (rdmap3d: map then threshold)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--format", choices=("svg", "png"), default="svg")
    parser.add_argument("--db-floor", type=float, default=DB_FLOOR)
    args = parser.parse_args(argv)
    try:
        job = FigureJob(kind=args.kind, inputs=tuple(args.inputs),
                        output=args.out, db_floor=args.db_floor,
                        image_format=args.format)
        path = render(job)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
