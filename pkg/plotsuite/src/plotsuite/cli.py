"""Command-line front end for the convergence-plot renderer."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .plots import PlotSpec, render


def _float_list(text):
    return tuple(float(v) for v in text.split(",") if v != "")


def _name_list(text):
    return tuple(v for v in text.split(",") if v != "")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotsuite",
        description="Render log-log convergence figures from solver sweep "
                    "CSV files.")
    parser.add_argument("--version", action="version",
                        version=f"plotsuite {__version__}")
    parser.add_argument("csv", nargs="+", help="input CSV file(s)")
    parser.add_argument("--x", default="h",
                        help="x column, typically h or delta (default h)")
    parser.add_argument("--y", type=_name_list, default=("l2_error",),
                        metavar="COL[,COL...]",
                        help="error columns to plot (default l2_error)")
    parser.add_argument("--slopes", type=_float_list, default=(),
                        metavar="P[,P...]",
                        help="dashed reference-slope guide lines")
    parser.add_argument("--out", default="convergence.png",
                        help="output image path (default convergence.png)")
    parser.add_argument("--title", default="")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(csv_paths=tuple(args.csv), x=args.x, y=tuple(args.y),
                    slopes=args.slopes, out=args.out, title=args.title)
    try:
        out = render(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
