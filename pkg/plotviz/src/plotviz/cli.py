"""plotviz command line: plot <kind> --in ... --out ...

Exit status: 0 on success, 2 on bad input (missing file, malformed CSV,
missing columns).
"""

from __future__ import annotations

import argparse
import sys

from .csvdata import DataError
from .figures import FIGURE_KINDS, PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotviz",
        description="render benchmark CSVs as figures")
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="CSV", help="input CSV (repeatable)")
    parser.add_argument("--out", required=True, help="output .png or .svg")
    parser.add_argument("--smoothing", type=float, default=0.025,
                        metavar="SECONDS", help="moving-average window")
    parser.add_argument("--title", default="")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(kind=args.kind, inputs=args.inputs, output=args.out,
                    smoothing_s=args.smoothing, title=args.title)
    try:
        path = render(spec)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
