"""CLI: plot --figure N --in <dir> --out <file> [--format png|svg|pdf]."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FORMATS, FigureSpec, PlotInputError, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plot", description=__doc__)
    p.add_argument("--figure", type=int, required=True, help="figure number 1..5")
    p.add_argument("--in", dest="in_dir", required=True, help="directory of input CSVs")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--format", default=None, choices=FORMATS,
                   help="image format (default: from --out suffix, else png)")
    p.add_argument("--colormap", default="magma")
    p.add_argument("--dpi", type=int, default=150)
    p.add_argument("--theta-upward", action="store_true",
                   help="plot theta increasing upward instead of downward")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format or (Path(args.out).suffix.lstrip(".").lower() or "png")
    try:
        spec = FigureSpec(
            figure=args.figure,
            in_dir=Path(args.in_dir),
            out_path=Path(args.out),
            fmt=fmt,
            colormap=args.colormap,
            dpi=args.dpi,
            theta_downward=not args.theta_upward,
        )
        out = render(spec)
    except PlotInputError as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
