"""plotkit command line: render one figure kind from pipeline artifacts."""

from __future__ import annotations

import argparse
import sys

from plotkit import __version__
from plotkit.figures import FIGURE_KINDS, FigureSpec, render
from plotkit.schemas import SchemaMismatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render ecosweep pipeline artifacts as SVG/PNG figures",
    )
    parser.add_argument("--version", action="version",
                        version=f"plotkit {__version__}")
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input artifact file(s)")
    parser.add_argument("--out", required=True, help="output image (.svg or .png)")
    parser.add_argument("--title", help="optional figure title")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not (args.out.endswith(".svg") or args.out.endswith(".png")):
        print("plotkit: output must end in .svg or .png", file=sys.stderr)
        return 1
    spec = FigureSpec(kind=args.kind, inputs=tuple(args.inputs), output=args.out,
                      title=args.title, dpi=args.dpi)
    try:
        summary = render(spec)
    except (SchemaMismatch, FileNotFoundError) as exc:
        print(f"plotkit: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {summary['kind']} figure to {summary['output']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
