"""Command-line interface.

    leosim-figures render --figure fig3 --in out/fig3.csv --out fig3.svg

Exit codes: 0 success, 1 input/schema error, 2 unexpected failure.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .render import FIGURE_IDS, FigureJob, RenderError, render


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="leosim-figures", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    rend = sub.add_parser("render", help="render one figure from its CSV")
    rend.add_argument("--figure", required=True, choices=FIGURE_IDS)
    rend.add_argument("--in", dest="input_csv", required=True, help="input CSV path")
    rend.add_argument("--out", dest="output", required=True, help="output image path")
    rend.add_argument("--style", default="plain", choices=("paper", "plain"))
    sub.add_parser("version", help="print the version")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "version":
            print(__version__)
            return 0
        if args.command == "render":
            job = FigureJob(
                input_csv=args.input_csv,
                figure_id=args.figure,
                output=args.output,
                style=args.style,
            )
            path = render(job)
            print(f"wrote {path}")
            return 0
        parser.print_usage(sys.stderr)
        sys.stderr.write("leosim-figures: error: a subcommand is required\n")
        return 1
    except RenderError as exc:
        sys.stderr.write(f"leosim-figures: error: {exc}\n")
        return 1
    except Exception as exc:
        sys.stderr.write(f"leosim-figures: error: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
