"""Command-line interface.

    leosim run fig3 --config table1.json --out out/
    leosim passes --config table1.json --out out/
    leosim topology --config table1.json --out out/
    leosim version

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import __version__
from .experiments import run_experiment
from .scenario import (
    EXPERIMENT_ALIASES,
    EXPERIMENT_NAMES,
    ConfigError,
    load_config,
)


class _Parser(argparse.ArgumentParser):
    # Argument errors are configuration errors: usage + exit 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", default=None, help="output directory (default: config output_dir)")
    parser.add_argument("--seed", type=int, default=None, help="override the experiment seed")
    parser.add_argument("--step", type=float, default=None, help="override the snapshot step in seconds")
    parser.add_argument("--duration", type=float, default=None, help="override the horizon in seconds")
    parser.add_argument("--workers", type=int, default=None, help="parallel workers over independent series")
    parser.add_argument(
        "--render",
        action="store_true",
        help="also render the report figure next to the CSV (needs leosim-figures)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="leosim", description=__doc__, add_help=True)
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="run a named experiment", parents=[], add_help=True)
    run.add_argument("experiment", help="fig3 | fig4 | fig5 | fig6 | fig7 | passes | topology")
    _add_run_options(run)

    passes = sub.add_parser("passes", help="emit raw pass profiles")
    _add_run_options(passes)

    topo = sub.add_parser("topology", help="dump per-snapshot inter-plane matchings")
    _add_run_options(topo)

    sub.add_parser("version", help="print the version")
    return parser


def _resolve_experiment(token: str) -> str:
    name = EXPERIMENT_ALIASES.get(token, token)
    if name not in EXPERIMENT_NAMES:
        raise ConfigError(
            f"unknown experiment '{token}' (choose from "
            f"{', '.join(sorted(set(EXPERIMENT_ALIASES) | set(EXPERIMENT_NAMES)))})"
        )
    return name


def _render_report(name: str, out_dir: str) -> None:
    try:
        from leosim_figures.render import render_for_experiment
    except ImportError as exc:
        raise ConfigError(
            "figure rendering requires the leosim-figures package"
        ) from exc
    render_for_experiment(name, out_dir)


def _run(args, name: str) -> int:
    constellation, table, spec = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.step is not None:
        overrides["step_s"] = args.step
    if args.duration is not None:
        overrides["duration_s"] = args.duration
    if args.workers is not None:
        overrides["workers"] = args.workers
    spec = replace(spec, name=name, **overrides)
    out_dir = args.out if args.out is not None else spec.output_dir
    manifest = run_experiment(name, constellation, table, spec, out_dir)
    for filename, rows in manifest["files"].items():
        print(f"wrote {out_dir}/{filename} ({rows} rows)")
    if args.render:
        _render_report(name, out_dir)
    return 0


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
        if args.command == "run":
            return _run(args, _resolve_experiment(args.experiment))
        if args.command == "passes":
            return _run(args, "passes")
        if args.command == "topology":
            return _run(args, "topology_dump")
        parser.print_usage(sys.stderr)
        sys.stderr.write("leosim: error: a subcommand is required\n")
        return 1
    except ConfigError as exc:
        sys.stderr.write(f"leosim: configuration error: {exc}\n")
        return 1
    except Exception as exc:  # runtime failure
        sys.stderr.write(f"leosim: error: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
