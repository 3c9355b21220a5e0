"""Command line entry point.

    mdsgame run --config FILE [--scenario NAME] [--seed N] [--out DIR] [--svg]
    mdsgame validate --config FILE [--out DIR]

Exit status: 0 success, 1 usage or config error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from mdsgame.config import SCENARIOS, ConfigError, load_config, with_overrides
from mdsgame.scenarios import run_scenario, write_outputs

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mdsgame", description="MDS redundancy game in slotted N-p CSMA networks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one scenario and write CSV (and optionally SVG)")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--scenario", choices=SCENARIOS)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", type=Path)
    run.add_argument("--svg", action="store_true")

    val = sub.add_parser("validate", help="check the analytic model against its oracles")
    val.add_argument("--config", required=True, type=Path)
    val.add_argument("--out", type=Path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "run":
            cfg = with_overrides(cfg, scenario=args.scenario, seed=args.seed)
            cfg = replace(cfg, emit_svg=args.svg)
        else:
            cfg = with_overrides(cfg, scenario="validate")
        if args.out is not None:
            cfg = replace(cfg, output_dir=args.out)
    except (ConfigError, OSError) as exc:
        print(f"mdsgame: {exc}", file=sys.stderr)
        return EXIT_USAGE

    table = run_scenario(cfg)
    for path in write_outputs(cfg, table):
        print(path)
    if cfg.scenario == "validate" and table.metadata.get("failures", 0):
        print(f"mdsgame: validation failed ({table.metadata['failures']} checks)", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
