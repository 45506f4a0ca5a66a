"""Dispatcher: plot <kind> --input FILE [--input FILE2] --output FILE.

Routes to the per-kind figure builders.  Exit codes: 0 success, 1
cannot write the output, 2 bad usage or a CSV contract violation.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from . import common, energy_decay, heatmap_steady, loglog_convergence, profile_1d

KINDS = {
    "heatmap-steady": heatmap_steady.figure,
    "energy-decay": energy_decay.figure,
    "loglog-convergence": loglog_convergence.figure,
    "profile-1d": profile_1d.figure,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="render one figure kind from solver CSV output",
    )
    parser.add_argument("kind", choices=sorted(KINDS))
    parser.add_argument(
        "--input", action="append", required=True, type=Path, metavar="FILE",
        help="input CSV; may be repeated once for an overlay",
    )
    parser.add_argument("--output", required=True, type=Path, metavar="FILE")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if len(args.input) > 2:
        parser.error("at most two --input files")
    return common.render(KINDS[args.kind], args.input, args.output)
