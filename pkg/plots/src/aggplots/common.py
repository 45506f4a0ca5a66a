"""Shared CSV loading and the script entry-point wrapper.

The solver CLI writes three table shapes: per-step diagnostics, field
snapshots (i-index and x-center per axis plus density), and per-level
convergence rates.  All share a mandatory header row, '.' decimals, and
empty cells where a value does not exist on a given row; empty cells
load as NaN.  Contract violations raise ContractError, which the entry
points turn into exit code 2 with the offending file and column named.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # file output only; never assume a display

import matplotlib.pyplot as plt
import numpy as np


class ContractError(Exception):
    """An input file violates the CSV contract."""


class Table:
    """One loaded CSV: header plus rows, columns served as float arrays."""

    def __init__(self, path: Path, fieldnames: list[str], rows: list[dict]):
        self.path = path
        self.fieldnames = fieldnames
        self.rows = rows

    def has(self, name: str) -> bool:
        return name in self.fieldnames

    def column(self, name: str) -> np.ndarray:
        if name not in self.fieldnames:
            raise ContractError(f"{self.path}: missing column '{name}'")
        out = np.empty(len(self.rows))
        for k, row in enumerate(self.rows):
            cell = row[name]
            try:
                out[k] = float(cell) if cell not in ("", None) else np.nan
            except ValueError:
                raise ContractError(
                    f"{self.path}: non-numeric value {cell!r} in column '{name}'"
                ) from None
        return out


def load_table(path: Path) -> Table:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ContractError(f"cannot read {path}: {err}") from err
    if not text.strip():
        raise ContractError(f"{path}: empty CSV")
    reader = csv.DictReader(text.splitlines())
    rows = list(reader)
    if not rows:
        raise ContractError(f"{path}: no data rows")
    return Table(Path(path), list(reader.fieldnames), rows)


def render(figure_fn, inputs: list[Path], output: Path) -> int:
    """Build the figure and write it; exit code semantics of the scripts."""
    try:
        fig = figure_fn([Path(p) for p in inputs])
    except ContractError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    try:
        fig.savefig(output)
    except OSError as err:
        print(f"error: cannot write {output}: {err}", file=sys.stderr)
        return 1
    finally:
        plt.close(fig)
    return 0


def script_main(figure_fn, doc: str | None, argv=None) -> int:
    """argparse wrapper shared by the per-kind scripts."""
    ap = argparse.ArgumentParser(description=doc)
    ap.add_argument(
        "--input", action="append", required=True, type=Path, metavar="FILE",
        help="input CSV; may be repeated once for an overlay",
    )
    ap.add_argument("--output", required=True, type=Path, metavar="FILE")
    args = ap.parse_args(argv)
    if len(args.input) > 2:
        ap.error("at most two --input files")
    return render(figure_fn, args.input, args.output)
