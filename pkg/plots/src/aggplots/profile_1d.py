"""Density profile from a 1D snapshot CSV.

Plots density against cell centers, sorted by x.  A second --input
overlays another snapshot (initial against final state, or two
resolutions), labeled by file stem.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import common
from .common import ContractError

import matplotlib.pyplot as plt


def figure(inputs: list[Path]):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for path in inputs:
        table = common.load_table(path)
        if table.has("i1"):
            raise ContractError(
                f"{path}: 2D snapshot (has column 'i1'); profile-1d needs a 1D field"
            )
        x = table.column("x0")
        density = table.column("density")
        order = np.argsort(x)
        ax.plot(x[order], density[order], marker=".", label=path.stem)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.grid(True, alpha=0.3)
    if len(inputs) > 1:
        ax.legend()
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    return common.script_main(figure, __doc__, argv)


if __name__ == "__main__":
    raise SystemExit(main())
