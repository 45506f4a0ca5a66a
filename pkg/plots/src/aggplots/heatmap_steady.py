"""Dense heatmap of a 2D snapshot CSV.

Rows are scattered over admissible cells only, so the field is first
spread onto a dense i-index grid; cells absent from the file (outside
the domain) stay NaN and render as light grey, which keeps
non-rectangular domains recognizable.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import common
from .common import ContractError

import matplotlib.pyplot as plt


def _spacing(i: np.ndarray, x: np.ndarray) -> float:
    # centers sit at i*h on an origin-anchored lattice
    if i.max() == i.min():
        return 1.0
    return (x.max() - x.min()) / (i.max() - i.min())


def figure(inputs: list[Path]):
    if len(inputs) != 1:
        raise ContractError("heatmap-steady takes exactly one --input")
    table = common.load_table(inputs[0])
    i0 = table.column("i0")
    i1 = table.column("i1")
    x0 = table.column("x0")
    x1 = table.column("x1")
    density = table.column("density")

    rows = np.rint(i0 - i0.min()).astype(int)
    cols = np.rint(i1 - i1.min()).astype(int)
    dense = np.full((rows.max() + 1, cols.max() + 1), np.nan)
    dense[rows, cols] = density

    h0 = _spacing(i0, x0)
    h1 = _spacing(i1, x1)
    extent = (
        x0.min() - h0 / 2, x0.max() + h0 / 2,
        x1.min() - h1 / 2, x1.max() + h1 / 2,
    )

    fig, ax = plt.subplots(figsize=(5.4, 4.4))
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad("0.9")
    im = ax.imshow(
        dense.T, origin="lower", extent=extent, cmap=cmap,
        interpolation="nearest", aspect="equal",
    )
    fig.colorbar(im, ax=ax, label="density")
    ax.set_xlabel("x0")
    ax.set_ylabel("x1")
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    return common.script_main(figure, __doc__, argv)


if __name__ == "__main__":
    raise SystemExit(main())
