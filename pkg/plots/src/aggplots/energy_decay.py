"""Free-energy decay curve from a per-step diagnostics CSV.

One line per input file, E against t on linear axes; a second --input
overlays another run for comparison, labeled by file stem.
"""

from __future__ import annotations

from pathlib import Path

from . import common

import matplotlib.pyplot as plt


def figure(inputs: list[Path]):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for path in inputs:
        table = common.load_table(path)
        t = table.column("time")
        energy = table.column("free_energy")
        ax.plot(t, energy, marker="o", markersize=3, label=path.stem)
    ax.set_xlabel("t")
    ax.set_ylabel("free energy")
    ax.grid(True, alpha=0.3)
    if len(inputs) > 1:
        ax.legend()
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    return common.script_main(figure, __doc__, argv)


if __name__ == "__main__":
    raise SystemExit(main())
