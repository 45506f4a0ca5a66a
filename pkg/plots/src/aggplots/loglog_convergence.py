"""Error-versus-spacing plot from a rates CSV, on log-log axes.

Each input contributes one curve: eps1 (error against an exact
solution) when that column has values, otherwise eps2 (consecutive-level
differences).  A dashed slope-1 reference line anchored at the coarsest
point of the first curve shows where first-order convergence would sit.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import common
from .common import ContractError

import matplotlib.pyplot as plt


def _error_values(table: common.Table) -> tuple[str, np.ndarray]:
    # rates files carry both columns; blanks (NaN after load) mark the
    # estimator that was not computed for this chain
    for name in ("eps1", "eps2"):
        if table.has(name):
            vals = table.column(name)
            if np.isfinite(vals).any():
                return name, vals
    raise ContractError(f"{table.path}: no error values in columns 'eps1'/'eps2'")


def reference_line(h: np.ndarray, eps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two-point slope-1 line through the coarsest (h, eps) sample."""
    anchor = int(np.argmax(h))
    span = np.array([h.max(), h.min()])
    return span, eps[anchor] * span / h[anchor]


def figure(inputs: list[Path]):
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ref = None
    for path in inputs:
        table = common.load_table(path)
        h = table.column("h")
        name, eps = _error_values(table)
        keep = np.isfinite(h) & np.isfinite(eps)
        if not keep.any():
            raise ContractError(f"{path}: no rows with both h and {name}")
        h, eps = h[keep], eps[keep]
        ax.loglog(h, eps, marker="s", label=f"{path.stem} ({name})")
        if ref is None:
            ref = reference_line(h, eps)
    ax.loglog(ref[0], ref[1], "k--", label="slope 1")
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    return common.script_main(figure, __doc__, argv)


if __name__ == "__main__":
    raise SystemExit(main())
