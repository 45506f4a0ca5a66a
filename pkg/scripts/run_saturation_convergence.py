"""Run the saturating-mobility convergence chain.

No closed-form solution exists here, so errors are measured between
consecutive halved levels (eps2).  The final profile develops two free
boundaries: a saturated plateau near the origin and a vacuum region at
the ends of the interval.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from aggdiff.harness import run_preset

PRESET = "saturation-convergence-1d"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output", type=Path, default=Path("out/saturation"))
    args = ap.parse_args()

    result = run_preset(PRESET, output_dir=args.output)
    errs = ", ".join(f"{e:.4e}" for e in result.eps2)
    print(f"{PRESET}: eps2 [{errs}] ({result.wall_time:.1f}s)")
    if result.rates:
        print(f"  rates {', '.join(f'{r:.3f}' for r in result.rates)}")
    final = result.levels[-1].final
    print(f"  finest level density range [{final.values.min():.3e}, "
          f"{final.values.max():.6f}]")
    print(f"  artifacts in {result.output_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
