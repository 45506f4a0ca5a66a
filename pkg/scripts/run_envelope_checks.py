"""Run the extrema-envelope experiments, positive and negative.

envelope-drift-1d satisfies the structural hypotheses, so every step must
stay inside the predicted min/max envelopes.  boundary-tilt-1d drops the
zero-normal-derivative requirement on the confinement; the envelope is
not asserted there and the run demonstrates why: the would-be bound is
violated within a few steps.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from aggdiff.diagnostics import EnvelopeParams, extrema_envelope
from aggdiff.harness import run_preset

PRESETS = ["envelope-drift-1d", "boundary-tilt-1d"]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output", type=Path, default=Path("out/envelopes"))
    args = ap.parse_args()

    for name in PRESETS:
        result = run_preset(name, output_dir=args.output / name)
        run = result.levels[0]
        if result.envelope_checked:
            verdict = "held" if result.envelope_ok else (
                f"violated at step {result.envelope_violation}")
            print(f"{name}: envelope asserted and {verdict} "
                  f"({result.wall_time:.1f}s)")
        else:
            # Not asserted: the tilted potential has nonzero normal derivative
            # at the boundary.  Evaluate the would-be bound anyway (V'' = 0
            # gives lam = 0, i.e. constant envelopes) to show it fails.
            params = EnvelopeParams(lam=0.0, lipschitz=1.0, dim=run.grids.dim,
                                    alpha=run.model.mobility.alpha)
            ok, first_bad = extrema_envelope(run.trajectory, params)
            verdict = "holds" if ok else f"fails at step {first_bad}"
            print(f"{name}: envelope not asserted (model outside hypotheses); "
                  f"would-be bound {verdict} ({result.wall_time:.1f}s)")
        print(f"  artifacts in {result.output_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
