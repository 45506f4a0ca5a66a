"""Shared fixtures: small grids, models, and cached preset runs.

Preset runs are session-scoped because the acceptance checks slice the same
trajectories many ways; nothing here mutates a result after it is built.
"""

import numpy as np
import pytest

from aggdiff.grid import MeshSpec, build_grids, make_domain
from aggdiff.harness import make_preset, run_preset
from aggdiff.model import make_model


@pytest.fixture(scope="session")
def interval_grid():
    # (0,1) at h=0.25: admissible cells 1,2,3
    return build_grids(MeshSpec((0.25,)), make_domain("interval", a=0.0, b=1.0))


@pytest.fixture(scope="session")
def wide_grid():
    return build_grids(MeshSpec((0.2,)), make_domain("interval", a=-1.0, b=1.0))


@pytest.fixture(scope="session")
def square_grid():
    return build_grids(
        MeshSpec((0.5, 0.5)), make_domain("box", bounds=[(-1.0, 1.0), (-1.0, 1.0)])
    )


@pytest.fixture(scope="session")
def pme_model():
    return make_model("pme")


@pytest.fixture(scope="session")
def sat_model():
    return make_model("saturation-well")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


# -- cached preset runs (shared by harness and acceptance tests) --


@pytest.fixture(scope="session")
def barenblatt_1d_result():
    return run_preset("barenblatt-1d")


@pytest.fixture(scope="session")
def barenblatt_2d_result():
    return run_preset("barenblatt-2d")


@pytest.fixture(scope="session")
def saturation_chain_result():
    return run_preset("saturation-convergence-1d")


@pytest.fixture(scope="session")
def steady_results():
    import time

    t0 = time.time()
    square = run_preset("steady-square")
    peanut = run_preset("steady-peanut")
    return square, peanut, time.time() - t0


@pytest.fixture(scope="session")
def energy_decay_results():
    return run_preset("energy-decay-1d"), run_preset("energy-decay-2d")


@pytest.fixture(scope="session")
def midpoint_combo_results():
    """One run per midpoint option paired with a kernel of the matching
    definiteness class: O1/repulsive (psd), O2/attractive (nsd),
    O3/indefinite."""
    import dataclasses

    combos = {
        "O1": "gaussian-repulsive",
        "O2": "gaussian-attractive",
        "O3": "sine-indefinite",
    }
    out = {}
    for option, kernel in combos.items():
        base = make_preset("energy-decay-1d")
        spec = dataclasses.replace(
            base,
            model_params={"kernel": kernel},
            options=dataclasses.replace(base.options, midpoint_option=option),
        )
        out[option] = run_preset(spec)
    return out


@pytest.fixture(scope="session")
def envelope_drift_result():
    return run_preset("envelope-drift-1d")


@pytest.fixture(scope="session")
def boundary_tilt_result():
    return run_preset("boundary-tilt-1d")


@pytest.fixture(scope="session")
def interaction_toy_result():
    return run_preset("interaction-toy-1d")
