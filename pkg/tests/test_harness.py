"""Experiment presets, error estimators, and CSV/manifest persistence."""

import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aggdiff.exact import BarenblattParams, barenblatt_solution
from aggdiff.grid import MeshSpec, build_grids, make_domain
from aggdiff.harness import (
    error_eps1,
    error_eps2,
    make_preset,
    preset_names,
    rate_estimate,
    read_snapshot_csv,
    run_level,
    run_preset,
    run_simulation,
    write_diagnostics_csv,
    write_rates_csv,
    write_snapshot_csv,
)
from aggdiff.model import make_model
from aggdiff.scheme import SchemeOptions, StateField


def test_rate_estimate_frozen_pair():
    assert rate_estimate([0.02, 0.01]) == [pytest.approx(1.0)]
    assert rate_estimate([0.09, 0.03, 0.01]) == [
        pytest.approx(np.log2(3.0)),
        pytest.approx(np.log2(3.0)),
    ]


def test_rate_estimate_rejects_nonpositive():
    with pytest.raises(ValueError):
        rate_estimate([0.1, 0.0])
    with pytest.raises(ValueError):
        rate_estimate([-0.1, 0.05])


@given(
    st.floats(min_value=0.25, max_value=3.0, allow_nan=False),
    st.floats(min_value=1e-6, max_value=10.0, allow_nan=False),
)
def test_rate_estimate_recovers_order(p, c):
    errors = [c * 2.0 ** (-p * k) for k in range(4)]
    for rate in rate_estimate(errors):
        assert rate == pytest.approx(p, rel=1e-9)


def test_preset_names_cover_experiments():
    names = preset_names()
    for expected in (
        "steady-square",
        "steady-peanut",
        "energy-decay-1d",
        "energy-decay-2d",
        "barenblatt-1d",
        "barenblatt-2d",
        "saturation-convergence-1d",
        "envelope-drift-1d",
        "interaction-toy-1d",
        "boundary-tilt-1d",
    ):
        assert expected in names


def test_make_preset_overrides_and_tau_rule():
    spec = make_preset("barenblatt-1d", T=0.24)
    assert spec.T == 0.24
    assert spec.tau(0.1) == pytest.approx(0.01)


def test_make_preset_unknown_name():
    with pytest.raises(ValueError, match="unknown preset"):
        make_preset("burgers")


def test_run_simulation_records_and_trajectory(wide_grid):
    model = make_model("saturation-drift")
    initial = StateField(np.full(wide_grid.n_cells, 0.5), 0, 0.05)
    result = run_simulation(wide_grid, model, initial, SchemeOptions(), n_steps=3)
    assert len(result.trajectory) == 4
    assert len(result.records) == 4
    assert len(result.reports) == 3
    assert result.records[0].dissipation_lhs is None
    assert result.records[1].step == 1
    assert result.records[3].time == pytest.approx(0.15)
    assert result.final.time_index == 3


def test_run_simulation_stationarity_stop(wide_grid):
    model = make_model("saturation-drift")
    initial = StateField(np.full(wide_grid.n_cells, 0.5), 0, 0.05)
    result = run_simulation(
        wide_grid, model, initial, SchemeOptions(), n_steps=500, stationarity_tol=1e-5
    )
    assert result.stationary
    assert len(result.trajectory) < 501


def _tiny_barenblatt_spec(**overrides):
    spec = make_preset("barenblatt-1d")
    return dataclasses.replace(spec, h=[0.4, 0.2], T=0.16, **overrides)


def test_error_eps1_zero_for_exact_trajectory():
    spec = _tiny_barenblatt_spec()
    level = run_level(spec, 0.4)
    sol = barenblatt_solution(BarenblattParams(exponent=2.0, mass=2.0, t0=1.0, dim=1))
    x = level.grids.centers()
    fake = dataclasses.replace(
        level,
        trajectory=[
            StateField(sol(n * level.tau, x), n, level.tau)
            for n in range(len(level.trajectory))
        ],
    )
    assert error_eps1(fake, sol) == 0.0
    assert error_eps1(level, sol) > 0.0


def test_error_eps2_requires_halved_spacing():
    spec = _tiny_barenblatt_spec()
    a = run_level(spec, 0.4)
    b = run_level(spec, 0.25)
    with pytest.raises(ValueError, match="halve"):
        error_eps2(a, b)


def test_error_eps2_requires_nested_times():
    spec = _tiny_barenblatt_spec()
    coarse = run_level(spec, 0.4)
    fine = run_level(spec, 0.2)
    broken = dataclasses.replace(fine, tau=fine.tau * 0.7)
    with pytest.raises(ValueError, match="nested"):
        error_eps2(coarse, broken)


def test_error_eps2_requires_long_enough_fine_run():
    spec = _tiny_barenblatt_spec()
    coarse = run_level(spec, 0.4)
    fine = run_level(spec, 0.2)
    truncated = dataclasses.replace(fine, trajectory=fine.trajectory[:2])
    with pytest.raises(ValueError, match="too short"):
        error_eps2(coarse, truncated)


def test_error_eps2_zero_against_injected_twin():
    spec = _tiny_barenblatt_spec()
    coarse = run_level(spec, 0.4)
    fine = run_level(spec, 0.2)
    ratio = round(coarse.tau / fine.tau)
    pos = [
        fine.grids.cells.position[(2 * i[0],)] for i in coarse.grids.cells.indices
    ]
    injected = dataclasses.replace(
        coarse,
        trajectory=[
            StateField(fine.trajectory[n * ratio].values[pos], n, coarse.tau)
            for n in range(len(coarse.trajectory))
        ],
    )
    assert error_eps2(injected, fine) == 0.0
    assert error_eps2(coarse, fine) > 0.0


def test_run_preset_persists_outputs(tmp_path):
    res = run_preset(make_preset("interaction-toy-1d"), output_dir=tmp_path)
    files = {p.name for p in tmp_path.iterdir()}
    assert "manifest.json" in files
    assert any(f.startswith("diagnostics") for f in files)
    assert any(f.startswith("snapshot") for f in files)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["preset"] == "interaction-toy-1d"
    assert "wall_time_seconds" in manifest
    assert res.output_dir == tmp_path


def test_diagnostics_csv_deterministic_bytes(tmp_path, wide_grid):
    model = make_model("saturation-drift")
    initial = StateField(np.full(wide_grid.n_cells, 0.5), 0, 0.05)
    result = run_simulation(wide_grid, model, initial, SchemeOptions(), n_steps=2)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_diagnostics_csv(a, result.records)
    write_diagnostics_csv(b, result.records)
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0]
    assert header.split(",")[:4] == ["step", "time", "mass", "free_energy"]
    assert "wall" not in header


def test_snapshot_roundtrip(tmp_path, square_grid):
    rng = np.random.default_rng(0)
    vals = rng.uniform(0.0, 1.0, square_grid.n_cells)
    path = tmp_path / "snap.csv"
    write_snapshot_csv(path, StateField(vals, 3, 0.1), square_grid)
    indices, density = read_snapshot_csv(path)
    assert indices == square_grid.cells.indices
    np.testing.assert_allclose(density, vals, atol=1e-16)


def test_snapshot_full_precision(tmp_path, interval_grid):
    vals = np.array([1.0 / 3.0, np.pi * 1e-7, 0.9999999999999999])
    path = tmp_path / "snap.csv"
    write_snapshot_csv(path, StateField(vals, 0, 0.1), interval_grid)
    _, density = read_snapshot_csv(path)
    np.testing.assert_array_equal(density, vals)


def test_read_snapshot_requires_density_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("i0,x0,value\n0,0.0,1.0\n")
    with pytest.raises(ValueError, match="density"):
        read_snapshot_csv(path)


def test_rates_csv_layout(tmp_path, barenblatt_1d_result):
    path = tmp_path / "rates.csv"
    write_rates_csv(path, barenblatt_1d_result.spec, barenblatt_1d_result)
    lines = path.read_text().splitlines()
    assert lines[0] == "level,h,tau,eps1,eps2,rate"
    assert len(lines) == 1 + len(barenblatt_1d_result.spec.h)


def test_preset_eps1_populated(barenblatt_1d_result):
    assert barenblatt_1d_result.eps1 is not None
    assert len(barenblatt_1d_result.eps1) == 3
    assert barenblatt_1d_result.rates is not None


def test_tau_retry_on_solver_failure():
    # an impossible first tau forces the halving retry path
    spec = make_preset("interaction-toy-1d")
    spec = dataclasses.replace(
        spec,
        options=dataclasses.replace(spec.options, picard_max_iters=2),
        max_tau_retries=0,
    )
    from aggdiff.scheme import SolverError

    with pytest.raises(SolverError):
        run_level(spec, spec.h[0])
