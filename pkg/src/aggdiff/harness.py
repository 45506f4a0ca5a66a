"""Experiment orchestration: preset runs, error estimators, CSV output.

A preset fixes domain, model, initial datum, spacing chain, and step
rule tau = h^p; run_preset solves every level, collects per-step
diagnostics, and (for chains) the error estimators and observed rates.
All CSV output is deterministic: fixed column order, 17 significant
digits, empty cells for absent values.
"""

from __future__ import annotations

import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .diagnostics import (
    DiagnosticsRecord,
    envelope_params_from_model,
    extrema_envelope,
    free_energy,
    h1_seminorm,
    lambda_entropy,
    total_mass,
)
from .exact import BarenblattParams, barenblatt_solution, initial_datum
from .grid import Grids, build_grids, make_domain, MeshSpec
from .model import Model, make_model
from .scheme import (
    SchemeOptions,
    SolveReport,
    SolverError,
    StateField,
    assemble_xi,
    discretize,
    face_flux,
    face_velocity,
    step,
)

__all__ = [
    "ExperimentSpec",
    "RunResult",
    "PresetResult",
    "run_simulation",
    "run_level",
    "run_preset",
    "error_eps1",
    "error_eps2",
    "rate_estimate",
    "make_preset",
    "preset_names",
    "write_diagnostics_csv",
    "write_snapshot_csv",
    "write_rates_csv",
    "write_manifest",
    "read_snapshot_csv",
    "PRESETS",
]

logger = logging.getLogger(__name__)


@dataclass
class ExperimentSpec:
    """Complete description of one experiment (possibly a spacing chain)."""

    name: str
    domain_name: str
    domain_params: dict
    model_name: str
    model_params: dict
    h: list[float]
    p: float
    T: float
    rho0_kind: object
    rho0_params: dict
    options: SchemeOptions = field(default_factory=SchemeOptions)
    stationarity_tol: float | None = None
    snapshot_every: int | None = None
    max_tau_retries: int = 2
    seed: int = 0
    exact: Callable | None = None

    def tau(self, h: float) -> float:
        return h**self.p


@dataclass
class RunResult:
    """One solved level: trajectory, per-step diagnostics, solve reports."""

    grids: Grids
    model: Model
    options: SchemeOptions
    trajectory: list[StateField]
    records: list[DiagnosticsRecord]
    reports: list[SolveReport]
    tau: float
    stationary: bool = False

    @property
    def final(self) -> StateField:
        return self.trajectory[-1]


@dataclass
class PresetResult:
    name: str
    spec: ExperimentSpec
    levels: list[RunResult]
    eps1: list[float] | None = None
    eps2: list[float] | None = None
    rates: list[float] | None = None
    envelope_checked: bool = False
    envelope_ok: bool | None = None
    envelope_violation: int | None = None
    wall_time: float = 0.0
    output_dir: Path | None = None


def run_simulation(
    grids: Grids,
    model: Model,
    initial: StateField,
    options: SchemeOptions,
    n_steps: int,
    stationarity_tol: float | None = None,
) -> RunResult:
    """March n_steps implicit steps, recording diagnostics after each.

    With a stationarity tolerance the run stops early once the discrete
    time derivative falls below it in the sup norm.
    """
    disc = discretize(model, grids)
    vol = grids.cell_volume
    has_lambda = model.lambda_closed_form is not None
    state = initial
    energy = free_energy(state.values, model, grids, disc=disc)
    records = [
        DiagnosticsRecord(
            step=0,
            time=0.0,
            mass=total_mass(state.values, grids),
            free_energy=energy,
            dissipation_lhs=None,
            energy_drop=None,
            min_density=float(np.min(state.values)),
            max_density=float(np.max(state.values)),
            entropy_slope_h1=h1_seminorm(
                np.asarray(model.entropy.dU(state.values), dtype=float), grids
            ),
            lambda_entropy=lambda_entropy(state.values, model, grids) if has_lambda else None,
            newton_iters=None,
            picard_iters=None,
            residual_norm=None,
        )
    ]
    trajectory = [state]
    reports: list[SolveReport] = []
    stationary = False
    for n in range(1, n_steps + 1):
        new, report = step(state, model, grids, options, disc=disc)
        reports.append(report)
        xi = assemble_xi(new, state, model, grids, options.midpoint_option, disc=disc)
        v = face_velocity(xi, grids)
        fd = face_flux(new, v, model.mobility, grids)
        lhs = new.tau * vol * float(np.sum(fd.theta * v * v))
        new_energy = free_energy(new.values, model, grids, disc=disc)
        records.append(
            DiagnosticsRecord(
                step=n,
                time=new.time,
                mass=total_mass(new.values, grids),
                free_energy=new_energy,
                dissipation_lhs=lhs,
                energy_drop=energy - new_energy,
                min_density=float(np.min(new.values)),
                max_density=float(np.max(new.values)),
                entropy_slope_h1=h1_seminorm(
                    np.asarray(model.entropy.dU(new.values), dtype=float), grids
                ),
                lambda_entropy=lambda_entropy(new.values, model, grids) if has_lambda else None,
                newton_iters=report.newton_iters,
                picard_iters=report.picard_iters,
                residual_norm=report.residual_norm,
            )
        )
        trajectory.append(new)
        rate = float(np.max(np.abs(new.values - state.values))) / new.tau
        state = new
        energy = new_energy
        if stationarity_tol is not None and rate < stationarity_tol:
            stationary = True
            break
    return RunResult(grids, model, options, trajectory, records, reports, initial.tau, stationary)


def _build_initial(spec: ExperimentSpec, grids: Grids, tau: float) -> StateField:
    if spec.rho0_kind == "constant":
        return initial_datum("constant", grids, tau, **spec.rho0_params)
    if spec.rho0_kind == "barenblatt":
        return initial_datum("barenblatt", grids, tau, **spec.rho0_params)
    return initial_datum(spec.rho0_kind, grids, tau, **spec.rho0_params)


def run_level(spec: ExperimentSpec, h: float) -> RunResult:
    """Solve one spacing level; on solver failure retry with tau halved."""
    domain = make_domain(spec.domain_name, **spec.domain_params)
    mesh = MeshSpec((h,) * domain.dim)
    grids = build_grids(mesh, domain)
    model = make_model(spec.model_name, **spec.model_params)
    tau = spec.tau(h)
    for attempt in range(spec.max_tau_retries + 1):
        n_steps = max(1, round(spec.T / tau))
        initial = _build_initial(spec, grids, tau)
        try:
            return run_simulation(
                grids, model, initial, spec.options, n_steps, spec.stationarity_tol
            )
        except SolverError as err:
            if attempt == spec.max_tau_retries:
                raise
            tau *= 0.5
            logger.warning(
                "%s at h=%g: %s; retrying with tau=%g", spec.name, h, err, tau
            )
    raise AssertionError("unreachable")


def error_eps1(result: RunResult, exact: Callable) -> float:
    """Node-sampled L1-in-space-and-time error against an exact solution:
    tau |Q| sum over steps and cells of |P^n_i - rho(n tau, x_i)|."""
    x = result.grids.centers()
    vol = result.grids.cell_volume
    tau = result.tau
    total = 0.0
    for n, state in enumerate(result.trajectory):
        total += float(np.sum(np.abs(state.values - exact(n * tau, x))))
    return tau * vol * total


def error_eps2(coarse: RunResult, fine: RunResult) -> float:
    """Node-sampled L1 distance between a run and its half-spacing twin,
    evaluated at the coarse nodes by exact lookup on the fine run.

    Requires nested grids (origin-anchored spacing h and h/2) and nested
    time grids; anything else is an error, not an approximation.
    """
    hc = coarse.grids.mesh.spacing
    hf = fine.grids.mesh.spacing
    if not np.allclose(np.asarray(hc), 2.0 * np.asarray(hf)):
        raise ValueError("fine run must halve the coarse spacing")
    ratio = coarse.tau / fine.tau
    if abs(ratio - round(ratio)) > 1e-9 or ratio < 1.0:
        raise ValueError("time grids not nested; coarse tau must be a multiple of fine tau")
    ratio = round(ratio)
    fine_pos = []
    for idx in coarse.grids.cells.indices:
        twin = tuple(2 * i for i in idx)
        pos = fine.grids.cells.position.get(twin)
        if pos is None:
            raise ValueError(f"coarse cell {idx} has no fine twin at the shared center")
        fine_pos.append(pos)
    fine_pos = np.array(fine_pos, dtype=int)
    total = 0.0
    for n, state in enumerate(coarse.trajectory):
        j = n * ratio
        if j >= len(fine.trajectory):
            raise ValueError("fine run too short for the coarse time grid")
        total += float(np.sum(np.abs(state.values - fine.trajectory[j].values[fine_pos])))
    return coarse.tau * coarse.grids.cell_volume * total


def rate_estimate(errors: Sequence[float]) -> list[float]:
    """Observed orders log2(e_k / e_{k+1}) along a halving chain.

    Non-positive errors are an error; a flat pair (rate near zero) is
    legal but logged, since it usually means the chain bottomed out.
    """
    errors = [float(e) for e in errors]
    if any(e <= 0.0 for e in errors):
        raise ValueError("error values must be positive")
    rates = []
    for a, b in zip(errors, errors[1:]):
        rate = math.log2(a / b)
        if abs(rate) < 0.05:
            logger.warning("flat error chain: %.3e -> %.3e (rate %.3f)", a, b, rate)
        rates.append(rate)
    return rates


def _spec_steady(name: str, domain_name: str, domain_params: dict) -> ExperimentSpec:
    return ExperimentSpec(
        name=name,
        domain_name=domain_name,
        domain_params=domain_params,
        model_name="saturation-drift",
        model_params={},
        h=[0.5],
        p=2.0,
        # Horizon is a cap: stepping stops once sup|dP|/tau < stationarity_tol.
        T=90.0,
        rho0_kind="constant",
        rho0_params={"value": 0.6},
        options=SchemeOptions(midpoint_option="O3", newton_tol=1e-12),
        stationarity_tol=1e-6,
        snapshot_every=40,
    )


def make_preset(name: str, **overrides) -> ExperimentSpec:
    """Build a named experiment; keyword overrides replace spec fields."""
    if name == "steady-square":
        spec = _spec_steady(name, "box", {"bounds": [(-4.0, 4.0), (-4.0, 4.0)]})
    elif name == "steady-peanut":
        spec = _spec_steady(name, "peanut", {})
    elif name == "energy-decay-1d":
        spec = ExperimentSpec(
            name=name,
            domain_name="interval",
            domain_params={"a": -4.0, "b": 4.0},
            model_name="aggregation",
            model_params={"kernel": "gaussian-attractive"},
            h=[0.2],
            p=2.0,
            T=1.0,
            rho0_kind="constant",
            rho0_params={"value": 0.6},
            options=SchemeOptions(midpoint_option="O3", newton_tol=1e-12),
            snapshot_every=10,
        )
    elif name == "energy-decay-2d":
        spec = ExperimentSpec(
            name=name,
            domain_name="box",
            domain_params={"bounds": [(-4.0, 4.0), (-4.0, 4.0)]},
            model_name="aggregation",
            model_params={"kernel": "gaussian-attractive"},
            h=[0.5],
            p=3.0,
            T=1.0,
            rho0_kind="constant",
            rho0_params={"value": 0.6},
            options=SchemeOptions(midpoint_option="O3", newton_tol=1e-12),
            snapshot_every=4,
        )
    elif name == "barenblatt-1d":
        params = BarenblattParams(exponent=2.0, mass=2.0, t0=1.0, dim=1)
        spec = ExperimentSpec(
            name=name,
            domain_name="interval",
            domain_params={"a": -6.0, "b": 6.0},
            model_name="pme",
            model_params={},
            h=[0.4, 0.2, 0.1],
            p=2.0,
            T=0.48,
            rho0_kind="barenblatt",
            rho0_params={"params": params},
            options=SchemeOptions(midpoint_option="O3", newton_tol=1e-12),
            exact=barenblatt_solution(params),
        )
    elif name == "barenblatt-2d":
        params = BarenblattParams(exponent=2.0, mass=2.0, t0=1.0, dim=2)
        spec = ExperimentSpec(
            name=name,
            domain_name="box",
            domain_params={"bounds": [(-6.0, 6.0), (-6.0, 6.0)]},
            model_name="pme",
            model_params={},
            h=[0.8, 0.4],
            p=2.0,
            T=0.64,
            rho0_kind="barenblatt",
            rho0_params={"params": params},
            options=SchemeOptions(midpoint_option="O3", newton_tol=1e-12),
            exact=barenblatt_solution(params),
        )
    elif name == "saturation-convergence-1d":
        spec = ExperimentSpec(
            name=name,
            domain_name="interval",
            domain_params={"a": -2.0, "b": 2.0},
            model_name="saturation-well",
            model_params={},
            h=[0.2, 0.1, 0.05],
            p=2.0,
            # Long enough for both free boundaries: the confined steady state
            # saturates at 1 near the origin and vanishes near the endpoints.
            T=1.2,
            rho0_kind="constant",
            rho0_params={"value": 0.5},
            options=SchemeOptions(midpoint_option="O3", newton_tol=1e-12),
        )
    elif name == "envelope-drift-1d":
        spec = ExperimentSpec(
            name=name,
            domain_name="interval",
            domain_params={"a": -4.0, "b": 4.0},
            model_name="envelope-drift",
            model_params={},
            h=[0.25],
            p=2.0,
            T=3.0,
            rho0_kind="constant",
            rho0_params={"value": 0.6},
            options=SchemeOptions(midpoint_option="O3", newton_tol=1e-12),
        )
    elif name == "interaction-toy-1d":
        spec = ExperimentSpec(
            name=name,
            domain_name="interval",
            domain_params={"a": -1.0, "b": 1.0},
            model_name="interaction-toy",
            model_params={"kernel": "gaussian-attractive"},
            h=[0.1],
            p=2.0,
            T=0.1,
            rho0_kind="constant",
            rho0_params={"value": 0.5},
            options=SchemeOptions(midpoint_option="O3", newton_tol=1e-12),
        )
    elif name == "boundary-tilt-1d":
        spec = ExperimentSpec(
            name=name,
            domain_name="interval",
            domain_params={"a": 0.0, "b": 1.0},
            model_name="boundary-drift",
            model_params={},
            h=[0.05],
            p=2.0,
            T=0.2,
            rho0_kind="constant",
            rho0_params={"value": 0.5},
            options=SchemeOptions(midpoint_option="O3", newton_tol=1e-12),
        )
    else:
        raise ValueError(f"unknown preset {name!r}")
    if overrides:
        spec = replace(spec, **overrides)
    return spec


PRESETS = {
    "steady-square": "saturating drift-diffusion to a steady state on a square",
    "steady-peanut": "saturating drift-diffusion on a peanut-shaped domain",
    "energy-decay-1d": "attractive-kernel aggregation on an interval",
    "energy-decay-2d": "attractive-kernel aggregation on a square",
    "barenblatt-1d": "porous-medium convergence chain against the exact profile",
    "barenblatt-2d": "porous-medium convergence chain in two dimensions",
    "saturation-convergence-1d": "self-convergence chain with both free boundaries",
    "envelope-drift-1d": "drift with compactly supported V; envelopes certified",
    "interaction-toy-1d": "U = 0 interaction toy; dissipation is an identity",
    "boundary-tilt-1d": "V = x tilt; envelope hypotheses intentionally violated",
}


def preset_names() -> list[str]:
    return sorted(PRESETS)


def run_preset(spec: ExperimentSpec | str, output_dir=None) -> PresetResult:
    """Run every level of a preset, derive errors/rates, optionally
    persist CSV output, and return the in-memory bundle."""
    if isinstance(spec, str):
        spec = make_preset(spec)
    t0 = time.perf_counter()
    levels = [run_level(spec, h) for h in spec.h]
    result = PresetResult(name=spec.name, spec=spec, levels=levels)
    result.wall_time = time.perf_counter() - t0

    if spec.exact is not None:
        result.eps1 = [error_eps1(lv, spec.exact) for lv in levels]
    if len(levels) >= 2:
        result.eps2 = [error_eps2(levels[k], levels[k + 1]) for k in range(len(levels) - 1)]
    primary = result.eps1 if result.eps1 is not None else result.eps2
    if primary is not None and len(primary) >= 2:
        result.rates = rate_estimate(primary)

    model = levels[0].model
    if model.envelope_ok:
        params = envelope_params_from_model(model, levels[0].grids, levels[0].records[0].mass)
        ok, bad = extrema_envelope(levels[0].trajectory, params)
        result.envelope_checked = True
        result.envelope_ok = ok
        result.envelope_violation = bad

    if output_dir is not None:
        result.output_dir = Path(output_dir)
        _persist(result)
    return result


# ---------------------------------------------------------------------------
# deterministic CSV / JSON serialization

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_diagnostics_csv(path, records: list[DiagnosticsRecord]):
    cols = [
        "step",
        "time",
        "mass",
        "free_energy",
        "dissipation_lhs",
        "energy_drop",
        "min_density",
        "max_density",
        "entropy_slope_h1",
        "lambda_entropy",
        "newton_iters",
        "picard_iters",
        "residual_norm",
    ]
    lines = [",".join(cols)]
    for r in records:
        lines.append(",".join(_fmt(getattr(r, c)) for c in cols))
    Path(path).write_text("\n".join(lines) + "\n")


def write_snapshot_csv(path, state: StateField, grids: Grids):
    d = grids.dim
    cols = [f"i{k}" for k in range(d)] + [f"x{k}" for k in range(d)] + ["density"]
    lines = [",".join(cols)]
    centers = grids.centers()
    for pos, idx in enumerate(grids.cells.indices):
        cells = [str(i) for i in idx]
        cells += [_fmt(c) for c in centers[pos]]
        cells.append(_fmt(state.values[pos]))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot_csv(path) -> tuple[list[tuple[int, ...]], np.ndarray]:
    lines = Path(path).read_text().strip().split("\n")
    header = lines[0].split(",")
    d = sum(1 for c in header if c.startswith("i"))
    if "density" not in header:
        raise ValueError(f"snapshot {path} lacks a density column")
    dens_col = header.index("density")
    indices = []
    values = []
    for line in lines[1:]:
        parts = line.split(",")
        indices.append(tuple(int(parts[k]) for k in range(d)))
        values.append(float(parts[dens_col]))
    return indices, np.asarray(values)


def write_rates_csv(path, spec: ExperimentSpec, result: PresetResult):
    lines = ["level,h,tau,eps1,eps2,rate"]
    for k, lv in enumerate(result.levels):
        eps1 = result.eps1[k] if result.eps1 is not None else None
        eps2 = (
            result.eps2[k]
            if result.eps2 is not None and k < len(result.eps2)
            else None
        )
        rate = (
            result.rates[k]
            if result.rates is not None and k < len(result.rates)
            else None
        )
        lines.append(
            ",".join(
                [str(k), _fmt(spec.h[k]), _fmt(lv.tau), _fmt(eps1), _fmt(eps2), _fmt(rate)]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_manifest(path, spec: ExperimentSpec, result: PresetResult, wall_time: float, config_echo=None):
    doc = {
        "preset": spec.name,
        "package_version": __version__,
        "python_version": sys.version.split()[0],
        "wall_time_seconds": wall_time,
        "levels": [
            {
                "h": spec.h[k],
                "tau": lv.tau,
                "n_steps": len(lv.trajectory) - 1,
                "n_cells": lv.grids.n_cells,
                "stationary": lv.stationary,
            }
            for k, lv in enumerate(result.levels)
        ],
        "envelope_checked": result.envelope_checked,
        "envelope_ok": result.envelope_ok,
    }
    if config_echo is not None:
        doc["config"] = config_echo
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _persist(result: PresetResult):
    out = result.output_dir
    out.mkdir(parents=True, exist_ok=True)
    spec = result.spec
    for k, lv in enumerate(result.levels):
        tag = f"level{k}" if len(result.levels) > 1 else "run"
        write_diagnostics_csv(out / f"diagnostics_{tag}.csv", lv.records)
        steps = _snapshot_steps(len(lv.trajectory) - 1, spec.snapshot_every)
        for n in steps:
            write_snapshot_csv(
                out / f"snapshot_{tag}_step{n:06d}.csv", lv.trajectory[n], lv.grids
            )
    if result.eps1 is not None or result.eps2 is not None:
        write_rates_csv(out / "rates.csv", spec, result)
    write_manifest(out / "manifest.json", spec, result, result.wall_time)


def _snapshot_steps(n_total: int, every: int | None) -> list[int]:
    if every is None:
        # default cadence: about fifty snapshots over the run
        every = max(1, math.ceil(n_total / 50))
    steps = set(range(0, n_total + 1, every))
    steps.add(n_total)
    return sorted(steps)
