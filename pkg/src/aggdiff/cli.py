"""Command-line front end.

Subcommands: run (one level), convergence (spacing chain with error
estimators), norms (discrete norms of a stored field), presets (list).
Configuration is a JSON document validated against a closed schema;
unknown keys are rejected.  Exit codes: 0 success, 1 runtime failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import jsonschema
import numpy as np

from .diagnostics import h1_seminorm, total_mass, wm11_exact_1d, wm11_upper_bound
from .grid import MeshSpec, build_grids, make_domain
from .harness import (
    PRESETS,
    make_preset,
    preset_names,
    read_snapshot_csv,
    run_preset,
    write_manifest,
)
from .scheme import SolverError

logger = logging.getLogger("aggdiff")

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["preset"],
    "properties": {
        "preset": {"type": "string"},
        "seed": {"type": "integer"},
        "output_dir": {"type": "string"},
        "overrides": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "h": {
                    "anyOf": [
                        {"type": "number", "exclusiveMinimum": 0},
                        {
                            "type": "array",
                            "items": {"type": "number", "exclusiveMinimum": 0},
                            "minItems": 1,
                        },
                    ]
                },
                "p": {"type": "number", "minimum": 1},
                "T": {"type": "number", "exclusiveMinimum": 0},
                "rho0_value": {"type": "number"},
                "midpoint_option": {"enum": ["O1", "O2", "O3"]},
                "newton_tol": {"type": "number", "exclusiveMinimum": 0},
                "newton_max_iters": {"type": "integer", "minimum": 1},
                "picard_max_iters": {"type": "integer", "minimum": 1},
                "stationarity_tol": {"type": ["number", "null"]},
                "snapshot_every": {"type": ["integer", "null"], "minimum": 1},
                "max_tau_retries": {"type": "integer", "minimum": 0},
            },
        },
    },
}


class ConfigError(Exception):
    pass


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"malformed JSON in {path}: {err.msg} at line {err.lineno} column {err.colno}"
        ) from err
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        where = "/".join(str(p) for p in err.absolute_path) or "document root"
        raise ConfigError(f"invalid config {path}: {err.message} (at {where})") from err
    if doc["preset"] not in PRESETS:
        known = ", ".join(preset_names())
        raise ConfigError(f"unknown preset {doc['preset']!r}; known presets: {known}")
    return doc


def spec_from_config(doc: dict):
    spec = make_preset(doc["preset"])
    ov = doc.get("overrides", {})
    fields = {}
    if "h" in ov:
        h = ov["h"]
        fields["h"] = [float(v) for v in h] if isinstance(h, list) else [float(h)]
    for key in ("p", "T", "stationarity_tol", "max_tau_retries", "snapshot_every"):
        if key in ov:
            fields[key] = ov[key]
    if "rho0_value" in ov:
        if spec.rho0_kind != "constant":
            raise ConfigError(
                f"preset {spec.name!r} does not take rho0_value (initial datum is "
                f"{spec.rho0_kind})"
            )
        fields["rho0_params"] = {"value": float(ov["rho0_value"])}
    opt_keys = ("midpoint_option", "newton_tol", "newton_max_iters", "picard_max_iters")
    opt_over = {k: ov[k] for k in opt_keys if k in ov}
    if opt_over:
        fields["options"] = replace(spec.options, **opt_over)
    if "seed" in doc:
        fields["seed"] = doc["seed"]
    return replace(spec, **fields) if fields else spec


def _output_dir(args, doc: dict) -> Path | None:
    if args.output is not None:
        return Path(args.output)
    if "output_dir" in doc:
        return Path(doc["output_dir"])
    return None


def cmd_run(args) -> int:
    doc = load_config(args.config)
    spec = spec_from_config(doc)
    spec = replace(spec, h=spec.h[:1])
    out = _output_dir(args, doc)
    t0 = time.perf_counter()
    result = run_preset(spec, output_dir=out)
    wall = time.perf_counter() - t0
    lv = result.levels[0]
    logger.info(
        "%s: %d cells, %d steps, final mass %.12g",
        spec.name,
        lv.grids.n_cells,
        len(lv.trajectory) - 1,
        result.levels[0].records[-1].mass,
    )
    if out is not None:
        write_manifest(out / "manifest.json", spec, result, wall, config_echo=doc)
    return 0


def cmd_convergence(args) -> int:
    doc = load_config(args.config)
    spec = spec_from_config(doc)
    if len(spec.h) < 2:
        raise ConfigError("convergence needs at least two spacing levels")
    for a, b in zip(spec.h, spec.h[1:]):
        if abs(a / b - 2.0) > 1e-9:
            raise ConfigError(f"spacing chain must halve: got {a} -> {b}")
    if spec.exact is None and abs(spec.p - round(spec.p)) > 1e-12:
        raise ConfigError(
            "self-convergence (no exact solution) needs a natural exponent p "
            "so the coarse time grid subsamples the fine one"
        )
    out = _output_dir(args, doc)
    t0 = time.perf_counter()
    result = run_preset(spec, output_dir=out)
    wall = time.perf_counter() - t0
    errors = result.eps1 if result.eps1 is not None else result.eps2
    logger.info("%s: errors %s rates %s", spec.name, errors, result.rates)
    if out is not None:
        write_manifest(out / "manifest.json", spec, result, wall, config_echo=doc)
    return 0


def cmd_norms(args) -> int:
    doc = load_config(args.config)
    spec = spec_from_config(doc)
    domain = make_domain(spec.domain_name, **spec.domain_params)
    grids = build_grids(MeshSpec((spec.h[0],) * domain.dim), domain)
    indices, values = read_snapshot_csv(args.field)
    if indices != grids.cells.indices:
        raise ValueError(
            f"field in {args.field} does not match the {spec.name} grid at h={spec.h[0]}"
        )
    out = {
        "mass": total_mass(values, grids),
        "h1_seminorm": h1_seminorm(values, grids),
        "wm11_upper_bound": wm11_upper_bound(values, grids),
        "wm11_exact": wm11_exact_1d(values, grids) if grids.dim == 1 else None,
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_presets(args) -> int:
    for name in preset_names():
        print(f"{name}: {PRESETS[name]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aggdiff",
        description="implicit upwind finite-volume runs for gradient-flow equations",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single level of a preset")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--output", default=None)
    p_run.set_defaults(fn=cmd_run)

    p_conv = sub.add_parser("convergence", help="run a spacing chain and report rates")
    p_conv.add_argument("--config", required=True)
    p_conv.add_argument("--output", default=None)
    p_conv.set_defaults(fn=cmd_convergence)

    p_norms = sub.add_parser("norms", help="discrete norms of a stored field")
    p_norms.add_argument("--config", required=True)
    p_norms.add_argument("--field", required=True, help="snapshot CSV to evaluate")
    p_norms.set_defaults(fn=cmd_norms)

    p_presets = sub.add_parser("presets", help="list built-in presets")
    p_presets.set_defaults(fn=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (SolverError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
