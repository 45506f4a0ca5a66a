"""Command-line interface: config validation, subcommands, exit codes."""

import json

import pytest

from aggdiff.cli import ConfigError, load_config, main, spec_from_config


def _write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_presets_command_lists_all(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "barenblatt-1d" in out
    assert "steady-peanut" in out


def test_run_writes_artifacts(tmp_path, capsys):
    cfg = _write_config(tmp_path, {"preset": "interaction-toy-1d"})
    out = tmp_path / "out"
    assert main(["--quiet", "run", "--config", cfg, "--output", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert "manifest.json" in names
    assert "diagnostics_run.csv" in names
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["preset"] == "interaction-toy-1d"
    assert manifest["package_version"]


def test_run_without_output_dir_is_quiet_success(tmp_path):
    cfg = _write_config(tmp_path, {"preset": "interaction-toy-1d"})
    assert main(["--quiet", "run", "--config", cfg]) == 0


def test_run_honors_overrides(tmp_path):
    cfg = _write_config(
        tmp_path,
        {
            "preset": "interaction-toy-1d",
            "overrides": {"T": 0.05, "rho0_value": 0.4, "h": 0.2},
        },
    )
    out = tmp_path / "out"
    assert main(["--quiet", "run", "--config", cfg, "--output", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["levels"][0]["h"] == 0.2
    assert manifest["config"]["overrides"]["T"] == 0.05


def test_missing_config_file_exit_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2


def test_malformed_json_reports_position(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"preset": "pme",}')
    assert main(["run", "--config", str(path)]) == 2
    err = capsys.readouterr().err
    assert "line 1" in err


def test_unknown_config_key_exit_2(tmp_path, capsys):
    cfg = _write_config(tmp_path, {"preset": "interaction-toy-1d", "tav": 0.1})
    assert main(["run", "--config", cfg]) == 2
    assert "tav" in capsys.readouterr().err


def test_unknown_preset_lists_known(tmp_path, capsys):
    cfg = _write_config(tmp_path, {"preset": "heat-equation"})
    assert main(["run", "--config", cfg]) == 2
    err = capsys.readouterr().err
    assert "heat-equation" in err
    assert "barenblatt-1d" in err


def test_bad_midpoint_option_exit_2(tmp_path):
    cfg = _write_config(
        tmp_path, {"preset": "interaction-toy-1d", "overrides": {"midpoint_option": "O4"}}
    )
    assert main(["run", "--config", cfg]) == 2


def test_rho0_override_requires_constant_preset():
    with pytest.raises(ConfigError, match="rho0_value"):
        spec_from_config({"preset": "barenblatt-1d", "overrides": {"rho0_value": 0.5}})


def test_spec_from_config_option_overrides():
    spec = spec_from_config(
        {
            "preset": "interaction-toy-1d",
            "overrides": {"midpoint_option": "O2", "newton_tol": 1e-9},
        }
    )
    assert spec.options.midpoint_option == "O2"
    assert spec.options.newton_tol == 1e-9


def test_load_config_roundtrip(tmp_path):
    cfg = _write_config(tmp_path, {"preset": "pme"})
    with pytest.raises(ConfigError, match="unknown preset"):
        load_config(cfg)  # model names are not preset names
    cfg = _write_config(tmp_path, {"preset": "barenblatt-1d"})
    assert load_config(cfg)["preset"] == "barenblatt-1d"


def test_convergence_requires_two_levels(tmp_path, capsys):
    cfg = _write_config(
        tmp_path, {"preset": "barenblatt-1d", "overrides": {"h": 0.4}}
    )
    assert main(["--quiet", "convergence", "--config", cfg]) == 2
    assert "two spacing levels" in capsys.readouterr().err


def test_convergence_rejects_broken_chain(tmp_path, capsys):
    cfg = _write_config(
        tmp_path, {"preset": "barenblatt-1d", "overrides": {"h": [0.4, 0.25]}}
    )
    assert main(["--quiet", "convergence", "--config", cfg]) == 2
    assert "halve" in capsys.readouterr().err


def test_convergence_runs_tiny_chain(tmp_path):
    cfg = _write_config(
        tmp_path,
        {"preset": "barenblatt-1d", "overrides": {"h": [0.4, 0.2], "T": 0.16}},
    )
    out = tmp_path / "conv"
    assert main(["--quiet", "convergence", "--config", cfg, "--output", str(out)]) == 0
    lines = (out / "rates.csv").read_text().splitlines()
    assert lines[0] == "level,h,tau,eps1,eps2,rate"
    assert len(lines) == 3


def test_norms_on_written_snapshot(tmp_path, capsys):
    cfg = _write_config(tmp_path, {"preset": "interaction-toy-1d"})
    out = tmp_path / "run"
    assert main(["--quiet", "run", "--config", cfg, "--output", str(out)]) == 0
    snap = sorted(out.glob("snapshot_*.csv"))[0]
    assert main(["--quiet", "norms", "--config", cfg, "--field", str(snap)]) == 0
    doc = json.loads(capsys.readouterr().out)
    # 19 interior cells on (-1,1) at h=0.1 (boundary-centered cells excluded)
    assert doc["mass"] == pytest.approx(0.5 * 19 * 0.1)
    assert doc["h1_seminorm"] == pytest.approx(0.0)
    assert doc["wm11_exact"] is not None


def test_norms_rejects_mismatched_grid(tmp_path, capsys):
    cfg = _write_config(tmp_path, {"preset": "interaction-toy-1d"})
    out = tmp_path / "run"
    assert main(["--quiet", "run", "--config", cfg, "--output", str(out)]) == 0
    snap = sorted(out.glob("snapshot_*.csv"))[0]
    other = _write_config(
        tmp_path,
        {"preset": "interaction-toy-1d", "overrides": {"h": 0.05}},
        name="other.json",
    )
    assert main(["--quiet", "norms", "--config", other, "--field", str(snap)]) == 1
    assert "does not match" in capsys.readouterr().err


def test_argparse_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
