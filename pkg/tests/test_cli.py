import json
import os

import pytest

from hypcircle.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, build_parser, config_from_args, run
from hypcircle.errors import ConfigError

EXPERIMENTS_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "experiments")


def test_no_arguments_is_a_usage_error():
    assert run([]) == EXIT_USAGE


def test_unknown_flag_is_a_usage_error():
    assert run(["count", "--bogus"]) == EXIT_USAGE


def test_version_exits_cleanly():
    assert run(["--version"]) == EXIT_OK


def test_flags_merge_over_preset():
    args = build_parser().parse_args(["count", "--rmax", "4", "--seed", "7", "--option", "ratio_window=[0.9, 1.1]",
                                      "--option", "fit_from=3"])
    data = config_from_args(args, {"subcommand": "count", "seed": 1, "options": {"oracle_radius": 2.0}})
    assert data["seed"] == 7
    assert data["r_grid"] == "1:4.0:1"
    assert data["options"] == {"oracle_radius": 2.0, "ratio_window": [0.9, 1.1], "fit_from": 3}


def test_nu_shorthand_sets_observable():
    args = build_parser().parse_args(["ode-check", "--nu", "2i", "--tmax", "3"])
    data = config_from_args(args)
    assert data["observable"] == "eigen:nu=2i"
    assert data["t_grid"] == "1:3.0:1"


def test_malformed_option_is_rejected():
    args = build_parser().parse_args(["count", "--option", "no-equals-sign"])
    with pytest.raises(ConfigError):
        config_from_args(args)


def test_invalid_config_is_a_usage_error(tmp_path):
    assert run(["ode-check", "--theta", "7pi", "--out", str(tmp_path), "-q"]) == EXIT_USAGE


def test_count_run_writes_outputs(tmp_path):
    code = run(["count", "--rmax", "2", "--out", str(tmp_path), "--name", "small", "-q",
                "--option", "oracle_radius=1.5"])
    assert code == EXIT_OK
    for suffix in ("counts.csv", "manifest.json", "summary.md"):
        assert (tmp_path / f"small_{suffix}").exists()
    manifest = json.loads((tmp_path / "small_manifest.json").read_text(encoding="utf-8"))
    assert manifest["passed"] is True
    assert manifest["config"]["r_grid"] == [1.0, 2.0]
    assert any(c["name"] == "brute-force oracle" for c in manifest["checks"])


def test_wrong_observable_keeps_manifest(tmp_path):
    code = run(["equidist", "--nu", "0.5", "--t-grid", "1,2", "--out", str(tmp_path), "--name", "eq", "-q"])
    assert code == EXIT_USAGE
    manifest = json.loads((tmp_path / "eq_manifest.json").read_text(encoding="utf-8"))
    assert manifest["passed"] is False
    assert manifest["errors"] and manifest["errors"][0].startswith("ConfigError")


def test_list_presets(capsys):
    assert run(["list-presets", "--experiments-dir", EXPERIMENTS_DIR]) == EXIT_OK
    out = capsys.readouterr().out
    assert "count_237 [count]" in out


def test_unknown_preset_is_a_usage_error():
    assert run(["run-preset", "missing", "--experiments-dir", EXPERIMENTS_DIR]) == EXIT_USAGE


def test_full_circle_check_needs_a_flat_observable(tmp_path):
    code = run(["dlt", "--observable", "bump:width=0.2", "--t-grid", "1,2", "--samples", "4",
                "--option", "nocl=true", "--out", str(tmp_path), "--name", "bump", "-q"])
    assert code == EXIT_USAGE
    manifest = json.loads((tmp_path / "bump_manifest.json").read_text(encoding="utf-8"))
    assert manifest["errors"][0].startswith("ConfigError")
    assert "full-circle" in manifest["errors"][0]


@pytest.mark.slow
def test_tangent_deviation_laws_contract(tmp_path):
    code = run(["dlt", "--observable", "tangent:delta=0.5,c=1", "--t-grid", "4,6,8", "--samples", "60",
                "--tol", "1e-7", "--option", "max_spread=40", "--option", "nocl=true",
                "--out", str(tmp_path), "--name", "tangent", "-q"])
    manifest = json.loads((tmp_path / "tangent_manifest.json").read_text(encoding="utf-8"))
    checks = {c["name"]: c["passed"] for c in manifest["checks"]}
    assert checks["LP distance decreases"]
    assert checks["full-circle deviation at noise floor"]
    assert code == EXIT_OK


@pytest.mark.slow
def test_expand_checks_theta_scaling(tmp_path):
    code = run(["expand", "--nu", "0.5", "--theta", "pi", "--t-grid", "3,4,5", "--tol", "1e-9",
                "--option", "base=[0.0, 1.0, 5.497787143782138]", "--option", "thetas=[pi, 2pi, 4pi]",
                "--out", str(tmp_path), "--name", "scaling", "-q"])
    manifest = json.loads((tmp_path / "scaling_manifest.json").read_text(encoding="utf-8"))
    checks = {c["name"]: c["passed"] for c in manifest["checks"]}
    assert checks["theta |D+-| within a factor across arc lengths"]
    assert code in (EXIT_OK, EXIT_FAILED)
