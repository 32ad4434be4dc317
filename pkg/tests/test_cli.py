"""Tests for the command-line driver: config validation, scenario runs,
report determinism, CSV contracts, and the verify suites."""

import csv
import json
import subprocess
import sys

import pytest

from maslovlab import cli
from maslovlab.cli import ConfigError, main, run_suite


def write_config(tmp_path, payload, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_report(out_dir):
    with open(out_dir / "report.json") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Config validation


def test_rejects_wrong_schema_version(tmp_path, capsys):
    cfg = write_config(tmp_path, {"schema": 2, "kind": "maslov_path"})
    assert main(["run", cfg]) == 1
    assert "'schema'" in capsys.readouterr().err


def test_rejects_unknown_kind(tmp_path, capsys):
    cfg = write_config(tmp_path, {"schema": 1, "kind": "mystery"})
    assert main(["run", cfg]) == 1
    assert "'kind'" in capsys.readouterr().err


def test_rejects_unknown_top_level_field(tmp_path, capsys):
    cfg = write_config(
        tmp_path, {"schema": 1, "kind": "maslov_path", "note": "hi"}
    )
    assert main(["run", cfg]) == 1
    assert "'note'" in capsys.readouterr().err


def test_rejects_unknown_parameter(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {"schema": 1, "kind": "maslov_path", "parameters": {"bogus": 1}},
    )
    assert main(["run", cfg]) == 1
    assert "parameters.bogus" in capsys.readouterr().err


def test_rejects_bad_parameter_value(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {"schema": 1, "kind": "maslov_path", "parameters": {"dim": 3}},
    )
    assert main(["run", cfg]) == 1
    err = capsys.readouterr().err
    assert "parameters.dim" in err and "even integer" in err


def test_rejects_missing_required_parameter(tmp_path, capsys):
    cfg = write_config(tmp_path, {"schema": 1, "kind": "property_suite"})
    assert main(["run", cfg]) == 1
    assert "parameters.suite" in capsys.readouterr().err


def test_rejects_malformed_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["run", str(path)]) == 1
    assert "not valid JSON" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.json")]) == 1
    assert "cannot read config" in capsys.readouterr().err


def test_rejects_bad_seed(tmp_path, capsys):
    cfg = write_config(tmp_path, {"schema": 1, "kind": "maslov_path", "seed": -1})
    assert main(["run", cfg]) == 1
    assert "'seed'" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# Pinned scenario results


def test_benchmark_run_reports_unit_counts(tmp_path):
    cfg = write_config(
        tmp_path,
        {"schema": 1, "kind": "maslov_path", "parameters": {"family": "benchmark"}},
    )
    out = tmp_path / "out"
    assert main(["run", cfg, "--out-dir", str(out)]) == 0
    report = read_report(out)
    assert report["results"]["mas_plus"] == 1
    assert report["results"]["mas_minus"] == 1
    crossings = report["results"]["crossings"]
    assert len(crossings) == 1
    assert crossings[0]["t"] == pytest.approx(0.5, abs=1e-6)
    assert crossings[0]["signature"] == [1, 0, 0]


def test_constant_path_reports_zeros(tmp_path):
    cfg = write_config(
        tmp_path,
        {"schema": 1, "kind": "maslov_path", "parameters": {"family": "constant"}},
    )
    out = tmp_path / "out"
    assert main(["run", cfg, "--out-dir", str(out)]) == 0
    report = read_report(out)
    assert report["results"]["mas_plus"] == 0
    assert report["results"]["mas_minus"] == 0
    assert report["results"]["crossings"] == []


def test_scalar_desuspension_report(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "schema": 1,
            "kind": "bvp_desuspension",
            "parameters": {"family": "scalar_periodic"},
        },
    )
    out = tmp_path / "out"
    assert main(["run", cfg, "--out-dir", str(out)]) == 0
    results = read_report(out)["results"]
    assert results["sf"] == 1
    assert results["neg_mas"] == 1
    assert results["agree"] is True
    assert (out / "eigenvalue_curves.csv").exists()


def test_bvp_splitting_run(tmp_path):
    cfg = write_config(
        tmp_path,
        {"schema": 1, "kind": "bvp_splitting", "parameters": {"cut": 0.4}},
    )
    out = tmp_path / "out"
    assert main(["run", cfg, "--out-dir", str(out)]) == 0
    results = read_report(out)["results"]
    assert results["sf"] == results["neg_mas_cut"] == 1
    assert results["agree"] is True


def test_spectral_flow_run(tmp_path):
    cfg = write_config(
        tmp_path,
        {"schema": 1, "kind": "spectral_flow", "seed": 3, "parameters": {"dim": 3}},
    )
    out = tmp_path / "out"
    assert main(["run", cfg, "--out-dir", str(out)]) == 0
    results = read_report(out)["results"]
    assert isinstance(results["sf"], int)
    start = results["endpoint_eigenvalues"]["start"]
    assert start == sorted(start)
    assert len(start) == 3


def test_reduction_demo_run(tmp_path):
    cfg = write_config(tmp_path, {"schema": 1, "kind": "reduction_demo", "seed": 2})
    out = tmp_path / "out"
    assert main(["run", cfg, "--out-dir", str(out)]) == 0
    results = read_report(out)["results"]
    assert results["agree"] is True
    assert (out / "theta_curves.csv").exists()


def test_property_suite_run(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "schema": 1,
            "kind": "property_suite",
            "parameters": {"suite": "flipping", "trials": 4},
        },
    )
    out = tmp_path / "out"
    assert main(["run", cfg, "--out-dir", str(out)]) == 0
    results = read_report(out)["results"]
    assert results["trials"] == 4
    assert results["failures"] == 0


# ---------------------------------------------------------------------------
# Determinism and seed handling


def test_same_config_and_seed_byte_identical(tmp_path):
    cfg = write_config(
        tmp_path,
        {"schema": 1, "kind": "maslov_path", "seed": 11,
         "parameters": {"family": "seeded"}},
    )
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", cfg, "--out-dir", str(out_a)]) == 0
    assert main(["run", cfg, "--out-dir", str(out_b)]) == 0
    assert (out_a / "report.json").read_bytes() == (out_b / "report.json").read_bytes()
    assert (out_a / "theta_curves.csv").read_bytes() == (
        out_b / "theta_curves.csv"
    ).read_bytes()


def test_env_seed_overrides_config(tmp_path, monkeypatch):
    cfg = write_config(
        tmp_path,
        {"schema": 1, "kind": "maslov_path", "seed": 11,
         "parameters": {"family": "seeded"}},
    )
    out = tmp_path / "out"
    monkeypatch.setenv("MASLOVLAB_SEED", "23")
    assert main(["run", cfg, "--out-dir", str(out)]) == 0
    assert read_report(out)["seed"] == 23


def test_bad_env_seed_is_a_config_error(tmp_path, monkeypatch, capsys):
    cfg = write_config(tmp_path, {"schema": 1, "kind": "maslov_path"})
    monkeypatch.setenv("MASLOVLAB_SEED", "eleven")
    assert main(["run", cfg]) == 1
    assert "MASLOVLAB_SEED" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# CSV contracts


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_theta_csv_round_trip_and_monotone_s(tmp_path):
    cfg = write_config(
        tmp_path,
        {"schema": 1, "kind": "maslov_path", "seed": 7,
         "parameters": {"family": "seeded", "method": "winding"}},
    )
    out = tmp_path / "out"
    assert main(["run", cfg, "--out-dir", str(out)]) == 0
    header, rows = read_csv(out / "theta_curves.csv")
    assert header == ["s", "branch_index", "theta"]
    s_vals = [float(row[0]) for row in rows]
    assert all(a <= b for a, b in zip(s_vals, s_vals[1:]))
    assert {int(row[1]) for row in rows} == {0, 1}
    for row in rows:
        float(row[2])
    assert s_vals[0] == 0.0 and s_vals[-1] == 1.0


def test_eigen_csv_contract(tmp_path):
    cfg = write_config(
        tmp_path,
        {"schema": 1, "kind": "spectral_flow", "seed": 1, "parameters": {"dim": 2}},
    )
    out = tmp_path / "out"
    assert main(["run", cfg, "--out-dir", str(out)]) == 0
    header, rows = read_csv(out / "eigenvalue_curves.csv")
    assert header == ["s", "eig_index", "value"]
    s_vals = [float(row[0]) for row in rows]
    assert all(a <= b for a, b in zip(s_vals, s_vals[1:]))
    assert {int(row[1]) for row in rows} == {0, 1}


def test_report_references_curve_files(tmp_path):
    cfg = write_config(
        tmp_path,
        {"schema": 1, "kind": "maslov_path",
         "parameters": {"family": "benchmark", "method": "winding"}},
    )
    out = tmp_path / "out"
    assert main(["run", cfg, "--out-dir", str(out)]) == 0
    report = read_report(out)
    assert report["files"] == {"theta_curves": "theta_curves.csv"}
    assert (out / "theta_curves.csv").exists()


# ---------------------------------------------------------------------------
# Exit-code mapping


def test_numerical_gate_maps_to_exit_2(tmp_path, monkeypatch, capsys):
    def gate_failure(params, seed, tols):
        raise ValueError("sampling resolution exhausted")

    monkeypatch.setitem(cli._SCENARIOS, "maslov_path", gate_failure)
    cfg = write_config(tmp_path, {"schema": 1, "kind": "maslov_path"})
    assert main(["run", cfg]) == 2
    assert "numerical gate failure" in capsys.readouterr().err


def test_invariant_violation_maps_to_exit_3(tmp_path, monkeypatch, capsys):
    monkeypatch.setitem(
        cli.SUITES, "flipping", ("anchor text", lambda trials, seed, tols: 2)
    )
    cfg = write_config(
        tmp_path,
        {
            "schema": 1,
            "kind": "property_suite",
            "parameters": {"suite": "flipping", "trials": 5},
        },
    )
    assert main(["run", cfg]) == 3
    err = capsys.readouterr().err
    assert "invariant violation" in err and "flipping" in err


# ---------------------------------------------------------------------------
# verify command


def test_verify_unknown_suite_exits_1(capsys):
    assert main(["verify", "nosuch"]) == 1
    assert "unknown suite" in capsys.readouterr().err


def test_verify_flipping_prints_table(capsys):
    assert main(["verify", "flipping", "--trials", "3"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert len(lines) == 2
    assert "identity" in lines[0] and "anchor" in lines[0]
    assert "trials" in lines[0] and "failures" in lines[0]
    assert lines[1].startswith("flipping")
    assert lines[1].split()[-2:] == ["3", "0"]


def test_verify_seed_changes_trials_not_outcome(capsys):
    assert main(["verify", "constancy", "--trials", "4", "--seed", "5"]) == 0
    assert main(["verify", "constancy", "--trials", "4", "--seed", "6"]) == 0


def test_verify_rejects_nonpositive_trials(capsys):
    assert main(["verify", "flipping", "--trials", "0"]) == 1
    assert "--trials" in capsys.readouterr().err


def test_verify_failures_exit_3(monkeypatch, capsys):
    monkeypatch.setitem(
        cli.SUITES, "flipping", ("anchor text", lambda trials, seed, tols: 1)
    )
    assert main(["verify", "flipping", "--trials", "2"]) == 3
    assert capsys.readouterr().out.strip().splitlines()[1].split()[-1] == "1"


def test_run_suite_rejects_unknown_name():
    with pytest.raises(ConfigError, match="unknown suite"):
        run_suite("nosuch", 1, 0)


def test_module_entry_point(tmp_path):
    cfg = write_config(
        tmp_path,
        {"schema": 1, "kind": "maslov_path",
         "parameters": {"family": "benchmark", "method": "winding"}},
    )
    proc = subprocess.run(
        [sys.executable, "-m", "maslovlab.cli", "run", cfg,
         "--out-dir", str(tmp_path / "out")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "mas_plus=1" in proc.stdout
