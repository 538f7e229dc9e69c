#!/usr/bin/env python3
"""
Tests for the command-line front door: exit codes, JSON and CSV output,
seeding and the experiment listing in run.py
"""

import sys
import os
# Add parent directory to path so we can import from root
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import argparse
import json

import pytest

import opctl
import run as entry
import waveline
from config import DEFAULT_SEED, SEED_ENV_VAR


def run_json(capsys, *argv):
    code = opctl.run(list(argv))
    return code, json.loads(capsys.readouterr().out)


def subcommands():
    parser = opctl.build_parser()
    action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return set(action.choices)


def test_balmer_paper_compat_json(capsys):
    code, doc = run_json(capsys, "balmer", "--k", "2", "--l-max", "7", "--paper-compat")
    assert code == 0
    assert doc["experiment"] == "balmer"
    assert doc["verdict"] == "pass"
    assert doc["config"]["paper_compat"] is True
    assert [line["wavelength_angstrom"] for line in doc["results"]["lines"]] == [6561, 4860, 4339, 4101, 3969]
    assert doc["results"]["observed_angstrom"] == [6563, 4861, 4380, 4102, 3921]
    assert set(doc) == {"experiment", "config", "results", "verdict", "tolerances"}


def test_balmer_whole_angstroms_alias(capsys):
    code, doc = run_json(capsys, "balmer", "--whole-angstroms")
    assert code == 0
    assert doc["config"]["paper_compat"] is True
    _, default = run_json(capsys, "balmer")
    assert default["config"]["paper_compat"] is False


def test_balmer_csv_artifacts(tmp_path):
    code = opctl.run(["balmer", "--whole-angstroms", "--format", "csv", "--out", str(tmp_path)])
    assert code == 0
    table = (tmp_path / "balmer.csv").read_bytes().decode("utf-8")
    lines = table.split("\n")
    assert "\r" not in table
    assert lines[0] == "k,l,wave_number_per_cm,wavelength_angstrom"
    assert lines[1].startswith("2,3,") and lines[1].endswith(",6561")
    assert json.loads((tmp_path / "balmer.json").read_text())["verdict"] == "pass"
    assert not list(tmp_path.glob("*.tmp"))


def test_json_written_to_file(tmp_path):
    target = tmp_path / "nested" / "bohr.json"
    assert opctl.run(["bohr", "--out", str(target)]) == 0
    doc = json.loads(target.read_text())
    assert doc["results"]["orbits"][0]["k"] == 1


def test_unknown_subcommand_is_a_usage_error():
    assert opctl.run(["no-such-experiment"]) == 2
    assert opctl.run([]) == 2


def test_bad_list_argument_is_a_usage_error():
    assert opctl.run(["ccr-obstruction", "--sizes", "2,x"]) == 2


def test_rejected_input_exit_code(capsys):
    assert opctl.run(["preclosed-demo", "--m-max", "30", "--dim", "5"]) == 2
    assert capsys.readouterr().out == ""


def test_failed_verdict_exit_code(capsys):
    assert opctl.run(["balmer", "--tol", "1e-9"]) == 2
    assert json.loads(capsys.readouterr().out)["verdict"] == "fail"


def test_random_suites_are_deterministic(capsys):
    argv = ["ccr-obstruction", "--sizes", "2,4", "--draws", "5", "--seed", "7"]
    first = run_json(capsys, *argv)
    second = run_json(capsys, *argv)
    assert first == second
    assert first[1]["config"]["seed"] == 7


def test_seed_resolution(monkeypatch):
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)
    assert opctl.resolve_seed(None) == DEFAULT_SEED
    assert opctl.resolve_seed(5) == 5
    monkeypatch.setenv(SEED_ENV_VAR, "42")
    assert opctl.resolve_seed(None) == 42
    monkeypatch.setenv(SEED_ENV_VAR, "forty-two")
    with pytest.raises(opctl.RejectedInputError):
        opctl.resolve_seed(None)


def test_streams_are_independent_and_reproducible():
    a1, b1 = opctl.make_streams(3, 2)
    a2, _ = opctl.make_streams(3, 2)
    assert a1.standard_normal() == a2.standard_normal()
    assert a1.standard_normal() != b1.standard_normal()


def test_format_cell_and_jsonable():
    assert opctl.format_cell(True) == "true"
    assert opctl.format_cell(3) == "3"
    assert opctl.format_cell(0.1) == "0.10000000000000001"
    assert opctl.jsonable(1 + 2j) == {"re": 1.0, "im": 2.0}
    assert opctl.jsonable(float("inf")) == "inf"


def test_grid_heisenberg_spectral(capsys):
    code, doc = run_json(capsys, "grid-heisenberg", "--mode", "spectral", "--n", "256")
    assert code == 0
    assert doc["results"]["residual"] <= 1e-8


def test_grid_heisenberg_central_ratios(capsys):
    code, doc = run_json(capsys, "grid-heisenberg")
    assert code == 0
    assert all(abs(r - 4.0) <= 0.4 for r in doc["results"]["refinement_ratios"])


def test_bernstein_identities_goldens(capsys):
    code, doc = run_json(capsys, "bernstein-identities", "--n", "10", "--x", "0.5")
    assert code == 0
    moments = doc["results"]["10"]
    assert moments["second central moment"]["direct"][0] == pytest.approx(0.025)
    assert moments["fourth central moment"]["direct"][0] == pytest.approx(0.00175)


def test_wielandt_reports_diagonal_example(capsys):
    code, doc = run_json(capsys, "wielandt", "--sizes", "2,3", "--draws", "5")
    assert code == 0
    assert doc["results"]["diagonal_example_inverse"] == pytest.approx([1.0, 4.0 / 3.0])


def test_domain_diagnostic_exports_samples(capsys, tmp_path):
    code, doc = run_json(capsys, "domain-diagnostic", "--function", "gaussian")
    assert code == 0
    samples = waveline.GridFunction.from_dict(doc["results"]["samples"])
    assert samples.n == 1024
    assert samples.values.real.max() == pytest.approx(1.0, rel=1e-3)
    assert doc["results"]["verdict"] == "converging"
    assert opctl.run(["domain-diagnostic", "--function", "step", "--format", "csv", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "domain-diagnostic-samples.csv").read_text().split("\n")
    assert lines[0] == "s,re,im"
    assert len([line for line in lines[1:] if line]) == 1024


def test_ccr_obstruction_physical_units(capsys):
    code, doc = run_json(capsys, "ccr-obstruction", "--physical-units", "--sizes", "2", "--draws", "2")
    assert code == 0
    assert doc["config"]["hbar"] == pytest.approx(1.0544e-27, rel=1e-3)
    assert doc["results"]["oscillator_example"]["hbar"] == pytest.approx(1.0544e-27, rel=1e-3)


@pytest.mark.parametrize("argv", [
    ["planck"],
    ["debroglie"],
    ["bohr"],
    ["spectrum-symmetry", "--sizes", "2,4", "--draws", "5"],
    ["oscillator-truncation", "--n-max", "8"],
    ["truncation-identity", "--n", "32", "--cutoffs", "5,10"],
    ["preclosed-demo"],
    ["jump-profile", "--n-grid", "1024"],
    ["domain-diagnostic", "--function", "gaussian"],
    ["domain-diagnostic", "--function", "step"],
    ["domain-diagnostic", "--function", "zero", "--n", "256"],
    ["volterra", "--n", "128", "--draws", "5"],
    ["d3-skew", "--n", "128", "--draws", "5"],
    ["averaging"],
    ["averaging", "--function", "constant", "--n", "512"],
    ["bernstein-approx", "--function", "square", "--n-values", "10,20,40"],
    ["spectral-decompose", "--sizes", "2,4", "--draws", "2"],
    ["polar", "--sizes", "2,4", "--draws", "3"],
    ["vn-lattice", "--draws", "5"],
    ["vn-trace", "--draws", "5"],
])
def test_experiments_pass(capsys, argv):
    code, doc = run_json(capsys, *argv)
    assert code == 0, doc
    assert doc["verdict"] == "pass"


def test_run_menu_lists_every_experiment():
    listed = {name for _, names in entry.EXPERIMENT_GROUPS for name in names}
    assert listed == subcommands()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
