from __future__ import annotations

import json
import subprocess
import sys

import jsonschema
import pytest

from _fixtures import CLI_CASES, run_cli
from wkahler.cli import SUBCOMMANDS
from wkahler.serialize import OUTPUT_SCHEMA


def test_every_subcommand_has_a_case():
    assert set(CLI_CASES) == set(SUBCOMMANDS)


@pytest.mark.parametrize("name", sorted(CLI_CASES))
def test_json_round_trip(name):
    code, out, err = run_cli(CLI_CASES[name])
    assert code == 0, err
    report = json.loads(out)
    jsonschema.validate(report, OUTPUT_SCHEMA)
    assert report["subcommand"] == name
    assert json.dumps(report, indent=2, sort_keys=True) + "\n" == out


@pytest.mark.parametrize("name", sorted(CLI_CASES))
def test_verify_agrees(name):
    code, out, err = run_cli(CLI_CASES[name] + ["--verify", "--samples", "20000"])
    assert code == 0, err
    assert json.loads(out)["verify"]["agrees"] is True


@pytest.mark.parametrize("name", sorted(CLI_CASES))
def test_text_mode(name):
    code, out, _ = run_cli(CLI_CASES[name] + ["--text"])
    assert code == 0 and "provenance" in out


def test_golden_outputs():
    r = json.loads(run_cli(["p1-bundle", "--p", "1", "--c", "3", "--d", "2", "--lambda", "1"])[1])
    assert r["result"]["beta"] == "14/17" and r["claims"]["beta"] == "exact"
    r = json.loads(run_cli(["sgr", "--n", "2"])[1])
    assert r["result"]["beta"] == "15/16"
    sym = json.dumps({"polytope": {"vertices": [[-1, -1], [1, -1], [1, 1], [-1, 1]]}})
    r = json.loads(run_cli(["beta-toric", "-i", sym])[1])
    assert r["result"]["beta"] == "1" and r["claims"]["delta"] == "lower_bound"


def test_fibration_report_names_the_achiever():
    r = json.loads(run_cli(CLI_CASES["fibration"])[1])["result"]
    assert r["beta_comp"] == "11/17" and r["achiever"] == "basis:0" and r["compatibly_fano"] is True


def test_float_mode_renders_floats():
    r = json.loads(run_cli(CLI_CASES["p1-bundle"] + ["--float"])[1])
    assert r["mode"] == "float" and r["result"]["beta"] == pytest.approx(14 / 17)


EXPR = {"type": "expr", "tree": {"op": "exp", "arg": {"op": "affine", "p": [1], "c": 0}}}


def test_expression_weights_need_float_mode():
    doc = json.dumps({"polytope": {"vertices": [[-1], [1]]}, "weight": EXPR})
    assert run_cli(["barycenter", "-i", doc])[0] == 2
    code, out, _ = run_cli(["barycenter", "--float", "-i", doc])
    assert code == 0
    assert json.loads(out)["claims"]["barycenter"] == "numerical"


@pytest.mark.parametrize("argv", [
    ["p1-bundle", "--p", "1", "--c", "1", "--d", "2"],
    ["sgr", "--n", "0"],
    ["sgr"],
    ["zz", "--r", "1", "--delta-b", "1", "--beta0", "1"],
    ["p1-bundle", "--p", "1"],
    ["barycenter", "-i", json.dumps({"polytope": {"vertices": [[0], [1]]}, "weight": {"type": "wrong"}})],
    ["beta-toric", "-i", json.dumps({"polytope": {"vertices": [[1], [2]]}})],
    ["check-cscK", "-i", json.dumps({"delta_eps": "0"})],
    ["barycenter", "-i", "/nonexistent/file.json"],
])
def test_validation_errors_exit_2(argv):
    code, out, err = run_cli(argv)
    assert code == 2 and out == "" and err


def test_unknown_subcommand_exits_64():
    assert run_cli(["frobnicate"])[0] == 64


@pytest.mark.parametrize("doc", ["{not json", "[1, 2]", "[oops"])
def test_malformed_input_exits_65(doc):
    assert run_cli(["barycenter", "-i", doc])[0] == 65


def test_malformed_file_exits_65(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{ 1: 2 }")
    assert run_cli(["barycenter", "-i", str(path)])[0] == 65


def test_output_is_byte_identical_under_a_seed():
    argv = CLI_CASES["barycenter"] + ["--verify", "--seed", "7", "--samples", "20000"]
    first, second = run_cli(argv)[1], run_cli(argv)[1]
    assert first == second
    other = run_cli(CLI_CASES["barycenter"] + ["--verify", "--seed", "8", "--samples", "20000"])[1]
    assert other != first


def test_module_entry_point(tmp_path):
    path = tmp_path / "in.json"
    path.write_text(CLI_CASES["beta-toric"][2])
    proc = subprocess.run([sys.executable, "-m", "wkahler", "beta-toric", "-i", str(path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["beta"] == "14/17"
