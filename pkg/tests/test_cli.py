import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from jdisc import __version__
from jdisc.cli import config_hash, run
from jdisc.discfield import DiscGrid, from_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL_SOLVE = {
    "seed": 0,
    "grid": "32x64",
    "solver": {"n": 4},
    "coefficients": {"gamma": 0.5, "a_terms": [{"c": [0.1, 0.0], "k": 1}], "b_terms": [{"c": [0.1, 0.0], "k": 1}]},
}


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run_json(tmp_path, argv, name="out.json"):
    out = tmp_path / name
    code = run(argv + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_solve_trivial_config(tmp_path):
    code, rep = run_json(tmp_path, ["solve", "--config", str(CONFIGS / "trivial.json")])
    assert code == 0
    assert rep["command"] == "solve" and rep["version"] == __version__
    assert rep["config_hash"] == config_hash(rep["config"])
    assert rep["result"]["outer_iters"] == 1 and rep["result"]["winding_z"] == 1


def test_solve_is_deterministic_and_dumps_fields(tmp_path):
    cfg = write(tmp_path, SMALL_SOLVE)
    fields = tmp_path / "fields"
    assert run(["solve", "--config", cfg, "--out", str(tmp_path / "a.json"), "--fields", str(fields)]) == 0
    assert run(["solve", "--config", cfg, "--out", str(tmp_path / "b.json")]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    grid = DiscGrid(32, 64)
    z = from_csv((fields / "z.csv").read_text(), grid)
    assert np.abs(np.abs(z.values[-1]) - 1).max() < 1e-12
    assert sorted(p.name for p in fields.iterdir()) == ["h.csv", "u.csv", "v.csv", "w.csv", "z.csv"]
    assert not [p for p in tmp_path.rglob("*") if p.name.startswith(".") or p.suffix == ".tmp"]


def test_flags_override_config(tmp_path):
    cfg = write(tmp_path, SMALL_SOLVE)
    code, rep = run_json(tmp_path, ["solve", "--config", cfg, "--n", "2", "--grid", "16x32", "--p", "3.0"])
    assert code == 0
    assert rep["config"]["solver"]["n"] == 2 and rep["result"]["p"] == 3.0
    assert rep["config"]["grid"] in ("16x32", {"n_radial": 16, "n_angular": 32})


def test_infeasible_config_exits_with_config_error(tmp_path, capsys):
    code, rep = run_json(tmp_path, ["solve", "--config", str(CONFIGS / "infeasible.json")])
    assert code == 1 and rep is None
    assert "error" in capsys.readouterr().err


def test_unknown_keys_are_rejected(tmp_path):
    doc = dict(SMALL_SOLVE, bogus=1)
    assert run(["solve", "--config", write(tmp_path, doc)]) == 1
    doc = dict(SMALL_SOLVE, solver={"n": 4, "speed": 2})
    assert run(["solve", "--config", write(tmp_path, doc)]) == 1


def test_non_convergence_exits_with_two(tmp_path):
    doc = dict(SMALL_SOLVE, solver={"n": 4, "max_outer": 1})
    assert run(["solve", "--config", write(tmp_path, doc)]) == 2


def test_missing_file_exits_with_three(tmp_path):
    assert run(["solve", "--config", str(tmp_path / "absent.json")]) == 3


def test_bad_arguments_exit_with_one():
    assert run(["nope"]) == 1
    assert run(["solve", "--n", "x"]) == 1


def test_verify_ops(tmp_path):
    code, rep = run_json(tmp_path, ["verify-ops", "--grid", "32x64"])
    assert code == 0 and rep["result"]["all_pass"]
    assert {r["grid"] for r in rep["result"]["identities"]} == {"32x64"}


def test_analyze_structure(tmp_path):
    doc = {"seed": 0, "structure": {"kind": "twisted", "s": 0.05, "gamma": 0.5, "samples": 400}}
    code, rep = run_json(tmp_path, ["analyze-structure", "--config", write(tmp_path, doc)])
    res = rep["result"]
    assert code == 0 and res["certified"]
    assert res["block_structure"]["passes"] and res["sup_abs_a"] < 1
    assert res["normalization"]["residual_Az"] <= 1e-6
    assert all(r["reliable"] for r in res["levi_test_function"])
    assert res["coefficients"]["a0"] < 1


def test_analyze_structure_needs_a_structure(tmp_path):
    assert run(["analyze-structure", "--config", write(tmp_path, {"seed": 0})]) == 1


def test_takagi_command(tmp_path):
    code, rep = run_json(tmp_path, ["takagi", "--config", str(CONFIGS / "takagi.json")])
    res = rep["result"]
    assert code == 0
    assert res["unitarity_error"] <= 1e-12 and res["offdiag_error"] <= 1e-10
    assert res["singular_value_error"] <= 1e-10
    assert res["d"][0] >= res["d"][1] >= 0


def test_morse_command(tmp_path):
    code, rep = run_json(tmp_path, ["morse", "--config", str(CONFIGS / "morse_index1.json")])
    res = rep["result"]
    assert code == 0
    assert res["model"]["index"] == 1 and res["model"]["coefficients"] == [2.0, 0.0]
    assert res["inclusions"]["passes"] and res["E"]["origin_member"]
    assert 0 < res["crossing_profile"]["tau0"] < res["crossing_profile"]["tau1"] < 1


def test_report_writes_history_csv(tmp_path, capsys):
    code, _ = run_json(tmp_path, ["solve", "--config", write(tmp_path, SMALL_SOLVE)], "solve.json")
    assert code == 0
    out = tmp_path / "hist.csv"
    assert run(["report", str(tmp_path / "solve.json"), "--out", str(out)]) == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == ["iteration", "h_p", "sup_u", "sup_v", "update"]
    report = json.loads((tmp_path / "solve.json").read_text())["result"]
    assert len(rows) == 1 + report["outer_iters"]
    assert "converged" in capsys.readouterr().out


def test_report_of_a_non_solve_file_fails(tmp_path):
    path = write(tmp_path, {"result": {"d": [1, 2]}})
    assert run(["report", path]) == 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "jdisc.cli", "takagi", "--config", str(CONFIGS / "takagi.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "takagi"


@pytest.mark.parametrize("doc", [{"grid": "64by256"}, {"grid": "3x8"}, {"seed": -1}])
def test_bad_config_values(tmp_path, doc):
    assert run(["verify-ops", "--config", write(tmp_path, doc)]) == 1
