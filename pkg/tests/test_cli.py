import csv
import json
from pathlib import Path

import pytest

from pitchfork.cli import ProblemSpec, main
from pitchfork.errors import SpecError

ROOT = Path(__file__).resolve().parents[1]


def _spec(tmp_path, **kw):
    p = tmp_path / "spec.json"
    p.write_text(json.dumps(kw))
    return str(p)


def _run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    return main([*argv, "--out", str(out)]), out


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# --- spec handling --------------------------------------------------------------

def test_unknown_keys_rejected():
    with pytest.raises(SpecError):
        ProblemSpec.from_dict({"family": "canonical", "colour": 1})
    with pytest.raises(SpecError):
        ProblemSpec.from_dict({"solver": {"tolerance": 1e-9}})


def test_spec_validation():
    with pytest.raises(SpecError):
        ProblemSpec.from_dict({"family": "plugin"})
    with pytest.raises(SpecError):
        ProblemSpec.from_dict({"mu": [0.01], "mu_range": {"start": 0, "stop": 1, "step": 1}})
    with pytest.raises(SpecError):
        ProblemSpec.from_dict({"alpha1": 0.3})


def test_mu_range_values():
    s = ProblemSpec.from_dict({"mu_range": {"start": -0.02, "stop": 0.02, "step": 0.01}})
    assert s.mu_values() == [-0.02, -0.01, 0.0, 0.01, 0.02]
    with pytest.raises(SpecError):
        ProblemSpec().mu_values()


def test_digest_is_stable():
    a = ProblemSpec.from_dict({"mu": [0.02]})
    b = ProblemSpec.from_dict({"mu": [0.02]})
    assert a.digest() == b.digest() != ProblemSpec.from_dict({"mu": [0.01]}).digest()


def test_bad_spec_file_exits_1(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert _run(tmp_path, "check", "--spec", str(p))[0] == 1
    assert _run(tmp_path, "check", "--spec", _spec(tmp_path, mu=[0.02], colour=1))[0] == 1


# --- check ------------------------------------------------------------------------

def test_check_exit_codes(tmp_path):
    code, out = _run(tmp_path, "check", "--mu", "0.02")
    assert code == 0
    doc = json.loads((out / "verdicts.json").read_text())
    assert doc["verdicts"][0]["overall"] is True
    assert _run(tmp_path, "check", "--mu", "-0.02", "--conditions", "iii", name="o2")[0] == 2
    assert _run(tmp_path, "check", name="o3")[0] == 1


def test_mu_outside_family_range(tmp_path):
    assert _run(tmp_path, "check", "--mu", "0.5")[0] == 1


# --- solve ------------------------------------------------------------------------

def test_solve_writes_branches_and_manifest(tmp_path, capsys):
    code, out = _run(tmp_path, "solve", "--mu", "0.02", "--spec", _spec(tmp_path, mesh_resolution=32, n_r=16))
    assert code == 0
    assert "plus branch: mean offset 0.141421" in capsys.readouterr().out
    rows = _rows(out / "branch_mup0_020000_plus.csv")
    assert len(rows) == 32
    assert all(abs(float(r["phi"]) - 0.02**0.5) < 1e-10 for r in rows)
    man = json.loads((out / "manifest.json").read_text())
    assert man["exit_code"] == 0 and man["command"] == "solve"
    for name in man["outputs"]:
        assert (out / name).exists()
    assert {"branch_mup0_020000_minus.csv", "branch_mup0_020000_plus_run.csv", "solve_summary.json"} <= set(man["outputs"])


def test_solve_at_threshold_exits_3(tmp_path):
    code, out = _run(tmp_path, "solve", "--mu", "0.0")
    assert code == 3
    assert "NoBifurcation" in json.loads((out / "solve_summary.json").read_text())["error"]


def test_reversing_prints_swap(tmp_path, capsys):
    code, _ = _run(tmp_path, "solve", "--spec", _spec(tmp_path, family="canonical-reversing", mu=[0.02],
                                                       mesh_resolution=32, n_r=16))
    assert code == 0
    line = [ln for ln in capsys.readouterr().out.splitlines() if "swap deviation" in ln][0]
    assert float(line.rsplit(" ", 1)[1]) <= 1e-8


def test_plugin_family(tmp_path):
    spec = _spec(tmp_path, family="plugin", plugin=str(ROOT / "scripts" / "ellipse_plugin.py"), mu=[0.02],
                 alpha=0.15, alpha1=0.14, mesh_resolution=32, n_r=16)
    code, out = _run(tmp_path, "solve", "--spec", spec)
    assert code == 0
    summ = json.loads((out / "solve_summary.json").read_text())
    assert summ["family"] and summ["entries"][0]["plus"]["certified"]


def test_missing_plugin_file(tmp_path):
    spec = _spec(tmp_path, family="plugin", plugin=str(tmp_path / "nope.py"), mu=[0.02])
    assert _run(tmp_path, "solve", "--spec", spec)[0] == 1


# --- determinism --------------------------------------------------------------------

def _csvs(out):
    return {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}


def test_outputs_are_deterministic_and_thread_independent(tmp_path):
    spec = _spec(tmp_path, mu=[0.01, 0.02, 0.03], mesh_resolution=32, n_r=16)
    a = _run(tmp_path, "solve", "--spec", spec, name="a")[1]
    b = _run(tmp_path, "solve", "--spec", spec, name="b")[1]
    c = _run(tmp_path, "--threads", "3", "solve", "--spec", spec, name="c")[1]
    assert _csvs(a) and _csvs(a) == _csvs(b) == _csvs(c)
    assert (a / "solve_summary.json").read_bytes() == (c / "solve_summary.json").read_bytes()


def test_global_flags_after_subcommand(tmp_path):
    out = tmp_path / "late"
    assert main(["check", "--mu", "0.02", "--out", str(out), "--threads", "2"]) == 0
    assert (out / "verdicts.json").exists()


# --- simulate, scan, gronwall -------------------------------------------------------

def test_simulate(tmp_path):
    code, out = _run(tmp_path, "simulate", "--mu", "0.02", "--r0", "0.05", "-0.05", "--iterations", "800")
    assert code == 0
    rows = _rows(out / "trajectories.csv")
    last = {r["start"]: float(r["r"]) for r in rows if r["n"] == "800"}
    assert last["0"] == pytest.approx(0.02**0.5, abs=1e-8)
    assert last["1"] == pytest.approx(-(0.02**0.5), abs=1e-8)


def test_simulate_rejects_start_outside_tube(tmp_path):
    assert _run(tmp_path, "simulate", "--mu", "0.02", "--r0", "0.3")[0] == 1


def test_scan(tmp_path):
    spec = _spec(tmp_path, mu_range={"start": -0.02, "stop": 0.02, "step": 0.01}, mesh_resolution=32, n_r=16)
    code, out = _run(tmp_path, "scan", "--spec", spec)
    assert code == 0
    rows = _rows(out / "diagram.csv")
    assert [r["branches"] for r in rows] == ["false", "false", "false", "true", "true"]
    assert float(rows[-1]["plus_mean"]) == pytest.approx(0.02**0.5, abs=1e-9)


def test_scan_empty_range(tmp_path):
    spec = _spec(tmp_path, mu_range={"start": 0.02, "stop": 0.01, "step": 0.01})
    assert _run(tmp_path, "scan", "--spec", spec)[0] == 1


def test_gronwall_rows_and_flags(tmp_path):
    params = tmp_path / "p.csv"
    params.write_text("s,sigma,nu\n1.0,0.1,0.1\n1.0,0.0,0.0\n1.0,0.3,0.0\n")
    code, out = _run(tmp_path, "gronwall", "--params", str(params),
                     "--spec", _spec(tmp_path, gronwall={"t": [0.5, 1.0]}))
    assert code == 0
    rows = _rows(out / "gronwall.csv")
    assert len(rows) == 6 and len(rows[0]) == 106
    assert [r["violation"] for r in rows] == ["false"] * 4 + ["true"] * 2
    assert rows[4]["violated"] == "sigma"
    assert all(float(r["ode_residual"]) <= 1e-10 for r in rows)
    dec = rows[2]
    assert float(dec["narrative_minus_inverse_E0"]) == float(dec["ref_E0"])


def test_gronwall_without_rows(tmp_path):
    assert _run(tmp_path, "gronwall")[0] == 1
