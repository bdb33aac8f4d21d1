import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from crossext.cli import main, parse_slice, UsageError
from crossext.scenario import (ScenarioError, bundled_dir, delta_schedule, emit_region_grids,
                               load_scenario, negative_control, run_scenario, run_suite,
                               scenario_from_dict)

BUNDLED = sorted(p.name for p in bundled_dir().glob("*.json"))


@pytest.fixture(scope="module")
def suite_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    agg, reports = run_suite(bundled_dir(), out)
    return out, agg, reports


def test_bundled_scenarios_pass(suite_run):
    out, agg, reports = suite_run
    assert BUNDLED == ["half_graph.json", "hyperbola.json", "no_singularity.json"]
    assert agg.passed, agg.summary_lines()
    for name, rep in reports.items():
        assert rep.passed, (name, rep.failed())
        assert (out / rep.meta["scenario"] / "report.json").exists()
    assert (out / "suite.json").exists()


def test_report_schema(suite_run):
    out, _, _ = suite_run
    data = json.loads((out / "half_graph" / "report.json").read_text())
    for name, entry in data["checks"].items():
        assert {"pass", "metric", "tol", "seconds"} <= set(entry)
        assert entry["seconds"] is None
    assert data["meta"]["delta_schedule"] == [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625]


def test_no_singularity_hull_empty(suite_run):
    _, _, reports = suite_run
    rep = reports["no_singularity.json"]
    assert rep.meta["hull_empty"] is True
    assert rep["hull_empty_iff_M_empty"].passed


def test_grids_emitted_and_nested(suite_run):
    out, _, _ = suite_run
    gdir = out / "half_graph" / "grids"
    names = sorted(p.name for p in gdir.glob("*.csv"))
    assert [f"level_A_delta{k}.csv" for k in range(1, 7)] == [n for n in names if n.startswith("level")]
    assert "envelope_w_+0_+0.csv" in names and "hull_z_+0.6_+0.csv" in names
    masks = []
    for k in range(1, 7):
        rows = (gdir / f"level_A_delta{k}.csv").read_text().splitlines()[1:]
        masks.append(np.array([int(r.split(",")[2]) for r in rows], dtype=bool))
    # delta halves from one grid to the next, so each region contains the following one
    inside = [~m for m in masks]
    for small, big in zip(inside[1:], inside):
        assert np.all(big[small])
    hull = (out / "no_singularity" / "grids" / "hull_w_+0_+0.csv").read_text().splitlines()[1:]
    assert all(r.split(",")[2] == "1" for r in hull)


def test_hull_grid_marks_graph_point(tmp_path):
    sc = load_scenario(bundled_dir() / "half_graph.json")
    grids = emit_region_grids(sc, None, [("z", 0.6 + 0j)], n=64)
    g = grids["hull_z_+0.6_+0"]
    hit = g.coords[~g.mask]
    assert hit.size > 0 and np.max(np.abs(hit - 0.3)) <= 2 * 2 / 64 * np.sqrt(2)


def test_delta_schedule_exact():
    assert delta_schedule(6) == [2.0 ** -n for n in range(1, 7)]


def test_hypothesis_failure_aborts(tmp_path):
    d = json.loads((bundled_dir() / "half_graph.json").read_text())
    d["M"] = [{"orientation": "z", "expression": "z"}]
    d["name"] = "meets_boundary"
    rep = run_scenario(scenario_from_dict(d), tmp_path)
    assert not rep.passed
    assert rep.meta["aborted"] == "hypothesis failed"
    assert rep.checks[-1].name == "hypothesis_M_disjoint_AxB"


def test_scenario_validation():
    d = json.loads((bundled_dir() / "half_graph.json").read_text())
    d["A"] = []
    with pytest.raises(ScenarioError):
        scenario_from_dict(d)
    d = json.loads((bundled_dir() / "half_graph.json").read_text())
    d["F"] = "sin(z)"
    with pytest.raises(ScenarioError):
        scenario_from_dict(d)


def test_negative_control_per_scenario():
    for name in BUNDLED:
        sc = load_scenario(bundled_dir() / name)
        flagged, detail = negative_control(sc, 1e-3)
        assert flagged, (name, detail)
        flagged, detail = negative_control(sc, 0.0)
        assert not flagged, (name, detail)


# --- CLI ----------------------------------------------------------------------

def test_cli_run_and_exit_codes(tmp_path, capsys):
    assert main(["run", str(bundled_dir() / "no_singularity.json"), "--out-dir", str(tmp_path)]) == 0
    assert "no_singularity: PASS" in capsys.readouterr().out
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["suite", str(empty)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 2
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_cli_suite_with_corrupted_file(tmp_path, capsys):
    d = tmp_path / "scen"
    d.mkdir()
    for name in ("half_graph.json", "no_singularity.json"):
        shutil.copy(bundled_dir() / name, d / name)
    (d / "zz_broken.json").write_text('{"name": "broken", "A": [[0, 1]]')
    assert main(["suite", str(d), "--out-dir", str(tmp_path / "out")]) == 1
    out = capsys.readouterr().out
    assert "suite: 2/3 scenarios pass" in out
    agg = json.loads((tmp_path / "out" / "suite.json").read_text())
    assert agg["checks"]["zz_broken.json"]["pass"] is False


def test_cli_grids_and_slice_rejection(tmp_path, capsys):
    sc = str(bundled_dir() / "half_graph.json")
    assert main(["grids", sc, "--slice", "w=1.5", "--out-dir", str(tmp_path)]) == 2
    assert main(["grids", sc, "--slice", "q=0.1", "--out-dir", str(tmp_path)]) == 2
    assert main(["grids", sc, "--slice", "z=0.2+0.1j", "--grid-n", "8", "--out-dir", str(tmp_path)]) == 0
    files = capsys.readouterr().out.split()
    assert any(f.endswith("envelope_z_+0.2_+0.1.csv") for f in files)
    with pytest.raises(UsageError):
        parse_slice("z0.3")


def test_cli_env_override(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("CROSSEXT_GRID_N", "8")
    monkeypatch.setenv("CROSSEXT_OUT_DIR", str(tmp_path))
    assert main(["grids", str(bundled_dir() / "no_singularity.json")]) == 0
    rows = (tmp_path / "no_singularity" / "grids" / "level_A_delta1.csv").read_text().splitlines()
    assert len(rows) == 1 + 64
    # an explicit flag beats the environment
    assert main(["grids", str(bundled_dir() / "no_singularity.json"), "--grid-n", "4"]) == 0
    rows = (tmp_path / "no_singularity" / "grids" / "level_A_delta1.csv").read_text().splitlines()
    assert len(rows) == 1 + 16
    monkeypatch.setenv("CROSSEXT_SEED", "abc")
    assert main(["run", str(bundled_dir() / "no_singularity.json")]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "crossext", "grids",
                           str(bundled_dir() / "no_singularity.json"), "--grid-n", "4",
                           "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
