import json
import math
from pathlib import Path

import pytest

import smrs

ROOT = Path(__file__).resolve().parents[2]
SCENARIO = ROOT / "scenarios" / "two_state_call.json"


def small(**over):
    cfg = json.loads(SCENARIO.read_text())
    cfg["grid"] = {"time_steps": 8, "price_nodes": 41, "age_nodes": 5}
    cfg["mc"] = {"paths": 2000, "seed": 11}
    cfg["solver"] = {"tol": 1e-8}
    cfg.update(over)
    return cfg


def test_version():
    assert smrs.__version__.count(".") == 2


def test_describe_grid_without_solving():
    d = smrs.describe_grid(SCENARIO)
    assert d["time_steps"] == 40
    assert d["price_axes"][0]["nodes"] == 161
    assert d["stored_values"] > 0


def test_resolve_fills_defaults():
    r = smrs.resolve(small())
    assert r["grid"]["time_steps"] == 8
    assert r["solver"]["max_iter"] > 0


def test_run_writes_outputs(tmp_path):
    rep = smrs.run(small(), tmp_path)
    assert rep["status"] == "ok"
    assert rep["convergence"]["converged"]
    assert all(r < 1 for r in rep["convergence"]["ratios"])
    assert (tmp_path / "price_field.csv").exists()
    assert (tmp_path / "hedge_field.csv").exists()
    assert json.loads((tmp_path / "report.json").read_text()) == rep
    for row in rep["mc_check"]:
        assert abs(row["z"]) < 4.0


def test_solution_queries_match_report(tmp_path):
    cfg = small()
    rep = smrs.run(cfg, tmp_path)
    sol = smrs.Solution(cfg)
    p = rep["points"][0]
    assert sol.price(p["t"], p["s"], p["x"], p["y"]) == pytest.approx(p["price"], rel=1e-12)
    st = sol.strategy(p["t"], p["s"], p["x"], p["y"])
    assert st["xi"][0] == pytest.approx(p["xi"][0], rel=1e-12)
    assert 0.0 < st["xi"][0] < 1.0
    assert sol.iterations >= 1
    assert sol.contraction_bound < 1.0


def test_call_price_is_monotone_in_spot():
    sol = smrs.Solution(small())
    prices = [sol.price(0.0, [s], [1], [0.0]) for s in (80.0, 90.0, 100.0, 110.0, 120.0)]
    assert all(b > a for a, b in zip(prices, prices[1:]))
    assert all(math.isfinite(v) for v in prices)


def test_config_errors_name_the_field():
    bad = small()
    bad["grid"] = {"time_steps": 0}
    with pytest.raises(smrs.ConfigError, match="grid.time_steps"):
        smrs.describe_grid(bad)
    with pytest.raises(smrs.ValidationError):
        smrs.Solution(bad)
    with pytest.raises(smrs.SmrsError):
        smrs.Solution(small()).price(0.0, [100.0], [3], [0.0])


def test_non_convergence_is_reported():
    cfg = small(solver={"tol": 1e-15, "max_iter": 1})
    with pytest.raises(smrs.NoConvergence):
        smrs.Solution(cfg)


def test_selftest_subset():
    passed, table, report = smrs.selftest([1])
    assert passed
    assert table.startswith("[PASS] C1 ")
    assert report["criteria"][0]["id"] == 1
