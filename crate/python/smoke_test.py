"""Smoke test for the Python bindings: load, run, abstract and check."""

import math
import pathlib

import pytest

symreach = pytest.importorskip("symreach")

SCENARIOS = pathlib.Path(__file__).resolve().parent.parent / "scenarios"


def test_load_and_repr():
    s = symreach.load(SCENARIOS / "rectangle.scn")
    assert s.name == "rectangle"
    assert s.n_roads == 17
    assert "rectangle" in repr(s)


def test_virtual_model_counts():
    s = symreach.Scenario.load(str(SCENARIOS / "rectangle_road.scn"))
    va = s.virtual_model("tr")
    assert len(va["modes"]) == 3
    assert len(va["edges"]) == 3
    va = s.virtual_model("t")
    assert len(va["modes"]) == 5


def test_equivariance_and_fsr():
    s = symreach.load(SCENARIOS / "s_shaped.scn")
    assert s.check_equivariance(samples=200) < 1e-9
    r = symreach.load(SCENARIOS / "rectangle_road.scn").check_fsr(samples=5, seed=2)
    assert r["executions"] == 5
    assert r["violations"] == []


def test_run_reports_metrics(tmp_path):
    s = symreach.load(SCENARIOS / "rectangle_road.scn")
    rep = s.run("sv", "tr", out=tmp_path)
    m = rep["metrics"]
    assert rep["fixed_point"]
    assert m["tot"] == m["co"] + m["re"] + m["cp"]
    assert math.isfinite(m["error_pct"])
    assert any(p.name.endswith("_reachtube.csv") for p in tmp_path.iterdir())


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        symreach.Scenario.parse("schema_version = 9")
    s = symreach.load(SCENARIOS / "rectangle.scn")
    with pytest.raises(ValueError):
        s.run("nope")
