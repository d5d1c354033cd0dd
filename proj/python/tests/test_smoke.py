import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import mocp

ROOT = Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "tests" / "fixtures"
SCHEMAS = ROOT / "schemas"


def schema(name):
    return json.loads((SCHEMAS / name).read_text())


def test_registry_problems_validate_against_the_schema():
    s = schema("problem.schema.json")
    for name in mocp.registry_names():
        jsonschema.validate(mocp.problem(name), s)
    assert set(mocp.registry_names()) >= {"lq1d", "lq1d-free", "lq2obj-terminal", "bilinear-box"}


def test_problem_round_trip_and_hash():
    p = json.loads((FIXTURES / "bolza.json").read_text())
    q = mocp.problem(p)
    assert mocp.problem(q) == q
    assert mocp.problem_hash(p) == mocp.problem_hash(q)
    assert mocp.problem_hash("lq1d") != mocp.problem_hash("lq1d-free")


def test_bad_problems_raise():
    with pytest.raises(ValueError):
        mocp.problem('{"T": 1, ')
    with pytest.raises(ValueError):
        mocp.problem({"T": 1.0, "n": 1, "k": 1, "control_set": {"kind": "free"}, "xi0": [0.0],
                      "dynamics": ["u[5]"], "running": ["0"]})


def test_mayer_transform_lifts_the_state():
    m = mocp.mayer(json.loads((FIXTURES / "bolza.json").read_text()))
    assert m["n"] == 4
    assert m["running"] == ["0", "0"]


def test_solve_matches_closed_form():
    pt = mocp.solve("lq1d", [0.5, 0.5])
    assert not pt["failed"]
    c = math.cosh(1.0)
    j1 = -(0.5 + math.sinh(2.0) / 4.0) / c**2
    j2 = -(math.sinh(2.0) / 4.0 - 0.5) / c**2
    assert abs(pt["objectives"][0] - j1) < 1e-5
    assert abs(pt["objectives"][1] - j2) < 1e-5
    assert pt["necessary"]["all_pass"]


def test_solve_then_check_round_trip():
    pt = mocp.solve("lq1d-free", [0.5, 0.5], trajectories=True)
    traj = dict(pt["process"], multipliers=pt["multipliers"])
    jsonschema.validate(traj, schema("trajectory.schema.json"))
    rep = mocp.check("lq1d-free", traj)
    assert rep["admissibility"]["admissible"]
    assert rep["conditions"]["all_pass"]


def test_front_and_dominance():
    f = mocp.front("bilinear-box", grid=3)
    assert len(f["points"]) == 3
    assert not any(p["dominated"] for p in f["points"])
    dom, weak = mocp.dominance_filter([np.array([1.0, 1.0]), np.array([1.0, 0.0])])
    assert dom == [False, True] and weak == [False, False]
    grid = mocp.weight_grid(3)
    assert len(grid) == 66
    assert all(abs(w.sum() - 1) < 1e-12 for w in grid)


def test_hamiltonian_value():
    # H = theta1 * (-x^2) + theta2 * (-u^2) + p u
    h = mocp.hamiltonian("lq1d", 0.3, [2.0], [0.5], [1.5], [0.25, 0.75])
    assert h == pytest.approx(0.25 * -4.0 + 0.75 * -0.25 + 1.5 * 0.5)


def test_cli_reports_validate():
    s = schema("report.schema.json")
    code, out, err = mocp.run_cli("check", FIXTURES / "lq1d.json", FIXTURES / "lq1d_extremal.json", "--jobs", 1)
    assert code == 0, err
    jsonschema.validate(json.loads(out), s)
    code, out, _ = mocp.run_cli("check", FIXTURES / "lq1d.json", FIXTURES / "lq1d_perturbed.json")
    assert code == 1
    assert json.loads(out)["report"]["failed"] == ["MP"]
    code, _, err = mocp.run_cli("check", FIXTURES / "malformed.json", FIXTURES / "lq1d_extremal.json")
    assert code == 2 and "byte" in err
    code, out, _ = mocp.run_cli("cq", "--problem", "lq1d", "--at-solution", "--jobs", 1)
    assert code == 0
    jsonschema.validate(json.loads(out), s)
