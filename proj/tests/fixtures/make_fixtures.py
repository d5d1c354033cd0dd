"""Writes the JSON fixtures used by the CLI and python tests.

Trajectories come from closed forms, so they do not depend on the library's
integrators or serializers. Run from anywhere: python3 make_fixtures.py
"""
import json
import math
from pathlib import Path

HERE = Path(__file__).resolve().parent
POINTS = 201


def grid(a=0.0, b=1.0, n=POINTS):
    return [a + (b - a) * i / (n - 1) for i in range(n)]


def path(pieces, corners=(), interpolation="cubic", T=1.0):
    samples = []
    for piece in pieces:
        samples.extend(piece)
    return {"T": T, "corners": list(corners), "interpolation": interpolation, "samples": samples}


def lq1d():
    return {
        "name": "lq1d",
        "T": 1.0,
        "n": 1,
        "k": 1,
        "control_set": {"kind": "box", "lower": [-2.0], "upper": [2.0]},
        "xi0": [1.0],
        "dynamics": ["u[0]"],
        "running": ["-x[0]^2", "-u[0]^2"],
        "terminal_objectives": ["0", "0"],
        "ineq": [],
        "eq": [],
        "params": {},
    }


def bolza():
    # two running costs, one terminal reward, a terminal bound
    return {
        "name": "bolza-demo",
        "T": 2.0,
        "n": 2,
        "k": 1,
        "control_set": {"kind": "box", "lower": [-1.0], "upper": [1.0]},
        "omega": {"lower": [-10.0, -10.0], "upper": [10.0, 10.0]},
        "xi0": [0.0, 1.0],
        "dynamics": ["x[1]", "u[0] - c*x[0]"],
        "running": ["-x[0]^2", "-u[0]^2"],
        "terminal_objectives": ["x[1]", "0"],
        "ineq": ["1 - x[0]"],
        "eq": [],
        "params": {"c": 0.5},
    }


def lq1d_half(shift=0.0):
    # theta = (1/2, 1/2): u = p, x' = p, p' = x, p(1) = 0, plus an optional
    # constant control offset carried consistently into the state
    c = math.cosh(1.0)
    ts = grid()
    x = [math.cosh(1 - t) / c + shift * t for t in ts]
    dx = [-math.sinh(1 - t) / c + shift for t in ts]
    state = path([[{"t": t, "value": [xi], "derivative": [di]} for t, xi, di in zip(ts, x, dx)]])
    control = path([[{"t": t, "value": [di]} for t, di in zip(ts, dx)]], interpolation="linear")
    return {"state": state, "control": control}


def lq1d_track():
    # theta = (1, 0): u = -2 until x reaches 0 at t = 1/2, then rest
    a = grid(0.0, 0.5, 101)
    b = grid(0.5, 1.0, 101)
    state = path([
        [{"t": t, "value": [1 - 2 * t], "derivative": [-2.0]} for t in a],
        [{"t": t, "value": [0.0], "derivative": [0.0]} for t in b],
    ], corners=[0.5])
    control = path([
        [{"t": t, "value": [-2.0]} for t in a],
        [{"t": t, "value": [0.0]} for t in b],
    ], corners=[0.5], interpolation="linear")
    return {"state": state, "control": control}


def write(name, obj):
    (HERE / name).write_text(json.dumps(obj, indent=2) + "\n")


def main():
    write("lq1d.json", lq1d())
    write("bolza.json", bolza())
    write("lq1d_extremal.json", lq1d_half())
    write("lq1d_perturbed.json", lq1d_half(shift=0.1))
    write("lq1d_track.json", lq1d_track())
    (HERE / "malformed.json").write_text('{"name": "lq1d", "T": 1.0, "n": 1,\n  "k": 1 "xi0": [1.0]}\n')


if __name__ == "__main__":
    main()
