"""Python access to the multiobjective optimal control core.

Problems are plain dicts in the problem-file layout, or registry names.
Reports come back as dicts in the same layout as the CLI's JSON output.
"""
import json

from . import _core
from ._core import ExpressionError, ParseError, ProblemError, SolverError, dominance_filter, weight_grid

__version__ = _core.__version__
__all__ = [
    "ExpressionError", "ParseError", "ProblemError", "SolverError", "check", "dominance_filter", "front",
    "hamiltonian", "mayer", "problem", "problem_hash", "registry_names", "run_cli", "solve",
    "weight_grid",
]


def registry_names():
    return list(_core.registry_names())


def problem(spec):
    """Validated problem dict from a registry name, a dict or JSON text."""
    if isinstance(spec, str) and spec in _core.registry_names():
        return json.loads(_core.registry_problem_json(spec))
    return json.loads(_core.normalize_problem_json(_text(spec)))


def problem_hash(spec):
    return _core.problem_hash(_text(problem(spec)))


def mayer(spec):
    """The equivalent Mayer problem with the running objectives as extra states."""
    return json.loads(_core.mayer_json(_text(problem(spec))))


def solve(spec, weights, *, max_iters=1000, steps=400, trajectories=False):
    text = _core.solve_json(_text(problem(spec)), list(map(float, weights)), max_iters, steps, trajectories)
    return json.loads(text)


def front(spec, *, grid=11, jobs=1):
    return json.loads(_core.front_json(_text(problem(spec)), grid, jobs))


def check(spec, trajectory):
    """Admissibility and necessary conditions; trajectory is a dict with state and control paths."""
    return json.loads(_core.check_json(_text(problem(spec)), _text(trajectory)))


def hamiltonian(spec, t, x, u, p, theta):
    return _core.hamiltonian(_text(problem(spec)), t, x, u, p, theta)


def run_cli(*args):
    """Runs the command line tool in-process; returns (exit code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])


def _text(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)
