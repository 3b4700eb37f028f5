"""ScenethesisLang toolchain: parse, solve, choose assets, export and evaluate."""

import json as _json

from . import _core
from ._core import DslError, PackageError, format, hungarian, solution_correctness

__all__ = [
    "DslError",
    "PackageError",
    "parse",
    "format",
    "check",
    "solve",
    "assets",
    "export",
    "pipeline",
    "compare",
    "solution_correctness",
    "hungarian",
]


def parse(source):
    """AST of a program as nested dicts."""
    return _json.loads(_core.parse_json(source))


def check(source, seed=0):
    """Regions, objects and compiled constraints (hidden ones included)."""
    return _json.loads(_core.check_json(source, seed))


def solve(source, seed=0, k=3, T=5):
    """Solve output: best layout, ratios, verdicts and the report text."""
    return _json.loads(_core.solve_json(source, seed, k, T))


def assets(source, db="", tau=0.652, lambda_v=100.0, lambda_t=1.0, provider="trigram", generate=True, seed=0):
    """One retrieval or generation decision per object."""
    return _json.loads(_core.assets_json(source, str(db), tau, lambda_v, lambda_t, provider, generate, seed))


def export(solved, out_dir, decisions=None):
    """Write a package from `solve` (and optionally `assets`) output; returns scene.json."""
    solve_text = solved if isinstance(solved, str) else _json.dumps(solved)
    assets_text = "" if decisions is None else (decisions if isinstance(decisions, str) else _json.dumps(decisions))
    return _json.loads(_core.export(solve_text, assets_text, str(out_dir)))


def pipeline(source, out_dir, seed=0, k=3, T=5, db="", tau=0.652, provider="trigram", keep_intermediates=False):
    """Program to package directory; returns scene.json."""
    return _json.loads(_core.pipeline(source, str(out_dir), seed, k, T, str(db), tau, provider, keep_intermediates))


def compare(gen, gt, tau_o=0.7, tau_l=0.7, embeddings=""):
    """Object, layout and overall precision, recall and F1."""
    return _json.loads(_core.compare_json(gen, gt, tau_o, tau_l, str(embeddings)))
