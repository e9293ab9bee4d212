# -*- coding: utf-8 -*-
"""
Problem files.

Graph: {"vertices": [str], "mu": [num], "edges": [[i, j, w]]} with zero-based
indices, each undirected edge once. "mu" may be omitted (μ ≡ 1).
Problem: graph plus {"h": [...], "c": num} or {"h": [...], "f": [...]}.
"""
from __future__ import annotations

import json
import sys
from numbers import Real
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .exceptions import ProblemFormatError
from .graph import WeightedGraph, build_graph
from .model import KWProblem


def load_json(path: Optional[str]) -> Dict[str, Any]:
    """Parse ``path`` ("-" or None reads stdin) into a mapping."""
    try:
        if path in (None, "-"):
            data = json.load(sys.stdin)
        else:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
    except json.JSONDecodeError as e:
        raise ProblemFormatError(f"malformed JSON in {path or 'stdin'}: {e}") from e
    except OSError as e:
        raise ProblemFormatError(f"cannot read {path}: {e}") from e
    if not isinstance(data, dict):
        raise ProblemFormatError("top-level JSON value must be an object")
    return data


def _numbers(d: Dict[str, Any], key: str, n: Optional[int] = None) -> np.ndarray:
    val = d.get(key)
    if not isinstance(val, list) or not all(isinstance(x, Real) and not isinstance(x, bool) for x in val):
        raise ProblemFormatError(f'"{key}" must be a list of numbers')
    if n is not None and len(val) != n:
        raise ProblemFormatError(f'"{key}" has {len(val)} entries, expected {n}')
    return np.asarray(val, dtype=np.float64)


def _number(d: Dict[str, Any], key: str) -> float:
    val = d.get(key)
    if not isinstance(val, Real) or isinstance(val, bool):
        raise ProblemFormatError(f'"{key}" must be a number')
    return float(val)


def graph_from_dict(d: Dict[str, Any]) -> WeightedGraph:
    verts = d.get("vertices")
    if not isinstance(verts, list) or not verts:
        raise ProblemFormatError('"vertices" must be a non-empty list')
    verts = [str(v) for v in verts]
    n = len(verts)
    mu = _numbers(d, "mu", n) if "mu" in d else None
    raw = d.get("edges", [])
    if not isinstance(raw, list):
        raise ProblemFormatError('"edges" must be a list of [i, j, w]')
    edges: List[Tuple[str, str, float]] = []
    for e in raw:
        if not (isinstance(e, list) and len(e) == 3):
            raise ProblemFormatError(f"edge {e!r} is not [i, j, w]")
        i, j, w = e
        if not all(isinstance(k, int) and not isinstance(k, bool) for k in (i, j)):
            raise ProblemFormatError(f"edge {e!r}: indices must be integers")
        if not (0 <= i < n and 0 <= j < n):
            raise ProblemFormatError(f"edge {e!r}: index out of range 0..{n - 1}")
        if not isinstance(w, Real) or isinstance(w, bool):
            raise ProblemFormatError(f"edge {e!r}: weight must be a number")
        if not w > 0:
            raise ProblemFormatError(f"edge {e!r}: weight must be positive")
        edges.append((verts[i], verts[j], float(w)))
    return build_graph(verts, edges, mu)


def problem_from_dict(d: Dict[str, Any], g: Optional[WeightedGraph] = None) -> KWProblem:
    g = graph_from_dict(d) if g is None else g
    h = _numbers(d, "h", g.n)
    if ("c" in d) == ("f" in d):
        raise ProblemFormatError('give exactly one of "c" or "f"')
    if "c" in d:
        return KWProblem.scalar(g, h, _number(d, "c"))
    return KWProblem.general(g, h, _numbers(d, "f", g.n))


def sweep_from_dict(d: Dict[str, Any]) -> Tuple[KWProblem, KWProblem]:
    """Start problem and the end point given by the "to" object."""
    p0 = problem_from_dict(d)
    to = d.get("to")
    if not isinstance(to, dict):
        raise ProblemFormatError('sweep input needs a "to" object with "h" and "c" or "f"')
    return p0, problem_from_dict(to, p0.graph)


def h_from_dict(d: Dict[str, Any]) -> Tuple[WeightedGraph, np.ndarray]:
    g = graph_from_dict(d)
    return g, _numbers(d, "h", g.n)


def lambda_from_dict(d: Dict[str, Any]) -> Tuple[WeightedGraph, np.ndarray, Union[float, np.ndarray]]:
    g = graph_from_dict(d)
    K = _numbers(d, "K", g.n)
    kappa = d.get("kappa")
    if isinstance(kappa, list):
        return g, K, _numbers(d, "kappa", g.n)
    return g, K, _number(d, "kappa")


def parse_floats(text: Optional[str]) -> Optional[List[float]]:
    """Comma list "a,b,c" to floats; None passes through."""
    if text is None:
        return None
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise ProblemFormatError(f"not a comma-separated list of numbers: {text!r}") from e
