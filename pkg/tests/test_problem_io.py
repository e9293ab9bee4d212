import io
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from kw_graph.exceptions import ProblemFormatError
from kw_graph.problem_io import (
    graph_from_dict,
    lambda_from_dict,
    load_json,
    parse_floats,
    problem_from_dict,
    sweep_from_dict,
)
from kw_graph.report import emit, frame_to_csv, to_json


def test_load_json_file_and_stdin(tmp_path: Path, monkeypatch):
    path = tmp_path / "p.json"
    path.write_text('{"h": [1]}', encoding="utf-8")
    assert load_json(str(path)) == {"h": [1]}
    monkeypatch.setattr("sys.stdin", io.StringIO('{"c": -1}'))
    assert load_json("-") == {"c": -1}


def test_load_json_errors(tmp_path: Path):
    path = tmp_path / "p.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ProblemFormatError):
        load_json(str(path))
    with pytest.raises(ProblemFormatError):
        load_json(str(tmp_path / "missing.json"))


def test_graph_from_dict_uses_indices():
    g = graph_from_dict({"vertices": ["x", "y", "z"], "edges": [[0, 1, 2.0], [1, 2, 0.5]], "mu": [1, 2, 1]})
    assert g.vertices == ("x", "y", "z")
    assert g.weights[0, 1] == 2.0 and g.weights[2, 1] == 0.5
    assert np.allclose(g.measure, [1, 2, 1])
    with pytest.raises(ProblemFormatError):
        graph_from_dict({"vertices": ["x", "y"], "edges": [[0, 2, 1.0]]})
    with pytest.raises(ProblemFormatError):
        graph_from_dict({"vertices": ["x", "y"], "edges": [[0, 1]]})
    for w in (0, 0.0, -1.0):
        with pytest.raises(ProblemFormatError):
            graph_from_dict({"vertices": ["x", "y"], "edges": [[0, 1, w]]})


def test_problem_from_dict():
    base = {"vertices": ["a", "b"], "edges": [[0, 1, 1.0]], "h": [1, -2]}
    p = problem_from_dict({**base, "c": -0.5})
    assert p.is_scalar and p.c == -0.5
    p = problem_from_dict({**base, "f": [0.5, -1]})
    assert not p.is_scalar and np.allclose(p.f, [0.5, -1])
    with pytest.raises(ProblemFormatError):
        problem_from_dict(base)
    with pytest.raises(ProblemFormatError):
        problem_from_dict({**base, "c": 1, "f": [1, 1]})
    with pytest.raises(ProblemFormatError):
        problem_from_dict({**base, "h": [1, 2, 3], "c": 1})
    with pytest.raises(ProblemFormatError):
        problem_from_dict({**base, "c": "one"})


def test_sweep_and_lambda_inputs():
    base = {"vertices": ["a", "b"], "edges": [[0, 1, 1.0]], "h": [1, -2], "c": 0.5}
    p0, p1 = sweep_from_dict({**base, "to": {"h": [1, -1], "c": -0.5}})
    assert p0.graph is p1.graph and p1.c == -0.5
    with pytest.raises(ProblemFormatError):
        sweep_from_dict(base)
    g, K, kappa = lambda_from_dict({**base, "K": [0, -1], "kappa": -1})
    assert kappa == -1.0 and np.allclose(K, [0, -1])
    _, _, kappa = lambda_from_dict({**base, "K": [0, -1], "kappa": [-1, -2]})
    assert np.allclose(kappa, [-1, -2])


def test_parse_floats():
    assert parse_floats(None) is None
    assert parse_floats("0,-1.5, 2") == [0.0, -1.5, 2.0]
    with pytest.raises(ProblemFormatError):
        parse_floats("1,x")


def test_to_json_cleans_numpy():
    doc = json.loads(to_json({"a": np.float64(1.5), "b": np.array([1, 2]), "c": math.nan, "d": np.bool_(True)}))
    assert doc == {"a": 1.5, "b": [1, 2], "c": None, "d": True}


def test_frame_to_csv_round_trips_floats():
    df = pd.DataFrame({"x": [0.1, math.nan], "n": [1, 2]})
    assert frame_to_csv(df) == "x,n\n0.10000000000000001,1\n,2\n"


def test_emit(tmp_path: Path, capsys):
    emit("hello\n")
    assert capsys.readouterr().out == "hello\n"
    path = tmp_path / "out.txt"
    emit("x\n", str(path))
    assert path.read_text(encoding="utf-8") == "x\n"
