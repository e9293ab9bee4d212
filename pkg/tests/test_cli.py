import json
from pathlib import Path

import pytest

from kw_graph import config
from kw_graph.cli import main

K2_FLAT = {"vertices": ["a", "b"], "edges": [[0, 1, 1.0]], "h": [1.0, -2.0], "c": 0.0}
FAST = ["--starts", "24", "--escalate", "1"]


def _write(tmp_path: Path, name: str, obj) -> str:
    path = tmp_path / name
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj, encoding="utf-8")
    return str(path)


def test_degree_on_flat_fixture(tmp_path: Path, capsys):
    src = _write(tmp_path, "flat.json", K2_FLAT)
    assert main(["degree", "-i", src, *FAST]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["numeric_degree"] == -1
    assert out["theoretical_degree"] == -1
    assert out["match"] is True
    assert len(out["solutions"]) == 1


def test_malformed_json_exits_2(tmp_path: Path, capsys):
    src = _write(tmp_path, "bad.json", "{not json")
    assert main(["solve", "-i", src]) == 2
    assert "[ERROR]" in capsys.readouterr().err


def test_disconnected_graph_exits_2(tmp_path: Path, capsys):
    bad = {"vertices": [1, 2, 3], "edges": [[0, 1, 1.0]], "h": [1, 1, 1], "c": 1.0}
    assert main(["enumerate", "-i", _write(tmp_path, "g.json", bad)]) == 2
    assert "connected components" in capsys.readouterr().err


def test_solve_with_start(tmp_path: Path, capsys):
    src = _write(tmp_path, "flat.json", K2_FLAT)
    assert main(["solve", "-i", src, "--u0", "0,-1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["solution"]["u"] == pytest.approx([-0.36651, -1.05966], abs=1e-5)
    assert out["regime"]["tag"] == "flat"


def test_solve_negative_regime(tmp_path: Path, capsys):
    src = _write(tmp_path, "neg.json", {**K2_FLAT, "h": [-1.0, -1.0], "c": -1.0})
    assert main(["solve", "-i", src, *FAST]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["solution"]["u"] == pytest.approx([0.0, 0.0], abs=1e-10)


def test_enumerate_csv_to_file(tmp_path: Path, capsys):
    src = _write(tmp_path, "two.json", {**K2_FLAT, "c": -0.03})
    dst = tmp_path / "roots.csv"
    assert main(["enumerate", "-i", src, "-o", str(dst), "--format", "csv", *FAST]) == 0
    assert "[OK] wrote" in capsys.readouterr().err
    lines = dst.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("index,u[a],u[b],residual_linf")
    assert len(lines) == 3


def test_reduce(tmp_path: Path, capsys):
    p3 = {"vertices": ["a", "b", "c"], "edges": [[0, 1, 1.0], [1, 2, 1.0]],
          "h": [1.0, 0.0, -2.0], "f": [0.3, 0.4, -0.5]}
    assert main(["reduce", "-i", _write(tmp_path, "p3.json", p3)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["eliminated_vertices"] == ["b"]
    assert out["f"] == pytest.approx([0.5, -0.3])


def test_reduce_has_no_csv(tmp_path: Path, capsys):
    p3 = {"vertices": ["a", "b", "c"], "edges": [[0, 1, 1.0], [1, 2, 1.0]], "h": [1.0, 0.0, -2.0], "c": 0.0}
    assert main(["reduce", "-i", _write(tmp_path, "p3.json", p3), "--format", "csv"]) == 2


def test_scan_csv(tmp_path: Path, capsys):
    src = _write(tmp_path, "h.json", {"vertices": ["a", "b"], "edges": [[0, 1, 1.0]], "h": [1.0, -2.0]})
    assert main(["scan", "-i", src, "--grid", "-0.3,-0.03", "--format", "csv", *FAST]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "parameter,count,stabilities,min_residual"
    assert lines[1].startswith("-0.29999999999999999,0,")
    assert lines[2].split(",")[1] == "2"


def test_scan_needs_grid(tmp_path: Path):
    src = _write(tmp_path, "h.json", {"vertices": ["a", "b"], "edges": [[0, 1, 1.0]], "h": [1.0, -2.0]})
    assert main(["scan", "-i", src]) == 2


def test_sweep(tmp_path: Path, capsys):
    doc = {**K2_FLAT, "h": [-1.0, -2.0], "c": -1.0, "to": {"h": [-0.1, -2.0], "c": -1.0}}
    assert main(["sweep", "-i", _write(tmp_path, "sweep.json", doc), "--waypoints", "3", *FAST]) == 0
    out = json.loads(capsys.readouterr().out)
    assert [w["numeric_degree"] for w in out["waypoints"]] == [1, 1, 1]
    assert out["constant_within_regimes"] is True


def test_config_file_and_reset(tmp_path: Path, capsys):
    cfg = tmp_path / "kw.yaml"
    cfg.write_text("tol_residual: 1.0e-9\nn_starts: 8\n", encoding="utf-8")
    src = _write(tmp_path, "flat.json", K2_FLAT)
    assert main(["solve", "-i", src, "--u0", "0,-1", "--config", str(cfg)]) == 0
    assert config.TOL_RESIDUAL == config.DEFAULT["tol_residual"]
    assert config.ACTIVE["n_starts"] == config.DEFAULT["n_starts"]


def test_unknown_config_key(tmp_path: Path, capsys):
    cfg = tmp_path / "kw.yaml"
    cfg.write_text("tolerance: 1.0\n", encoding="utf-8")
    src = _write(tmp_path, "flat.json", K2_FLAT)
    assert main(["solve", "-i", src, "--config", str(cfg)]) == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_verify_exit_code_follows_suites(capsys):
    code = main(["verify", "--scale", "0.02", "--starts", "24"])
    captured = capsys.readouterr()
    rep = json.loads(captured.out)
    assert [s["name"] for s in rep["suites"]] == [
        "degree_theorem", "closed_form", "schur", "existence", "identities", "boundedness"]
    assert code == (0 if rep["ok"] else 1)
    assert "closed_form" in captured.err


def test_verify_rejects_bad_scale(capsys):
    assert main(["verify", "--scale", "2"]) == 2


def test_degree_undefined_exits_3(tmp_path: Path, capsys):
    src = _write(tmp_path, "zero.json", {**K2_FLAT, "h": [0.0, 0.0]})
    assert main(["degree", "-i", src, *FAST]) == 3
    out = json.loads(capsys.readouterr().out)
    assert out["numeric_degree"] is None



def test_negative_list_values(tmp_path: Path, capsys):
    src = _write(tmp_path, "flat.json", K2_FLAT)
    assert main(["solve", "-i", src, "--u0", "-0.5,-1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["solution"]["u"] == pytest.approx([-0.36651, -1.05966], abs=1e-5)
    src = _write(tmp_path, "h.json", {"vertices": ["a", "b"], "edges": [[0, 1, 1.0]], "h": [1.0, -2.0]})
    assert main(["scan", "-i", src, "--grid=-0.3,-0.03", *FAST]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert [r["count"] for r in rows] == [0, 2]


def test_zero_weight_edge_exits_2(tmp_path: Path, capsys):
    bad = {**K2_FLAT, "edges": [[0, 1, 0.0]]}
    assert main(["degree", "-i", _write(tmp_path, "w0.json", bad)]) == 2
    assert "weight must be positive" in capsys.readouterr().err
