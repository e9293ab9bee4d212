from pathlib import Path

import pytest

from kw_graph import config
from kw_graph.exceptions import InvalidOptions
from kw_graph.solve import SolveOptions, resolve_options


def test_packaged_defaults():
    cfg = config.load()
    assert set(cfg) == set(config.DEFAULT)
    assert cfg["tol_residual"] == pytest.approx(1e-10)
    assert cfg["degeneracy_tol"] == pytest.approx(1e-8)


def test_user_file_overrides(tmp_path: Path):
    path = tmp_path / "cfg.yaml"
    path.write_text("n_starts: 12\nbracket_tol: 0.01\n", encoding="utf-8")
    cfg = config.load(str(path))
    assert cfg["n_starts"] == 12
    assert cfg["bracket_tol"] == pytest.approx(0.01)
    assert cfg["max_iters"] == config.DEFAULT["max_iters"]


def test_bad_files(tmp_path: Path):
    path = tmp_path / "cfg.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(InvalidOptions):
        config.load(str(path))
    path.write_text("newton_steps: 3\n", encoding="utf-8")
    with pytest.raises(InvalidOptions):
        config.load(str(path))


def test_apply_feeds_solver_defaults():
    try:
        config.apply({**config.DEFAULT, "tol_residual": 1e-8, "n_starts": 5})
        o = resolve_options(None)
        assert o.tol_residual == pytest.approx(1e-8)
        assert o.n_starts == 5
    finally:
        config.apply(config.DEFAULT)
    assert resolve_options(None) == SolveOptions.from_config(config.DEFAULT)
