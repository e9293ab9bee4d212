import math

import numpy as np
import pytest

from kw_graph.exceptions import (
    DisconnectedGraph,
    DomainMismatch,
    DuplicateEdge,
    InvalidExponent,
    NegativeWeight,
    NonpositiveMeasure,
    SelfLoop,
)
from kw_graph.graph import (
    build_graph,
    elliptic_bound,
    elliptic_constant,
    gradient_form,
    gradient_norm,
    green_defect,
    integrate,
    kato_defect,
    kernel_dimension,
    laplacian_apply,
    laplacian_matrix,
    max_principle_witness,
    norm,
)


def test_build_rejects_bad_input():
    with pytest.raises(DisconnectedGraph):
        build_graph([1, 2, 3], [(1, 2, 1.0)], [1, 1, 1])
    with pytest.raises(NonpositiveMeasure):
        build_graph([1, 2], [(1, 2, 1.0)], [1, 0])
    with pytest.raises(NegativeWeight):
        build_graph([1, 2], [(1, 2, -1.0)])
    with pytest.raises(DuplicateEdge):
        build_graph([1, 2], [(1, 2, 1.0), (2, 1, 1.0)])
    with pytest.raises(SelfLoop):
        build_graph([1, 2], [(1, 2, 1.0), (1, 1, 1.0)])


def test_laplacian_examples(k2, p3):
    assert np.allclose(laplacian_apply(k2, [0, 1]).values, [1, -1])
    assert np.allclose(laplacian_apply(k2, [5, 5]).values, [0, 0])
    assert np.allclose(laplacian_apply(p3, [0, 1, 0]).values, [1, -2, 1])
    assert np.allclose(laplacian_matrix(k2), [[1, -1], [-1, 1]])
    assert np.allclose(laplacian_matrix(p3), [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])


def test_laplacian_rows_vanish_with_measure():
    g = build_graph(["x", "y", "z"], [("x", "y", 2.0), ("y", "z", 0.5), ("x", "z", 1.0)], [0.5, 2.0, 1.5])
    assert np.allclose(laplacian_matrix(g).sum(axis=1), 0.0)
    m = laplacian_matrix(g, symmetric=True)
    assert np.allclose(m, m.T)


def test_function_on_wrong_graph(k2, p3):
    with pytest.raises(DomainMismatch):
        laplacian_apply(k2, [0, 1, 2])
    with pytest.raises(DomainMismatch):
        integrate(k2, p3.function([1, 2, 3]))


def test_gradient_form(k2, p3):
    assert np.allclose(gradient_form(k2, [0, 1], [0, 1]).values, [0.5, 0.5])
    assert np.allclose(gradient_norm(k2, [0, 1]).values, [1 / math.sqrt(2)] * 2)
    assert np.allclose(gradient_form(p3, [0, 1, 0], [0, 1, 0]).values, [0.5, 1.0, 0.5])
    assert np.allclose(gradient_form(p3, [3, 3, 3], [1, -2, 4]).values, 0.0)


def test_integrate_and_norms(k2, p3):
    assert integrate(k2, [1, -2]) == pytest.approx(-1.0)
    assert integrate(p3, [1, 1, 1]) == pytest.approx(3.0)
    assert integrate(p3, laplacian_apply(p3, [0.3, -2.0, 5.0])) == pytest.approx(0.0, abs=1e-12)
    assert norm(k2, [3, -4], "lp", 1) == pytest.approx(7.0)
    assert norm(k2, [3, -4], "linf") == pytest.approx(4.0)
    assert norm(k2, [3, -4], "lp", math.inf) == pytest.approx(4.0)
    assert norm(k2, [0, 1], "w1p", 1) == pytest.approx(1 + math.sqrt(2))
    with pytest.raises(InvalidExponent):
        norm(k2, [1, 2], "lp", 0.5)


def test_kernel_dimension(k2, p3):
    assert kernel_dimension(k2) == 1
    assert kernel_dimension(p3) == 1
    two = build_graph([1, 2, 3, 4], [(1, 2, 1.0), (3, 4, 1.0)], require_connected=False)
    assert kernel_dimension(two) == 2


def test_max_principle_witness(k2, p3):
    assert max_principle_witness(k2, [0, 1]) == "b"
    assert max_principle_witness(p3, [0, 1, 0]) == "b"
    assert max_principle_witness(p3, [2, 2, 2]) is None


def test_kato_defect(k2, p3):
    assert np.allclose(kato_defect(k2, [-1, 1]).values, [1, 1])
    assert np.allclose(kato_defect(p3, [1, 2, 0.5]).values, 0.0)
    assert np.allclose(kato_defect(p3, [-1, -2, 0]).values, 0.0)


def test_elliptic_constant(k2, p3):
    assert elliptic_constant(k2) == pytest.approx(1.0, abs=1e-9)
    assert elliptic_constant(p3) == pytest.approx(2.0, abs=1e-9)
    scaled = build_graph(["a", "b", "c"], [("a", "b", 3.0), ("b", "c", 3.0)], [3, 3, 3])
    assert elliptic_constant(scaled) == pytest.approx(2.0, abs=1e-9)


def test_elliptic_bound_above_lp_limit(p3):
    c, sharp = elliptic_bound(p3, lp_vertex_limit=2)
    assert not sharp
    assert c >= 2.0 - 1e-9


def test_green_defect(k2, p3):
    assert green_defect(k2, [0, 1], [2, 5]) == pytest.approx(0.0, abs=1e-15)
    rng = np.random.default_rng(3)
    for _ in range(20):
        assert green_defect(p3, rng.normal(size=3), rng.normal(size=3)) <= 1e-12
    assert green_defect(p3, [4, 4, 4], [1, 7, -3]) == 0.0
