# -*- coding: utf-8 -*-
"""
kw_graph.graph
Weighted finite graphs and the discrete operators living on them.

- Laplacian  Δu(x) = (1/μ_x) Σ_y ω_xy (u(y) - u(x))
- gradient form Γ(u,v), |∇u| = sqrt(Γ(u,u))
- integral, L^p / L^∞ / W^{1,p} norms
- maximum-principle witness, Kato defect, elliptic constant, Green defect

Vertex identifiers are opaque strings; all numeric work happens on dense
indices in the order the vertices were given.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import (
    DisconnectedGraph,
    DomainMismatch,
    DuplicateEdge,
    DuplicateVertex,
    InvalidExponent,
    NegativeWeight,
    NonpositiveMeasure,
    SelfLoop,
)

log = logging.getLogger(__name__)

# rank decisions on diag(μ)L, relative to its largest entry
KERNEL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    vertices: Tuple[str, ...]
    weights: np.ndarray   # symmetric (n, n), zero diagonal
    measure: np.ndarray   # (n,), positive

    def __post_init__(self):
        verts = tuple(str(v) for v in self.vertices)
        if len(set(verts)) != len(verts):
            raise DuplicateVertex(f"duplicate vertex ids in {verts}")
        n = len(verts)
        w = np.array(self.weights, dtype=np.float64)
        mu = np.array(self.measure, dtype=np.float64).reshape(-1)
        if w.shape != (n, n):
            raise DomainMismatch(f"weights must be {n}x{n}, got {w.shape}")
        if mu.shape != (n,):
            raise DomainMismatch(f"measure must have {n} entries, got {mu.shape[0]}")
        if np.any(np.diag(w) != 0.0):
            raise SelfLoop("weights must vanish on the diagonal")
        if np.any(w < 0.0):
            raise NegativeWeight("edge weights must be nonnegative")
        if not np.array_equal(w, w.T):
            raise DomainMismatch("weights must be symmetric")
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0.0):
            raise NonpositiveMeasure("vertex measure must be positive")
        w.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "measure", mu)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    @property
    def volume(self) -> float:
        """∫1 dμ"""
        return float(self.measure.sum())

    def has_unit_measure(self) -> bool:
        return bool(np.all(self.measure == 1.0))

    def index_of(self, vertex) -> int:
        try:
            return self.vertices.index(str(vertex))
        except ValueError:
            raise DomainMismatch(f"unknown vertex {vertex!r}") from None

    def component_count(self) -> int:
        count, _ = connected_components(csr_matrix(self.weights > 0.0), directed=False)
        return int(count)

    def is_connected(self) -> bool:
        return self.component_count() == 1

    def function(self, values) -> "VertexFunction":
        return VertexFunction(self, values)

    def constant(self, value: float) -> "VertexFunction":
        return VertexFunction(self, np.full(self.n, float(value)))

    def relabel(self, order: Sequence[int]) -> "WeightedGraph":
        """Same graph with vertices listed in ``order`` (a permutation of indices)."""
        idx = np.asarray(order, dtype=int)
        return WeightedGraph(
            vertices=tuple(self.vertices[i] for i in idx),
            weights=self.weights[np.ix_(idx, idx)],
            measure=self.measure[idx],
        )

    def to_dict(self) -> dict:
        iu, ju = np.nonzero(np.triu(self.weights, k=1))
        return {
            "vertices": list(self.vertices),
            "mu": [float(m) for m in self.measure],
            "edges": [[int(i), int(j), float(self.weights[i, j])] for i, j in zip(iu, ju)],
        }


@dataclass(frozen=True, eq=False)
class VertexFunction:
    graph: WeightedGraph
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64).reshape(-1)
        if arr.shape != (self.graph.n,):
            raise DomainMismatch(f"function has {arr.shape[0]} values, graph has {self.graph.n} vertices")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.values, dtype=dtype)

    def __len__(self) -> int:
        return self.graph.n

    def __getitem__(self, vertex) -> float:
        return float(self.values[self.graph.index_of(vertex)])

    def positive_part(self) -> "VertexFunction":
        return VertexFunction(self.graph, np.maximum(self.values, 0.0))

    def negative_part(self) -> "VertexFunction":
        return VertexFunction(self.graph, np.maximum(-self.values, 0.0))

    def as_dict(self) -> dict:
        return {v: float(x) for v, x in zip(self.graph.vertices, self.values)}

    def tolist(self) -> List[float]:
        return [float(x) for x in self.values]


FunctionLike = Union[VertexFunction, Sequence[float], np.ndarray]


def as_values(g: WeightedGraph, u: FunctionLike) -> np.ndarray:
    """Dense values of ``u`` on ``g``; raises DomainMismatch if ``u`` lives elsewhere."""
    if isinstance(u, VertexFunction):
        if u.graph is not g and u.graph.vertices != g.vertices:
            raise DomainMismatch("function is defined on a different graph")
        return u.values
    arr = np.asarray(u, dtype=np.float64)
    if arr.ndim == 0:
        raise DomainMismatch("expected one value per vertex, got a scalar")
    arr = arr.reshape(-1)
    if arr.shape != (g.n,):
        raise DomainMismatch(f"function has {arr.shape[0]} values, graph has {g.n} vertices")
    return arr


# ----------------------------
# construction
# ----------------------------

def build_graph(
    vertices: Iterable,
    edges: Iterable[Tuple[object, object, float]],
    measure: Optional[Sequence[float]] = None,
    *,
    require_connected: bool = True,
) -> WeightedGraph:
    """Validated graph from a vertex list, (x, y, w) edge triples and a measure.

    ``measure`` defaults to μ ≡ 1. Each undirected edge is listed once.
    """
    verts = [str(v) for v in vertices]
    seen = set()
    for v in verts:
        if v in seen:
            raise DuplicateVertex(f"vertex {v!r} listed twice")
        seen.add(v)
    index = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    w = np.zeros((n, n), dtype=np.float64)
    pairs = set()
    for x, y, wt in edges:
        sx, sy = str(x), str(y)
        if sx not in index or sy not in index:
            raise DomainMismatch(f"edge ({sx}, {sy}) references an unknown vertex")
        if sx == sy:
            raise SelfLoop(f"self-loop at vertex {sx!r}")
        key = frozenset((sx, sy))
        if key in pairs:
            raise DuplicateEdge(f"edge ({sx}, {sy}) listed twice")
        pairs.add(key)
        wt = float(wt)
        if wt < 0.0 or not math.isfinite(wt):
            raise NegativeWeight(f"edge ({sx}, {sy}) has weight {wt}")
        i, j = index[sx], index[sy]
        w[i, j] = w[j, i] = wt
    mu = np.ones(n) if measure is None else np.asarray(measure, dtype=np.float64)
    if mu.shape != (n,):
        raise DomainMismatch(f"measure must have {n} entries")
    if np.any(mu <= 0.0):
        bad = [verts[i] for i in np.flatnonzero(mu <= 0.0)]
        raise NonpositiveMeasure(f"nonpositive measure at {bad}")
    g = WeightedGraph(vertices=tuple(verts), weights=w, measure=mu)
    if require_connected and n > 0 and not g.is_connected():
        raise DisconnectedGraph(f"graph has {g.component_count()} connected components")
    return g


def _require_connected(g: WeightedGraph) -> None:
    if not g.is_connected():
        raise DisconnectedGraph(f"graph has {g.component_count()} connected components")


# ----------------------------
# operators
# ----------------------------

def laplacian_matrix(g: WeightedGraph, *, symmetric: bool = False) -> np.ndarray:
    """Matrix of -Δ (row x scaled by 1/μ_x).

    With ``symmetric=True`` returns M = diag(μ)(-Δ) = D - W instead, the
    symmetric positive semi-definite form used for spectral decisions.
    """
    m = np.diag(g.degrees) - g.weights
    if symmetric:
        return m
    return m / g.measure[:, None]


def laplacian_apply(g: WeightedGraph, u: FunctionLike) -> VertexFunction:
    x = as_values(g, u)
    lap = (g.weights @ x - g.degrees * x) / g.measure
    return VertexFunction(g, lap)


def _differences(x: np.ndarray) -> np.ndarray:
    # d[x, y] = u(y) - u(x)
    return x[None, :] - x[:, None]


def gradient_form(g: WeightedGraph, u: FunctionLike, v: FunctionLike) -> VertexFunction:
    du = _differences(as_values(g, u))
    dv = _differences(as_values(g, v))
    gam = (g.weights * du * dv).sum(axis=1) / (2.0 * g.measure)
    return VertexFunction(g, gam)


def gradient_norm(g: WeightedGraph, u: FunctionLike) -> VertexFunction:
    gam = gradient_form(g, u, u).values
    return VertexFunction(g, np.sqrt(np.maximum(gam, 0.0)))


def integrate(g: WeightedGraph, f: FunctionLike) -> float:
    return float(np.dot(as_values(g, f), g.measure))


def _lp(g: WeightedGraph, x: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(x))) if x.size else 0.0
    return float(np.dot(np.abs(x) ** p, g.measure) ** (1.0 / p))


def norm(g: WeightedGraph, f: FunctionLike, kind: str = "lp", p: float = 2.0) -> float:
    """‖f‖ for kind in {"lp", "linf", "w1p"}; p may be math.inf for "lp" and "w1p"."""
    kind = (kind or "lp").lower()
    x = as_values(g, f)
    if kind == "linf":
        return _lp(g, x, math.inf)
    p = float(p)
    if not (p >= 1.0):
        raise InvalidExponent(f"exponent must satisfy 1 <= p <= inf, got {p}")
    if kind == "lp":
        return _lp(g, x, p)
    if kind == "w1p":
        return _lp(g, x, p) + _lp(g, gradient_norm(g, x).values, p)
    raise InvalidExponent(f"unknown norm kind {kind!r}")


def kernel_dimension(g: WeightedGraph) -> int:
    """dim ker(-Δ); equals the number of connected components."""
    if g.n == 0:
        return 0
    m = laplacian_matrix(g, symmetric=True)
    eig = np.linalg.eigvalsh(m)
    scale = max(1.0, float(np.max(np.abs(m))))
    return int(np.sum(eig <= KERNEL_TOL * scale))


def max_principle_witness(g: WeightedGraph, u: FunctionLike) -> Optional[str]:
    """Vertex x1 with u(x1) = max u and Δu(x1) < 0, or None when u is constant."""
    x = as_values(g, u)
    top = x.max()
    if np.all(x == top):
        return None
    lap = laplacian_apply(g, x).values
    for i in np.flatnonzero(x == top):
        if lap[i] < 0.0:
            return g.vertices[i]
    # only possible when the maximum sits on a constant component
    return None


def kato_defect(g: WeightedGraph, u: FunctionLike) -> VertexFunction:
    """Δu⁺ - χ_{u>0} Δu (nonnegative by Kato's inequality)."""
    x = as_values(g, u)
    lap_plus = laplacian_apply(g, np.maximum(x, 0.0)).values
    lap = laplacian_apply(g, x).values
    return VertexFunction(g, lap_plus - np.where(x > 0.0, lap, 0.0))


def green_defect(g: WeightedGraph, u: FunctionLike, v: FunctionLike) -> float:
    """|∫Δu·v dμ + ∫Γ(u,v) dμ|; zero up to roundoff."""
    lap = laplacian_apply(g, u).values
    vv = as_values(g, v)
    return abs(integrate(g, lap * vv) + integrate(g, gradient_form(g, u, v)))


# ----------------------------
# elliptic constant
# ----------------------------

def _osc_lp(a: np.ndarray, mu: np.ndarray, i: int, j: int) -> float:
    """max u_i - u_j subject to |Au| <= 1 componentwise and ∫u dμ = 0."""
    n = a.shape[0]
    c = np.zeros(n)
    c[i], c[j] = -1.0, 1.0
    res = linprog(
        c=c,
        A_ub=np.vstack([a, -a]),
        b_ub=np.ones(2 * n),
        A_eq=mu[None, :],
        b_eq=[0.0],
        bounds=[(None, None)] * n,
        method="highs",
    )
    if res.status != 0:
        raise DisconnectedGraph(f"elliptic LP failed ({res.message})")
    return float(-res.fun)


def elliptic_bound(g: WeightedGraph, lp_vertex_limit: int = 50) -> Tuple[float, bool]:
    """(C, sharp) with max u - min u <= C max|Δu|.

    Up to ``lp_vertex_limit`` vertices C is the best constant, computed by one
    LP per vertex pair. Above it C is the pseudoinverse row-difference bound
    and ``sharp`` is False.
    """
    _require_connected(g)
    if g.n <= 1:
        return 0.0, True
    a = -laplacian_matrix(g)   # matrix of Δ
    if g.n <= lp_vertex_limit:
        best = 0.0
        for i in range(g.n):
            for j in range(i + 1, g.n):
                best = max(best, _osc_lp(a, g.measure, i, j))
        return best, True
    pinv = np.linalg.pinv(a)
    bound = max(float(np.abs(pinv[i] - pinv).sum(axis=1).max()) for i in range(g.n))
    log.warning("elliptic constant: %d vertices above LP limit %d, returning a non-sharp bound",
                g.n, lp_vertex_limit)
    return bound, False


def elliptic_constant(g: WeightedGraph, lp_vertex_limit: int = 50) -> float:
    return elliptic_bound(g, lp_vertex_limit)[0]
