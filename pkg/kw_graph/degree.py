# -*- coding: utf-8 -*-
"""
kw_graph.degree
Brouwer degree of F(u) = -Δu + f - h eᵘ.

numeric degree  = Σ sign det DF(u) over the enumerated roots
theoretical     = -1 (c̃ >= 0), 1 (c̃ < 0, max h <= 0), 0 (c̃ < 0, max h > 0)

Vertices where h vanishes can be eliminated by a Schur complement of the
Laplacian without changing the degree.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .exceptions import (
    ClassViolation,
    DegenerateRoot,
    DomainMismatch,
    NonUnitMeasure,
    NoZeroVertices,
    PreconditionViolated,
)
from .graph import VertexFunction, WeightedGraph, as_values, laplacian_matrix
from .model import (
    KWProblem,
    RegimeTag,
    Solution,
    class_A_check,
    classify_regime,
    minimal_class_A,
    shift_problem,
)
from .parallel import map_ordered
from .solve import SolveOptions, enumerate_escalating

log = logging.getLogger(__name__)

# tolerance for clipping round-off negatives out of the reduced weights
REDUCED_WEIGHT_TOL = 1e-12


def degree_theoretical(p: KWProblem) -> Optional[int]:
    """Exact degree, or None when the regime conditions fail."""
    regime = classify_regime(p)
    if not regime.conditions_hold:
        return None
    if regime.tag is not RegimeTag.NEGATIVE:
        return -1
    s, _ = shift_problem(p)
    return 1 if float(s.h.max()) <= 0.0 else 0


@dataclass(frozen=True, eq=False)
class DegreeReport:
    solutions: List[Solution]
    numeric_degree: Optional[int]
    theoretical_degree: Optional[int]
    nondegenerate: bool
    radius_used: float

    @property
    def match(self) -> bool:
        return (self.numeric_degree is not None and self.theoretical_degree is not None
                and self.numeric_degree == self.theoretical_degree)

    def to_dict(self) -> dict:
        return {
            "solutions": [s.to_dict() for s in self.solutions],
            "numeric_degree": self.numeric_degree,
            "theoretical_degree": self.theoretical_degree,
            "nondegenerate": self.nondegenerate,
            "match": self.match,
            "radius_used": float(self.radius_used),
        }


def degree_numeric(p: KWProblem, opts: Optional[SolveOptions] = None, strict: bool = False) -> DegreeReport:
    """Morse sum over the enumerated roots; ``strict`` raises DegenerateRoot instead of reporting None."""
    sols, radius = enumerate_escalating(p, opts)
    degenerate = [s for s in sols if s.jac_det_sign == 0]
    if degenerate and strict:
        raise DegenerateRoot(f"{len(degenerate)} root(s) with |det DF| below the degeneracy tolerance")
    if degenerate:
        log.warning("%d degenerate root(s); numeric degree undefined", len(degenerate))
        numeric = None
    else:
        numeric = int(sum(s.jac_det_sign for s in sols))
    return DegreeReport(
        solutions=sols,
        numeric_degree=numeric,
        theoretical_degree=degree_theoretical(p),
        nondegenerate=not degenerate,
        radius_used=radius,
    )


# ----------------------------
# Schur reduction
# ----------------------------

@dataclass(frozen=True, eq=False)
class SchurReduction:
    reduced_graph: WeightedGraph
    reduced_h: VertexFunction
    reduced_f: VertexFunction
    R_matrix_logdet: float
    kept_vertices: List[str]
    eliminated_vertices: List[str]
    reduced_laplacian: np.ndarray
    r_inverse_nonnegative: bool
    kept_index: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        d = self.reduced_graph.to_dict()
        d.update({
            "h": self.reduced_h.tolist(),
            "f": self.reduced_f.tolist(),
            "R_matrix_logdet": float(self.R_matrix_logdet),
            "kept_vertices": list(self.kept_vertices),
            "eliminated_vertices": list(self.eliminated_vertices),
            "r_inverse_nonnegative": bool(self.r_inverse_nonnegative),
        })
        return d


def schur_reduce(p: KWProblem) -> Tuple[SchurReduction, KWProblem]:
    """Eliminate the vertices where h = 0.

    With L = [[P, Qᵀ], [Q, R]] ordered (kept, eliminated), the reduced
    Laplacian is P - QᵀR⁻¹Q and the reduced rhs f_kept - QᵀR⁻¹ f_elim.
    """
    g = p.graph
    if not g.has_unit_measure():
        raise NonUnitMeasure("Schur reduction expects μ ≡ 1; rescale the problem first")
    zero = p.h == 0.0
    if not zero.any():
        raise NoZeroVertices("h vanishes nowhere; nothing to eliminate")
    if zero.all():
        raise PreconditionViolated("h vanishes everywhere")
    kept = np.flatnonzero(~zero)
    elim = np.flatnonzero(zero)

    lap = laplacian_matrix(g, symmetric=True)
    P = lap[np.ix_(kept, kept)]
    Q = lap[np.ix_(elim, kept)]
    R = lap[np.ix_(elim, elim)]
    try:
        fac = scipy.linalg.cho_factor(R, lower=False)
    except np.linalg.LinAlgError as e:
        raise PreconditionViolated(f"eliminated block is not positive definite: {e}") from e
    logdet_r = 2.0 * float(np.sum(np.log(np.diag(fac[0]))))

    lt = P - Q.T @ scipy.linalg.cho_solve(fac, Q)
    lt = 0.5 * (lt + lt.T)
    f = p.rhs_values()
    ft = f[kept] - Q.T @ scipy.linalg.cho_solve(fac, f[elim])

    w = -lt.copy()
    np.fill_diagonal(w, 0.0)
    scale = max(1.0, float(np.max(np.abs(lt))))
    if np.any(w < -REDUCED_WEIGHT_TOL * scale):
        log.warning("reduced weights have negative entries down to %.3e", float(w.min()))
    w = np.maximum(w, 0.0)
    rinv = scipy.linalg.cho_solve(fac, np.eye(len(elim)))

    verts = [g.vertices[i] for i in kept]
    rg = WeightedGraph(vertices=tuple(verts), weights=w, measure=np.ones(len(kept)))
    red = SchurReduction(
        reduced_graph=rg,
        reduced_h=VertexFunction(rg, p.h[kept]),
        reduced_f=VertexFunction(rg, ft),
        R_matrix_logdet=logdet_r,
        kept_vertices=verts,
        eliminated_vertices=[g.vertices[i] for i in elim],
        reduced_laplacian=lt,
        r_inverse_nonnegative=bool(np.all(rinv >= -REDUCED_WEIGHT_TOL)),
        kept_index=kept,
    )
    return red, KWProblem.general(rg, p.h[kept], ft)


def determinant_identity_defect(p: KWProblem, red: SchurReduction, u) -> float:
    """Relative gap between det(L - diag(h eᵘ)) and det R · det(L̃ - diag(h eᵘ)|kept)."""
    x = as_values(p.graph, u)
    d = p.h * np.exp(x)
    s1, l1 = np.linalg.slogdet(laplacian_matrix(p.graph, symmetric=True) - np.diag(d))
    k = red.kept_index
    s2, l2 = np.linalg.slogdet(red.reduced_laplacian - np.diag(d[k]))
    l2 += red.R_matrix_logdet
    if s1 == 0.0 and s2 == 0.0:
        return 0.0
    if s1 != s2:
        return 2.0
    return abs(math.expm1(l2 - l1))


# ----------------------------
# homotopy paths
# ----------------------------

def interpolate_path(p0: KWProblem, p1: KWProblem, waypoints: int) -> List[KWProblem]:
    """Linear interpolation of h and of the right-hand side, endpoints included."""
    if p0.graph.vertices != p1.graph.vertices:
        raise DomainMismatch("path endpoints live on different graphs")
    if waypoints < 2:
        raise PreconditionViolated("a path needs at least 2 waypoints")
    g = p0.graph
    out = []
    for t in np.linspace(0.0, 1.0, waypoints):
        h = (1.0 - t) * p0.h + t * p1.h
        if p0.is_scalar and p1.is_scalar:
            out.append(KWProblem.scalar(g, h, (1.0 - t) * p0.c + t * p1.c))
        else:
            out.append(KWProblem.general(g, h, (1.0 - t) * p0.rhs_values() + t * p1.rhs_values()))
    return out


@dataclass(frozen=True)
class SweepReport:
    rows: List[Dict]
    class_A: Dict[str, float]
    changes: List[Dict]

    @property
    def constant_within_regimes(self) -> bool:
        return not any(ch["kind"] != "regime_change" for ch in self.changes)

    def to_dict(self) -> dict:
        return {
            "waypoints": self.rows,
            "class_A": self.class_A,
            "changes": self.changes,
            "constant_within_regimes": self.constant_within_regimes,
        }


def degree_invariance_sweep(path: Sequence[KWProblem], opts: Optional[SolveOptions] = None,
                            A: Optional[float] = None) -> SweepReport:
    """Numeric degree at each waypoint; flags every change of degree.

    Waypoints are grouped by regime; each group must fit one class A (the
    given ``A``, else the smallest common one). A degree change across a
    regime boundary is reported as "regime_change", any other as
    "unexpected".
    """
    tags = [classify_regime(q).tag for q in path]
    class_a: Dict[str, float] = {}
    for tag in dict.fromkeys(tags):
        members = [i for i, t in enumerate(tags) if t is tag]
        if A is None:
            need = [minimal_class_A(path[i]) for i in members]
            worst = int(np.argmax(need))
            if not math.isfinite(need[worst]):
                raise ClassViolation(f"waypoint {members[worst]} admits no class-A bound")
            a_tag = float(need[worst])
        else:
            a_tag = float(A)
            for i in members:
                chk = class_A_check(path[i], a_tag)
                if not chk.ok:
                    raise ClassViolation(f"waypoint {i} violates {', '.join(chk.violated)} for A={a_tag:g}")
        class_a[tag.value] = a_tag

    reports = map_ordered(lambda q: degree_numeric(q, opts), list(path))
    rows, changes = [], []
    for i, (q, rep, tag) in enumerate(zip(path, reports, tags)):
        rows.append({
            "index": i,
            "regime": tag.value,
            "n_solutions": len(rep.solutions),
            "numeric_degree": rep.numeric_degree,
            "theoretical_degree": rep.theoretical_degree,
            "match": rep.match,
        })
        if i and rep.numeric_degree != reports[i - 1].numeric_degree:
            kind = "regime_change" if tag is not tags[i - 1] else "unexpected"
            if kind == "unexpected":
                log.warning("degree changed inside regime %s at waypoint %d", tag.value, i)
            changes.append({"index": i, "from": reports[i - 1].numeric_degree,
                            "to": rep.numeric_degree, "kind": kind})
    return SweepReport(rows=rows, class_A=class_a, changes=changes)


def degree_reduction_consistency(p: KWProblem, opts: Optional[SolveOptions] = None) -> bool:
    """Numeric degree of ``p`` equals that of its Schur-reduced problem."""
    _, q = schur_reduce(p)
    d0 = degree_numeric(p, opts).numeric_degree
    d1 = degree_numeric(q, opts).numeric_degree
    return d0 is not None and d0 == d1
