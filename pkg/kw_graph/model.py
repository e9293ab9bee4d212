# -*- coding: utf-8 -*-
"""
kw_graph.model
The Kazdan-Warner problem  -Δu = h eᵘ - f  on a weighted graph.

F(u) = -Δu + f - h eᵘ is the residual map, DF(u) = -Δ - diag(h eᵘ) its
Jacobian (row-scaled by 1/μ like -Δ), and
J(u) = ∫(½|∇u|² + f u - h eᵘ) dμ the energy whose critical points are the
solutions. A scalar right-hand side c stands for the constant function c.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from . import config
from .exceptions import (
    DisconnectedGraph,
    NonpositiveA,
    OverflowRisk,
    TooFewSamples,
)
from .graph import (
    FunctionLike,
    VertexFunction,
    WeightedGraph,
    as_values,
    gradient_form,
    integrate,
    laplacian_matrix,
)

log = logging.getLogger(__name__)


class Stability(str, Enum):
    UNSTABLE = "unstable"
    STABLE = "stable"
    STRICTLY_STABLE = "strictly_stable"


class RegimeTag(str, Enum):
    POSITIVE = "positive"
    FLAT = "flat"
    NEGATIVE = "negative"


class FamilyKind(str, Enum):
    UNIFORMLY_BOUNDED = "uniformly_bounded"
    TO_MINUS_INFINITY = "to_minus_infinity"
    MAX_BLOWUP = "max_blowup"


# ----------------------------
# problem
# ----------------------------

@dataclass(frozen=True, eq=False)
class KWProblem:
    graph: WeightedGraph
    h: np.ndarray
    c: Optional[float] = None
    f: Optional[np.ndarray] = None

    def __post_init__(self):
        if (self.c is None) == (self.f is None):
            raise ValueError("give exactly one of a scalar c or a function f")
        h = np.array(as_values(self.graph, self.h), dtype=np.float64)
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        if self.f is not None:
            f = np.array(as_values(self.graph, self.f), dtype=np.float64)
            f.setflags(write=False)
            object.__setattr__(self, "f", f)
        else:
            object.__setattr__(self, "c", float(self.c))

    @classmethod
    def scalar(cls, g: WeightedGraph, h: FunctionLike, c: float) -> "KWProblem":
        return cls(graph=g, h=h, c=float(c))

    @classmethod
    def general(cls, g: WeightedGraph, h: FunctionLike, f: FunctionLike) -> "KWProblem":
        return cls(graph=g, h=h, f=f)

    @property
    def is_scalar(self) -> bool:
        return self.f is None

    def rhs_values(self) -> np.ndarray:
        if self.f is None:
            return np.full(self.graph.n, self.c)
        return self.f

    @property
    def rhs_mean(self) -> float:
        """∫f dμ / ∫1 dμ (equals c for a scalar right-hand side)."""
        if self.f is None:
            return self.c
        return integrate(self.graph, self.f) / self.graph.volume

    def with_function_rhs(self) -> "KWProblem":
        return KWProblem.general(self.graph, self.h, self.rhs_values())

    def relabel(self, order: Sequence[int]) -> "KWProblem":
        idx = np.asarray(order, dtype=int)
        g = self.graph.relabel(idx)
        if self.f is None:
            return KWProblem.scalar(g, self.h[idx], self.c)
        return KWProblem.general(g, self.h[idx], self.f[idx])

    def to_dict(self) -> dict:
        d = self.graph.to_dict()
        d["h"] = [float(x) for x in self.h]
        if self.f is None:
            d["c"] = float(self.c)
        else:
            d["f"] = [float(x) for x in self.f]
        return d


# ----------------------------
# residual / Jacobian / energy
# ----------------------------

def _exp_guarded(x: np.ndarray, guard: Optional[float] = None) -> np.ndarray:
    guard = config.OVERFLOW_GUARD if guard is None else guard
    top = float(np.max(x)) if x.size else 0.0
    if not math.isfinite(top) or top > guard:
        raise OverflowRisk(f"max u = {top:.6g} exceeds the overflow guard {guard:g}")
    return np.exp(x)


def residual_values(p: KWProblem, x: np.ndarray, lap: Optional[np.ndarray] = None) -> np.ndarray:
    """Dense F(u); ``lap`` is an optional precomputed matrix of -Δ."""
    lap = laplacian_matrix(p.graph) if lap is None else lap
    return lap @ x + p.rhs_values() - p.h * _exp_guarded(x)


def residual(p: KWProblem, u: FunctionLike) -> VertexFunction:
    x = as_values(p.graph, u)
    return VertexFunction(p.graph, residual_values(p, x))


def jacobian(p: KWProblem, u: FunctionLike) -> np.ndarray:
    x = as_values(p.graph, u)
    return laplacian_matrix(p.graph) - np.diag(p.h * _exp_guarded(x))


def energy(p: KWProblem, u: FunctionLike) -> float:
    g = p.graph
    x = as_values(g, u)
    ex = _exp_guarded(x)
    dirichlet = 0.5 * integrate(g, gradient_form(g, x, x))
    return dirichlet + integrate(g, p.rhs_values() * x) - integrate(g, p.h * ex)


def integral_obstruction(p: KWProblem, u: FunctionLike) -> float:
    """|∫h eᵘ dμ - ∫f dμ|; vanishes at every solution."""
    x = as_values(p.graph, u)
    return abs(integrate(p.graph, p.h * _exp_guarded(x)) - integrate(p.graph, p.rhs_values()))


# ----------------------------
# stability / determinant
# ----------------------------

class StabilityResult(NamedTuple):
    stability: Stability
    min_eigenvalue: float


def stability_form(p: KWProblem, u: FunctionLike) -> np.ndarray:
    """diag(μ)(-Δ - diag(h eᵘ)): symmetric matrix of ∫(|∇ξ|² - h eᵘ ξ²) dμ."""
    x = as_values(p.graph, u)
    g = p.graph
    return laplacian_matrix(g, symmetric=True) - np.diag(g.measure * p.h * _exp_guarded(x))


def stability_classify(p: KWProblem, u: FunctionLike, tol: Optional[float] = None) -> StabilityResult:
    tol = config.STABILITY_TOL if tol is None else tol
    lam = float(np.linalg.eigvalsh(stability_form(p, u))[0])
    if lam > tol:
        return StabilityResult(Stability.STRICTLY_STABLE, lam)
    if lam < -tol:
        return StabilityResult(Stability.UNSTABLE, lam)
    return StabilityResult(Stability.STABLE, lam)


def determinant_sign(jac: np.ndarray, tol: Optional[float] = None) -> Tuple[int, float]:
    """(sign of det, log10 of |det| / Π row norms); sign 0 below ``tol``."""
    tol = config.DEGENERACY_TOL if tol is None else tol
    rows = np.linalg.norm(jac, axis=1)
    if np.any(rows == 0.0):
        return 0, -math.inf
    sign, logabs = np.linalg.slogdet(jac)
    if sign == 0.0:
        return 0, -math.inf
    rel = (logabs - float(np.log(rows).sum())) / math.log(10.0)
    if rel < math.log10(tol):
        return 0, rel
    return int(sign), rel


@dataclass(frozen=True, eq=False)
class Solution:
    u: VertexFunction
    residual_linf: float
    jac_det_sign: int
    stability: Stability
    min_eigenvalue: float
    det_log10_relative: float = 0.0
    iterations: int = 0
    pinv_steps: int = 0

    @property
    def values(self) -> np.ndarray:
        return self.u.values

    def to_dict(self) -> dict:
        return {
            "u": self.u.tolist(),
            "residual_linf": float(self.residual_linf),
            "jac_det_sign": int(self.jac_det_sign),
            "stability": self.stability.value,
            "min_eigenvalue": float(self.min_eigenvalue),
        }


def describe_solution(p: KWProblem, u: FunctionLike, *, iterations: int = 0, pinv_steps: int = 0) -> Solution:
    """Residual, determinant sign and stability class of ``u``."""
    x = np.array(as_values(p.graph, u), dtype=np.float64)
    res = float(np.max(np.abs(residual_values(p, x))))
    sign, rel = determinant_sign(jacobian(p, x))
    stab = stability_classify(p, x)
    return Solution(
        u=VertexFunction(p.graph, x),
        residual_linf=res,
        jac_det_sign=sign,
        stability=stab.stability,
        min_eigenvalue=stab.min_eigenvalue,
        det_log10_relative=rel,
        iterations=iterations,
        pinv_steps=pinv_steps,
    )


# ----------------------------
# Poisson solve and the φ-shift
# ----------------------------

def solve_poisson(g: WeightedGraph, f: FunctionLike, normalization: str = "min_zero") -> VertexFunction:
    """φ with -Δφ = ∫f dμ/∫1 dμ - f, normalized by min φ = 0 or ∫φ dμ = 0."""
    if not g.is_connected():
        raise DisconnectedGraph("Poisson problem needs a connected graph")
    fx = as_values(g, f)
    rhs = integrate(g, fx) / g.volume - fx
    lap = laplacian_matrix(g)
    # bordered system: [-Δ  1; μᵀ 0] [φ; s] = [rhs; 0]
    n = g.n
    a = np.zeros((n + 1, n + 1))
    a[:n, :n] = lap
    a[:n, n] = 1.0
    a[n, :n] = g.measure
    b = np.concatenate([rhs, [0.0]])
    phi = np.linalg.solve(a, b)[:n]
    norm_ = (normalization or "min_zero").lower().replace("-", "_")
    if norm_ in ("min_zero", "minzero"):
        phi = phi - phi.min()
    elif norm_ in ("mean_zero", "meanzero"):
        phi = phi - integrate(g, phi) / g.volume
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    return VertexFunction(g, phi)


def shift_problem(p: KWProblem) -> Tuple[KWProblem, np.ndarray]:
    """(scalar problem for w = u - φ, φ); identity for scalar problems."""
    if p.is_scalar:
        return p, np.zeros(p.graph.n)
    phi = solve_poisson(p.graph, p.f, "min_zero").values
    return KWProblem.scalar(p.graph, p.h * np.exp(phi), p.rhs_mean), phi


# ----------------------------
# regime / necessary conditions
# ----------------------------

@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    max_h_pos: bool
    h_changes_sign: bool
    int_h_neg: bool
    int_he_phi_neg: bool
    min_h_neg: bool

    @property
    def conditions_hold(self) -> bool:
        """Necessary conditions for solvability (and for the a priori bound)."""
        if self.tag is RegimeTag.POSITIVE:
            return self.max_h_pos
        if self.tag is RegimeTag.FLAT:
            return self.int_he_phi_neg and self.max_h_pos
        return self.min_h_neg

    def to_dict(self) -> dict:
        return {
            "tag": self.tag.value,
            "max_h_pos": self.max_h_pos,
            "h_changes_sign": self.h_changes_sign,
            "int_h_neg": self.int_h_neg,
            "int_he_phi_neg": self.int_he_phi_neg,
            "min_h_neg": self.min_h_neg,
            "conditions_hold": self.conditions_hold,
        }


def _rhs_sign(p: KWProblem) -> int:
    if p.is_scalar:
        return int(np.sign(p.c))
    g = p.graph
    total = integrate(g, p.f)
    scale = integrate(g, np.abs(p.f))
    if abs(total) <= 1e-12 * max(scale, 1e-300):
        return 0
    return int(np.sign(total))


def classify_regime(p: KWProblem) -> Regime:
    g = p.graph
    _, phi = shift_problem(p)
    sign = _rhs_sign(p)
    tag = {1: RegimeTag.POSITIVE, 0: RegimeTag.FLAT, -1: RegimeTag.NEGATIVE}[sign]
    hmax, hmin = float(p.h.max()), float(p.h.min())
    return Regime(
        tag=tag,
        max_h_pos=hmax > 0.0,
        h_changes_sign=(hmax > 0.0 and hmin < 0.0),
        int_h_neg=integrate(g, p.h) < 0.0,
        int_he_phi_neg=integrate(g, p.h * np.exp(phi)) < 0.0,
        min_h_neg=hmin < 0.0,
    )


def solvability_predicted(p: KWProblem) -> Optional[bool]:
    """Existence verdict of the classical corollaries; None when it depends on c_h."""
    s, _ = shift_problem(p)
    g, h, c = s.graph, s.h, s.c
    if not np.any(h):
        return c == 0.0
    if c > 0.0:
        return bool(h.max() > 0.0)
    if c == 0.0:
        return bool(h.max() > 0.0 and h.min() < 0.0 and integrate(g, h) < 0.0)
    if h.max() <= 0.0:
        return True
    if integrate(g, h) >= 0.0:
        return False
    return None


# ----------------------------
# class A (uniform bounds)
# ----------------------------

class ClassACheck(NamedTuple):
    ok: bool
    violated: Tuple[str, ...]


def class_A_check(p: KWProblem, A: float) -> ClassACheck:
    if not (A > 0.0):
        raise NonpositiveA(f"A must be positive, got {A}")
    s, _ = shift_problem(p)
    g, h, c = s.graph, s.h, s.c
    inv = 1.0 / A
    bad: List[str] = []
    if float(np.max(np.abs(h))) + abs(c) > A:
        bad.append("(1) max|h| + |c| <= A")
    pos = h[h > 0.0]
    if pos.size and float(pos.min()) < inv:
        bad.append("(2) h > 0 implies h >= 1/A")
    if c > 0.0 and c < inv:
        bad.append("(3) c > 0 implies c >= 1/A")
    if c == 0.0 and integrate(g, h) > -inv:
        bad.append("(4) c = 0 implies ∫h dμ <= -1/A")
    if c < 0.0 and (c > -inv or float(h.min()) > -inv):
        bad.append("(5) c < 0 implies c <= -1/A and min h <= -1/A")
    return ClassACheck(ok=not bad, violated=tuple(bad))


def minimal_class_A(p: KWProblem) -> float:
    """Smallest A passing class_A_check, or inf when none exists."""
    s, _ = shift_problem(p)
    g, h, c = s.graph, s.h, s.c
    need = [float(np.max(np.abs(h))) + abs(c)]
    pos = h[h > 0.0]
    if pos.size:
        need.append(1.0 / float(pos.min()))
    if c > 0.0:
        need.append(1.0 / c)
    elif c == 0.0:
        total = integrate(g, h)
        if total >= 0.0:
            return math.inf
        need.append(-1.0 / total)
    else:
        if h.min() >= 0.0:
            return math.inf
        need.extend([-1.0 / c, -1.0 / float(h.min())])
    a = max(need)
    return a if a > 0.0 else math.inf


# ----------------------------
# blow-up trichotomy over a family
# ----------------------------

@dataclass(frozen=True)
class FamilyTrend:
    kind: FamilyKind
    vertex: Optional[str] = None
    h_zero_check: Optional[bool] = None
    bounded_on_positive: Optional[bool] = None
    bounded_below: Optional[bool] = None
    max_trajectory: Tuple[float, ...] = field(default_factory=tuple)
    min_trajectory: Tuple[float, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "vertex": self.vertex,
            "h_zero_check": self.h_zero_check,
            "bounded_on_positive": self.bounded_on_positive,
            "bounded_below": self.bounded_below,
        }


SampleValue = Union[Solution, VertexFunction, Sequence[float], np.ndarray]


def _sample_values(s: SampleValue) -> np.ndarray:
    if isinstance(s, Solution):
        return s.values
    if isinstance(s, VertexFunction):
        return s.values
    return np.asarray(s, dtype=np.float64).reshape(-1)


def classify_family(
    samples: Sequence[Tuple[object, SampleValue]],
    limit: Optional[KWProblem] = None,
    growth: Optional[float] = None,
    h_tol: float = 1e-8,
) -> FamilyTrend:
    """Finite-sample reading of the blow-up alternative for a parameter family.

    ``samples`` are (parameter, solution) pairs ordered along the family. The
    limit problem is ``limit`` or, failing that, the last parameter when it is
    a KWProblem; it is only needed for the h(x0) = 0 check.
    """
    if len(samples) < 3:
        raise TooFewSamples(f"need at least 3 family members, got {len(samples)}")
    growth = float(config.ACTIVE["family_growth"] if growth is None else growth)
    if limit is None and isinstance(samples[-1][0], KWProblem):
        limit = samples[-1][0]
    u = np.vstack([_sample_values(s) for _, s in samples])
    mx, mn = u.max(axis=1), u.min(axis=1)
    tail = max(2, len(samples) // 2)
    flat_eps = 1e-12 * max(1.0, float(np.max(np.abs(u))))

    rising = (mx[-1] - mx[0] > growth) and bool(np.all(np.diff(mx[-tail:]) >= -flat_eps))
    falling = (mn[0] - mn[-1] > growth) and bool(np.all(np.diff(mn[-tail:]) <= flat_eps))
    traj = dict(max_trajectory=tuple(float(v) for v in mx), min_trajectory=tuple(float(v) for v in mn))

    if rising:
        x0 = int(np.argmax(u[-1]))
        vertex = limit.graph.vertices[x0] if limit is not None else str(x0)
        h_zero = on_pos = None
        if limit is not None:
            hl = limit.h
            h_zero = bool(abs(hl[x0]) <= h_tol * max(1.0, float(np.max(np.abs(hl)))))
            pos = hl > 0.0
            on_pos = True if not pos.any() else bool(u[-1, pos].max() - u[0, pos].max() <= growth)
        return FamilyTrend(
            kind=FamilyKind.MAX_BLOWUP,
            vertex=vertex,
            h_zero_check=h_zero,
            bounded_on_positive=on_pos,
            bounded_below=bool(mn[0] - mn[-1] <= growth),
            **traj,
        )
    sinking = (mx[0] - mx[-1] > growth) and bool(np.all(np.diff(mx[-tail:]) <= flat_eps))
    if falling and sinking:
        return FamilyTrend(kind=FamilyKind.TO_MINUS_INFINITY, bounded_below=False, **traj)
    if falling:
        log.warning("family minimum falls while its maximum stays bounded; not a uniform decay")
    return FamilyTrend(kind=FamilyKind.UNIFORMLY_BOUNDED, bounded_below=not falling, **traj)
