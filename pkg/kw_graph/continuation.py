# -*- coding: utf-8 -*-
"""
kw_graph.continuation
Parameter continuation in the negative regime.

- estimate_c_h: bisection for the solvability threshold c_h of -Δu = h eᵘ - c
- estimate_lambda_star: bisection for λ* of -Δu = (K + λ) eᵘ - κ
- build_supersolution_small_c: the a v + ln a super-solution
- xi_certificate: (Δ + c)ξ = h with ξ > e^{-u} at a solution
- branch_scan: root counts and stability along a parameter grid

"Solvable" here means the escalated multistart found at least one root. It
is a semi-decision: a bracket end marked unsolvable is evidence, not proof.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from . import config
from .exceptions import PreconditionViolated, SingularShift
from .graph import (
    FunctionLike,
    VertexFunction,
    WeightedGraph,
    as_values,
    elliptic_constant,
    integrate,
    laplacian_matrix,
)
from .model import KWProblem, Solution
from .parallel import map_ordered
from .report import frame_to_csv
from .solve import (
    SolveOptions,
    SubSuperKind,
    SubSuperPair,
    affine_supersolutions,
    check_sub_super,
    constrained_minimize,
    enumerate_escalating,
    lower_barrier,
    solve_negative_via_supersolution,
    resolve_options,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BracketResult:
    parameter: str
    lower: float
    upper: float
    evidence: Dict[str, Any] = field(default_factory=dict)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "lower": float(self.lower),
            "upper": float(self.upper),
            "width": float(self.width),
            "evidence": self.evidence,
        }


@dataclass(frozen=True)
class BranchRow:
    parameter: float
    count: int
    stabilities: Tuple[str, ...]
    min_residual: float
    max_abs_u: float


@dataclass(frozen=True)
class BranchTable:
    rows: List[BranchRow]

    @property
    def envelope(self) -> float:
        """max |u| over every root in the table (0 for an empty table)."""
        return max((r.max_abs_u for r in self.rows if r.count), default=0.0)

    def counts(self) -> List[int]:
        return [r.count for r in self.rows]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{
                "parameter": r.parameter,
                "count": r.count,
                "stabilities": ";".join(r.stabilities),
                "min_residual": r.min_residual,
            } for r in self.rows],
            columns=["parameter", "count", "stabilities", "min_residual"],
        )

    def to_csv(self) -> str:
        return frame_to_csv(self.to_frame())


def _row(param: float, sols: Sequence[Solution]) -> BranchRow:
    return BranchRow(
        parameter=float(param),
        count=len(sols),
        stabilities=tuple(s.stability.value for s in sols),
        min_residual=min((s.residual_linf for s in sols), default=math.nan),
        max_abs_u=max((float(np.max(np.abs(s.values))) for s in sols), default=0.0),
    )


def _count(p: KWProblem, opts: SolveOptions) -> List[Solution]:
    return enumerate_escalating(p, opts)[0]


def _recheck(p: KWProblem, opts: SolveOptions, radius: float) -> int:
    alt = replace(opts, rng_seed=opts.rng_seed + 1, start_box_radius=2.0 * radius, escalate=0)
    return len(enumerate_escalating(p, alt)[0])


# ----------------------------
# super-solutions
# ----------------------------

@dataclass(frozen=True, eq=False)
class SuperSolution:
    u: VertexFunction
    c_range: float
    a: float


def build_supersolution_small_c(g: WeightedGraph, h: FunctionLike,
                                grid: Optional[Sequence[float]] = None) -> Optional[SuperSolution]:
    """a v + ln a with the widest validated range [-c_range, 0), or None."""
    hx = as_values(g, h)
    if integrate(g, hx) >= 0.0:
        raise PreconditionViolated("needs ∫h dμ < 0")
    best: Optional[SuperSolution] = None
    for a, u, c_range in affine_supersolutions(g, hx, grid):
        if best is not None and c_range <= best.c_range:
            continue
        kind = check_sub_super(KWProblem.scalar(g, hx, -c_range), u).kind
        if kind in (SubSuperKind.SUPER, SubSuperKind.SOLUTION):
            best = SuperSolution(VertexFunction(g, u), c_range, a)
    return best


def lambda_family_supersolution(g: WeightedGraph, K: FunctionLike, kappa,
                                opts: Optional[SolveOptions] = None) -> Tuple[VertexFunction, float]:
    """(ψ, λ0) with -Δψ = K e^ψ - κ + 1; ψ is a super-solution for every λ <= λ0 = e^{-max ψ}."""
    opts = resolve_options(opts)
    kx = as_values(g, K)
    p = _kappa_problem(g, kx, kappa, shift=1.0)
    if p.is_scalar:
        psi = solve_negative_via_supersolution(p, opts).values
    else:
        sols = _count(p, opts)
        if not sols:
            raise PreconditionViolated("no solution of the shifted λ = 0 problem found")
        psi = sols[0].values
    return VertexFunction(g, psi), math.exp(-float(np.max(psi)))


# ----------------------------
# ξ certificate
# ----------------------------

@dataclass(frozen=True)
class XiCertificate:
    ok: bool
    margin: float
    boundary: bool
    xi: Tuple[float, ...]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "margin": self.margin, "boundary": self.boundary, "xi": list(self.xi)}


def xi_certificate(g: WeightedGraph, h: FunctionLike, c: float,
                   u: Union[Solution, FunctionLike], const_tol: float = 1e-12) -> XiCertificate:
    """Solve (Δ + c)ξ = h and check ξ > e^{-u} at every vertex.

    A constant u sits on the boundary of the inequality; it is reported with
    margin 0 and ``boundary`` set instead of failing.
    """
    if not (c < 0.0):
        raise PreconditionViolated(f"certificate needs c < 0, got {c}")
    hx = as_values(g, h)
    x = as_values(g, u.u if isinstance(u, Solution) else u)
    op = -laplacian_matrix(g) + c * np.eye(g.n)
    try:
        xi = np.linalg.solve(op, hx)
    except np.linalg.LinAlgError as e:
        raise SingularShift(f"Δ + c·I is singular for c = {c}") from e
    margin = float(np.min(xi - np.exp(-x)))
    boundary = float(np.ptp(x)) <= const_tol
    if boundary and abs(margin) <= 1e-9 * max(1.0, float(np.max(np.abs(xi)))):
        margin = 0.0
    return XiCertificate(ok=margin > 0.0 or (boundary and margin == 0.0), margin=margin,
                         boundary=boundary, xi=tuple(float(v) for v in xi))


# ----------------------------
# c_h
# ----------------------------

def heuristic_c_h_bound(g: WeightedGraph, h: FunctionLike) -> float:
    """-‖Δh‖∞ · C(g) / max h⁺ with C(g) the elliptic constant; a rough guide only."""
    hx = as_values(g, h)
    lap_h = float(np.max(np.abs(laplacian_matrix(g) @ hx)))
    return -lap_h * elliptic_constant(g) / float(np.max(hx))


def estimate_c_h(g: WeightedGraph, h: FunctionLike, opts: Optional[SolveOptions] = None,
                 bracket_tol: Optional[float] = None, max_doublings: int = 60) -> BracketResult:
    """Bracket [c_lo, c_hi] around c_h: no roots found at c_lo, roots at c_hi."""
    opts = resolve_options(opts)
    tol = float(config.ACTIVE["bracket_tol"] if bracket_tol is None else bracket_tol)
    hx = np.asarray(as_values(g, h), dtype=np.float64)
    if not (integrate(g, hx) < 0.0 < float(hx.max())):
        raise PreconditionViolated("c_h is finite only for ∫h dμ < 0 < max h")

    def solve_at(c: float) -> List[Solution]:
        return _count(KWProblem.scalar(g, hx, c), opts)

    sup = build_supersolution_small_c(g, hx)
    hi = -0.5 * sup.c_range if sup is not None else -1e-3
    sols_hi = solve_at(hi)
    for _ in range(20):
        if sols_hi:
            break
        hi *= 0.5
        sols_hi = solve_at(hi)
    if not sols_hi:
        raise PreconditionViolated("no solvable c < 0 found near 0")

    lo = hi
    for _ in range(max_doublings):
        lo *= 2.0
        found = solve_at(lo)
        if not found:
            break
        hi, sols_hi = lo, found
    else:
        raise PreconditionViolated(f"still solvable at c = {lo:g}")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        found = solve_at(mid)
        log.debug("c = %.8g: %d roots", mid, len(found))
        if found:
            hi, sols_hi = mid, found
        else:
            lo = mid

    p_lo = KWProblem.scalar(g, hx, lo)
    p_hi = KWProblem.scalar(g, hx, hi)
    _, r_lo = enumerate_escalating(p_lo, opts)
    _, r_hi = enumerate_escalating(p_hi, opts)
    lo_recheck = _recheck(p_lo, opts, r_lo)
    hi_recheck = _recheck(p_hi, opts, r_hi)
    xi = [xi_certificate(g, hx, hi, s).margin for s in sols_hi]
    evidence = {
        "lower_count": 0,
        "upper_count": len(sols_hi),
        "lower_recheck_count": lo_recheck,
        "upper_recheck_count": hi_recheck,
        "reproducible": lo_recheck == 0 and hi_recheck == len(sols_hi),
        "upper_xi_margins": xi,
        "supersolution_c_range": sup.c_range if sup is not None else None,
        "heuristic_lower_bound": heuristic_c_h_bound(g, hx),
    }
    return BracketResult(parameter="c", lower=lo, upper=hi, evidence=evidence)


# ----------------------------
# λ*
# ----------------------------

def _kappa_problem(g: WeightedGraph, h: np.ndarray, kappa, shift: float = 0.0) -> KWProblem:
    if np.ndim(kappa) == 0:
        return KWProblem.scalar(g, h, float(kappa) - shift)
    return KWProblem.general(g, h, np.asarray(as_values(g, kappa)) - shift)


def estimate_lambda_star(g: WeightedGraph, K: FunctionLike, kappa,
                         opts: Optional[SolveOptions] = None,
                         bracket_tol: Optional[float] = None) -> Tuple[BracketResult, BranchTable]:
    """Bracket λ* for -Δu = (K + λ) eᵘ - κ and tabulate root counts.

    The bracket [lower, upper] has roots at ``lower`` and none at ``upper``
    and sits inside (0, -min K).
    """
    opts = resolve_options(opts)
    tol = float(config.ACTIVE["bracket_tol"] if bracket_tol is None else bracket_tol)
    kx = np.asarray(as_values(g, K), dtype=np.float64)
    kint = integrate(g, np.full(g.n, float(kappa)) if np.ndim(kappa) == 0 else as_values(g, kappa))
    if not (float(kx.min()) < float(kx.max()) == 0.0):
        raise PreconditionViolated("needs min K < max K = 0")
    if not (kint < 0.0):
        raise PreconditionViolated("needs ∫κ dμ < 0")
    m = -float(kx.min())

    def solve_at(lam: float) -> List[Solution]:
        return _count(_kappa_problem(g, kx + lam, kappa), opts)

    _, lam0 = lambda_family_supersolution(g, kx, kappa, opts)
    lo = min(lam0, 0.5 * m)
    if not solve_at(lo):
        log.info("no root at λ0 = %.6g; starting from λ = 0", lo)
        lo = 0.0
    hi = m
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        found = solve_at(mid)
        log.debug("λ = %.8g: %d roots", mid, len(found))
        if found:
            lo = mid
        else:
            hi = mid

    samples = sorted({-0.5 * m, 0.0, 0.5 * lo, lo, 2.0 * m})
    probs = [_kappa_problem(g, kx + lam, kappa) for lam in samples]
    table = scan_problems(probs, samples, opts)
    evidence = {
        "lower_count": len(solve_at(lo)),
        "upper_count": len(solve_at(hi)),
        "lambda0": lam0,
        "interval": [0.0, m],
        "monotone": _monotone(table),
    }
    return BracketResult(parameter="lambda", lower=lo, upper=hi, evidence=evidence), table


def _monotone(table: BranchTable) -> bool:
    """Solvable at a parameter implies solvable at every smaller sampled one."""
    seen_empty = False
    for r in table.rows:
        if r.count == 0:
            seen_empty = True
        elif seen_empty:
            return False
    return True


# ----------------------------
# scans
# ----------------------------

def scan_problems(problems: Sequence[KWProblem], params: Sequence[float],
                  opts: Optional[SolveOptions] = None) -> BranchTable:
    """One table row per problem, labelled by the matching entry of ``params``."""
    opts = resolve_options(opts)
    found = map_ordered(lambda q: _count(q, opts), list(problems))
    return BranchTable(rows=[_row(t, s) for t, s in zip(params, found)])


def branch_scan(g: WeightedGraph, h: FunctionLike, c_grid: Sequence[float],
                opts: Optional[SolveOptions] = None) -> BranchTable:
    opts = resolve_options(opts)
    grid = [float(c) for c in c_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise PreconditionViolated("c grid must be sorted ascending")
    hx = as_values(g, h)
    return scan_problems([KWProblem.scalar(g, hx, c) for c in grid], grid, opts)


def strict_local_minimum(p: KWProblem, upper: Union[Solution, FunctionLike],
                         opts: Optional[SolveOptions] = None) -> Solution:
    """Minimize J over [-A, upper], ``upper`` being a root at the same or a more negative c."""
    if not p.is_scalar or not (p.c < 0.0):
        raise PreconditionViolated("needs a scalar right-hand side c < 0")
    psi = np.asarray(as_values(p.graph, upper.u if isinstance(upper, Solution) else upper), dtype=np.float64)
    pair = SubSuperPair.of(p.graph, lower_barrier(p, psi), psi)
    return constrained_minimize(p, pair, opts)

