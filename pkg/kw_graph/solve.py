# -*- coding: utf-8 -*-
"""
kw_graph.solve
Nonlinear solvers for the graph Kazdan-Warner equation.

- newton_solve: damped Newton with Armijo backtracking on ½∫F² dμ
- enumerate_solutions / enumerate_escalating: seeded multistart Newton
- check_sub_super / constrained_minimize: the sub/super-solution method
- solve_negative_via_supersolution: c < 0 solver built on the above
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields, replace
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from . import config
from .exceptions import (
    InvalidOptions,
    KWError,
    NoConvergence,
    NoSupersolutionFound,
    NotSubSolution,
    NotSuperSolution,
    OrderingError,
    OverflowRisk,
    PreconditionViolated,
)
from .graph import FunctionLike, VertexFunction, WeightedGraph, as_values, laplacian_matrix
from .model import KWProblem, Solution, describe_solution, energy, residual_values, solve_poisson
from .parallel import map_ordered

log = logging.getLogger(__name__)

# slack allowed when checking box membership of a minimizer
BOX_EPS = 1e-12


@dataclass(frozen=True)
class SolveOptions:
    tol_residual: float = 1e-10
    max_iters: int = 100
    damping: float = 0.5
    armijo: float = 1e-4
    start_box_radius: Optional[float] = None  # None: derived from the problem scale
    n_starts: int = 48
    rng_seed: int = 0
    dedupe_distance: float = 1e-6
    escalate: int = 3

    def __post_init__(self):
        if not (self.tol_residual > 0.0):
            raise InvalidOptions(f"tol_residual must be positive, got {self.tol_residual}")
        if self.max_iters < 1:
            raise InvalidOptions(f"max_iters must be >= 1, got {self.max_iters}")
        if not (0.0 < self.damping < 1.0):
            raise InvalidOptions(f"damping must lie in (0, 1), got {self.damping}")
        if not (0.0 < self.armijo < 1.0):
            raise InvalidOptions(f"armijo must lie in (0, 1), got {self.armijo}")
        if self.n_starts < 1:
            raise InvalidOptions(f"n_starts must be >= 1, got {self.n_starts}")
        if self.start_box_radius is not None and not (self.start_box_radius > 0.0):
            raise InvalidOptions(f"start_box_radius must be positive, got {self.start_box_radius}")
        if self.dedupe_distance <= 0.0:
            raise InvalidOptions("dedupe_distance must be positive")
        if self.escalate < 0:
            raise InvalidOptions("escalate must be >= 0")

    @classmethod
    def from_config(cls, cfg: Optional[Dict[str, Any]] = None, **overrides) -> "SolveOptions":
        """Options from a config mapping; ``None`` overrides are ignored."""
        cfg = config.ACTIVE if cfg is None else cfg
        names = {f.name for f in fields(cls)}
        kw = {k: cfg[k] for k in names if k in cfg}
        kw.update({k: v for k, v in overrides.items() if v is not None})
        unknown = sorted(set(kw) - names)
        if unknown:
            raise InvalidOptions(f"unknown solver options: {', '.join(unknown)}")
        return cls(**kw)


def resolve_options(opts: Optional[SolveOptions]) -> SolveOptions:
    return opts if opts is not None else SolveOptions.from_config(tol_residual=config.TOL_RESIDUAL)


# ----------------------------
# Newton
# ----------------------------

def newton_solve(p: KWProblem, u0: FunctionLike, opts: Optional[SolveOptions] = None) -> Solution:
    """Root of F near ``u0``; raises NoConvergence at the iteration cap or when
    the Newton step at the end point is still larger than sqrt(tol).

    A singular Newton system falls back to a least-squares step; the count of
    such steps is reported as ``Solution.pinv_steps``.
    """
    opts = resolve_options(opts)
    g = p.graph
    lap = laplacian_matrix(g)
    mu = g.measure
    x = np.array(as_values(g, u0), dtype=np.float64)
    tol = opts.tol_residual
    pinv_steps = 0

    def merit(r: np.ndarray) -> float:
        return 0.5 * float(np.dot(mu, r * r))

    def step(x: np.ndarray, r: np.ndarray) -> Tuple[np.ndarray, bool]:
        jac = lap - np.diag(p.h * np.exp(x))
        try:
            d = np.linalg.solve(jac, -r)
            if np.all(np.isfinite(d)):
                return d, False
        except np.linalg.LinAlgError:
            pass
        d = np.linalg.lstsq(jac, -r, rcond=None)[0]
        return d, True

    r = residual_values(p, x, lap)
    it = 0
    while float(np.max(np.abs(r))) > tol:
        if it >= opts.max_iters:
            raise NoConvergence(
                f"Newton stopped after {it} iterations with residual {np.max(np.abs(r)):.3e}")
        it += 1
        d, used_pinv = step(x, r)
        if used_pinv:
            pinv_steps += 1
            log.debug("least-squares Newton step at iteration %d", it)
        jac_d = lap @ d - p.h * np.exp(x) * d
        slope = float(np.dot(mu * r, jac_d))
        m0 = merit(r)
        t = 1.0
        while True:
            try:
                xt = x + t * d
                rt = residual_values(p, xt, lap)
                mt = merit(rt)
                ok = mt <= m0 + opts.armijo * t * slope if slope < 0.0 else mt < m0
            except OverflowRisk:
                ok = False
            if ok:
                break
            t *= opts.damping
            if t < 1e-12:
                raise NoConvergence(f"line search stalled at iteration {it}")
        x, r = xt, rt

    # two polishing steps, kept only when they do not increase the residual
    for _ in range(2):
        d, _pinv = step(x, r)
        try:
            rt = residual_values(p, x + d, lap)
        except OverflowRisk:
            break
        if np.max(np.abs(rt)) > np.max(np.abs(r)):
            break
        x, r = x + d, rt

    # a small residual alone is not a root: where h e^u underflows toward 0
    # F is tiny on near-constant u far below any solution
    d, _pinv = step(x, r)
    if float(np.max(np.abs(d))) > math.sqrt(tol):
        raise NoConvergence(
            f"residual {np.max(np.abs(r)):.3e} but Newton step {np.max(np.abs(d)):.3e} at the end point")

    sol = describe_solution(p, x, iterations=it, pinv_steps=pinv_steps)
    if sol.residual_linf > tol:
        raise NoConvergence(f"final residual {sol.residual_linf:.3e} above {tol:g}")
    return sol


# ----------------------------
# multistart enumeration
# ----------------------------

def default_radius(p: KWProblem) -> float:
    """2 + the largest |ln| of the problem scales (|c̃|, max|h|, max|f|, 1)."""
    scales = [abs(p.rhs_mean), float(np.max(np.abs(p.h))), 1.0]
    if p.f is not None:
        scales.append(float(np.max(np.abs(p.f))))
    return 2.0 + max(abs(math.log(s)) for s in scales if s > 0.0)


def start_points(p: KWProblem, opts: SolveOptions) -> List[np.ndarray]:
    """Scrambled Halton points in [-R, R]^n plus two constant anchors."""
    n = p.graph.n
    radius = opts.start_box_radius or default_radius(p)
    sampler = qmc.Halton(d=n, scramble=True, seed=np.random.default_rng(opts.rng_seed))
    pts = radius * (2.0 * sampler.random(opts.n_starts) - 1.0)
    anchors = [np.zeros(n)]
    hmax = float(np.max(np.abs(p.h)))
    if hmax > 0.0 and p.rhs_mean != 0.0:
        anchors.append(np.full(n, math.log(abs(p.rhs_mean) / hmax)))
    return anchors + [row for row in pts]


def _dedupe(sols: Sequence[Optional[Solution]], distance: float) -> List[Solution]:
    kept: List[Solution] = []
    for s in sols:
        if s is None:
            continue
        if all(float(np.max(np.abs(s.values - k.values))) > distance for k in kept):
            kept.append(s)
    kept.sort(key=lambda s: tuple(s.values))
    return kept


def enumerate_solutions(p: KWProblem, opts: Optional[SolveOptions] = None,
                        progress_cb=None, cancel_ev=None) -> List[Solution]:
    """Distinct roots from a seeded multistart, sorted lexicographically."""
    opts = resolve_options(opts)

    def run(x0: np.ndarray) -> Optional[Solution]:
        try:
            return newton_solve(p, x0, opts)
        except KWError:
            return None

    found = map_ordered(run, start_points(p, opts), progress_cb=progress_cb, cancel_ev=cancel_ev)
    return _dedupe(found, opts.dedupe_distance)


def enumerate_escalating(p: KWProblem, opts: Optional[SolveOptions] = None) -> Tuple[List[Solution], float]:
    """Double the start radius until two consecutive rounds agree on the root count."""
    opts = resolve_options(opts)
    radius = opts.start_box_radius or default_radius(p)
    sols = enumerate_solutions(p, replace(opts, start_box_radius=radius))
    for _ in range(opts.escalate):
        wider = radius * 2.0
        more = enumerate_solutions(p, replace(opts, start_box_radius=wider))
        log.info("radius %.4g -> %.4g: %d -> %d roots", radius, wider, len(sols), len(more))
        radius = wider
        if len(more) == len(sols):
            return more, radius
        sols = more
    return sols, radius


# ----------------------------
# sub- and super-solutions
# ----------------------------

class SubSuperKind(str, Enum):
    SUB = "sub"
    SUPER = "super"
    SOLUTION = "solution"
    NEITHER = "neither"


class SubSuperCheck(NamedTuple):
    kind: SubSuperKind
    slack: VertexFunction


def check_sub_super(p: KWProblem, w: FunctionLike, tol: Optional[float] = None) -> SubSuperCheck:
    """Sign of slack = Δw + h eʷ - f at every vertex."""
    tol = config.TOL_RESIDUAL if tol is None else tol
    x = as_values(p.graph, w)
    slack = -residual_values(p, x)
    if float(np.max(np.abs(slack))) <= tol:
        kind = SubSuperKind.SOLUTION
    elif np.all(slack >= -tol):
        kind = SubSuperKind.SUB
    elif np.all(slack <= tol):
        kind = SubSuperKind.SUPER
    else:
        kind = SubSuperKind.NEITHER
    return SubSuperCheck(kind, VertexFunction(p.graph, slack))


@dataclass(frozen=True, eq=False)
class SubSuperPair:
    phi: VertexFunction
    psi: VertexFunction

    def __post_init__(self):
        if self.phi.graph.vertices != self.psi.graph.vertices:
            raise OrderingError("phi and psi live on different graphs")
        gap = self.psi.values - self.phi.values
        if np.any(gap < 0.0):
            bad = [self.phi.graph.vertices[i] for i in np.flatnonzero(gap < 0.0)]
            raise OrderingError(f"phi > psi at {bad}")

    @classmethod
    def of(cls, g: WeightedGraph, phi: FunctionLike, psi: FunctionLike) -> "SubSuperPair":
        return cls(VertexFunction(g, as_values(g, phi)), VertexFunction(g, as_values(g, psi)))


def constrained_minimize(p: KWProblem, pair: SubSuperPair, opts: Optional[SolveOptions] = None,
                         max_steps: int = 20000) -> Solution:
    """Minimizer of J over {φ <= u <= ψ}, which solves the equation.

    Projected gradient with Barzilai-Borwein steps from ψ, then a Newton
    polish that must stay inside the box.
    """
    opts = resolve_options(opts)
    g = p.graph
    lo = as_values(g, pair.phi)
    hi = as_values(g, pair.psi)
    if check_sub_super(p, lo).kind not in (SubSuperKind.SUB, SubSuperKind.SOLUTION):
        raise NotSubSolution("phi is not a sub-solution")
    if check_sub_super(p, hi).kind not in (SubSuperKind.SUPER, SubSuperKind.SOLUTION):
        raise NotSuperSolution("psi is not a super-solution")

    lap = laplacian_matrix(g)
    mu = g.measure
    # the L²(μ) gradient of J is F
    x = hi.copy()
    r = residual_values(p, x, lap)
    e = energy(p, x)
    alpha = 1.0 / (float(np.max(np.diag(lap))) + float(np.max(np.abs(p.h) * np.exp(x))) + 1.0)
    pg_tol = max(opts.tol_residual, 1e-9)
    for _ in range(max_steps):
        pg = x - np.clip(x - r, lo, hi)
        if float(np.max(np.abs(pg))) <= pg_tol:
            break
        t = alpha
        while True:
            xn = np.clip(x - t * r, lo, hi)
            en = energy(p, xn)
            if en <= e + opts.armijo * float(np.dot(mu * r, xn - x)) or t < 1e-14:
                break
            t *= 0.5
        rn = residual_values(p, xn, lap)
        s, y = xn - x, rn - r
        sy = float(np.dot(mu * s, y))
        alpha = float(np.dot(mu * s, s)) / sy if sy > 0.0 else 1.0
        alpha = min(max(alpha, 1e-10), 1e10)
        x, r, e = xn, rn, en

    try:
        sol = newton_solve(p, x, opts)
        xs = sol.values
        if np.all(xs >= lo - BOX_EPS) and np.all(xs <= hi + BOX_EPS):
            return sol
        log.debug("Newton polish left the box; keeping the projected-gradient point")
    except KWError:
        pass
    sol = describe_solution(p, x)
    if sol.residual_linf > opts.tol_residual:
        raise NoConvergence(f"box minimization ended with residual {sol.residual_linf:.3e}")
    return sol


# ----------------------------
# negative regime
# ----------------------------

def a_grid(cfg: Optional[Dict[str, Any]] = None) -> np.ndarray:
    cfg = config.ACTIVE if cfg is None else cfg
    return np.geomspace(float(cfg["a_grid_min"]), float(cfg["a_grid_max"]), int(cfg["a_grid_points"]))


def affine_supersolutions(g: WeightedGraph, h: FunctionLike,
                          grid: Optional[Sequence[float]] = None) -> List[Tuple[float, np.ndarray, float]]:
    """(a, a v + ln a, c_range) over the a-grid, where -Δv = h - mean h.

    a v + ln a is a super-solution for every c in [-c_range, 0); only grid
    points with c_range > 0 are returned.
    """
    hx = as_values(g, h)
    v = -solve_poisson(g, hx, "mean_zero").values
    lap = laplacian_matrix(g)
    out = []
    for a in (a_grid() if grid is None else grid):
        u = a * v + math.log(a)
        c_range = -float(np.max(-(lap @ u) + hx * np.exp(u)))
        if c_range > 0.0:
            out.append((float(a), u, c_range))
    return out


def lower_barrier(p: KWProblem, psi: np.ndarray) -> np.ndarray:
    """-A with h e^{-A} >= c everywhere and -A below ψ."""
    neg = float(np.max(np.maximum(-p.h, 0.0)))
    a = 1.0
    if neg > 0.0:
        a = max(a, math.log(neg / abs(p.c)) + 1.0)
    a = max(a, -float(np.min(psi)) + 1.0)
    return np.full(p.graph.n, -a)


def solve_negative_via_supersolution(p: KWProblem, opts: Optional[SolveOptions] = None,
                                     hints: Sequence[FunctionLike] = ()) -> Solution:
    """Solution for c < 0 from the sub-solution -A and a constructed super-solution.

    Super-solution candidates, in order: a v + ln a on the a-grid, each of
    ``hints`` (typically solutions at a more negative c), then a root found
    by multistart at c itself.
    """
    opts = resolve_options(opts)
    if not p.is_scalar or not (p.c < 0.0):
        raise PreconditionViolated("needs a scalar right-hand side c < 0")
    g = p.graph
    attempts: List[str] = []
    psi: Optional[np.ndarray] = None
    ok = (SubSuperKind.SUPER, SubSuperKind.SOLUTION)

    cands = affine_supersolutions(g, p.h)
    for a, u, c_range in cands:
        if c_range >= abs(p.c) and check_sub_super(p, u).kind in ok:
            psi = u
            log.debug("affine super-solution with a=%.4g (c_range %.4g)", a, c_range)
            break
    if psi is None:
        best = max((cr for _, _, cr in cands), default=0.0)
        attempts.append(f"a v + ln a: valid only for |c| <= {best:.6g}")

    if psi is None:
        for i, hint in enumerate(hints):
            x = np.asarray(as_values(g, hint), dtype=np.float64)
            kind = check_sub_super(p, x).kind
            if kind in ok:
                psi = x
                break
            attempts.append(f"hint {i}: {kind.value}")

    if psi is None:
        roots = enumerate_solutions(p, opts)
        if roots:
            psi = roots[-1].values
        else:
            attempts.append("multistart at c: no roots")

    if psi is None:
        raise NoSupersolutionFound(
            f"no super-solution for c = {p.c:g}: " + "; ".join(attempts), attempts=attempts)
    pair = SubSuperPair.of(g, lower_barrier(p, psi), psi)
    return constrained_minimize(p, pair, opts)
