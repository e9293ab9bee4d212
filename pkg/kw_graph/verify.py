# -*- coding: utf-8 -*-
"""
kw_graph.verify
Randomized and closed-form self-checks. Every suite is deterministic for a
given seed and reports pass / fail / degenerate counts (no timings).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np

from .continuation import estimate_c_h, estimate_lambda_star, scan_problems
from .degree import degree_numeric, degree_reduction_consistency, determinant_identity_defect, schur_reduce
from .graph import (
    WeightedGraph,
    build_graph,
    elliptic_constant,
    green_defect,
    integrate,
    kato_defect,
    laplacian_apply,
)
from .model import KWProblem, Stability, energy, jacobian, minimal_class_A, residual_values
from .parallel import map_ordered
from .solve import SolveOptions, default_radius, enumerate_solutions, resolve_options

log = logging.getLogger(__name__)

REGIMES = ("positive", "flat", "negative")
# degree_theorem fails when more than this share of cases is degenerate
DEGENERATE_SHARE = 0.05
RELABEL_EVERY = 5


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    degenerate: int = 0
    failures: List[str] = field(default_factory=list)
    # largest share of degenerate cases the suite tolerates
    max_degenerate: float = 1.0
    by_regime: Dict[str, Dict[str, int]] = field(default_factory=dict)

    def check(self, cond: bool, msg: str, regime: Optional[str] = None) -> None:
        if cond:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append(msg)
        if regime is not None:
            self._tally(regime, "passed" if cond else "failed")

    def skip_degenerate(self, regime: Optional[str] = None) -> None:
        self.degenerate += 1
        if regime is not None:
            self._tally(regime, "degenerate")

    def _tally(self, regime: str, key: str) -> None:
        row = self.by_regime.setdefault(regime, {"passed": 0, "failed": 0, "degenerate": 0})
        row[key] += 1

    @property
    def total(self) -> int:
        return self.passed + self.failed + self.degenerate

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.degenerate <= self.max_degenerate * self.total

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "passed": self.passed,
            "failed": self.failed,
            "degenerate": self.degenerate,
            "ok": self.ok,
            "failures": list(self.failures),
        }
        if self.by_regime:
            out["by_regime"] = {k: dict(v) for k, v in self.by_regime.items()}
        return out


# ----------------------------
# fixtures
# ----------------------------

def k2(weight: float = 1.0) -> WeightedGraph:
    return build_graph(["a", "b"], [("a", "b", weight)])


def p3() -> WeightedGraph:
    return build_graph(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 1.0)])


def random_graph(rng: np.random.Generator, n: int, unit_measure: bool = True,
                 extra: float = 0.35) -> WeightedGraph:
    """Random spanning tree plus extra edges, weights in [0.5, 2]."""
    verts = [f"v{i}" for i in range(n)]
    edges, pairs = [], set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((verts[j], verts[i], float(rng.uniform(0.5, 2.0))))
        pairs.add((j, i))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in pairs and rng.random() < extra:
                edges.append((verts[i], verts[j], float(rng.uniform(0.5, 2.0))))
    mu = None if unit_measure else rng.uniform(0.5, 2.0, n)
    return build_graph(verts, edges, mu)


def sample_problem(rng: np.random.Generator, g: WeightedGraph, regime: str) -> KWProblem:
    """Scalar problem meeting the regime conditions on a μ ≡ 1 graph."""
    n = g.n
    if regime == "positive":
        h = rng.uniform(-2.0, 2.0, n)
        h[int(rng.integers(n))] = rng.uniform(0.2, 2.0)
        return KWProblem.scalar(g, h, float(rng.uniform(0.05, 1.0)))
    if regime == "flat":
        neg = -rng.uniform(0.5, 2.0, n - 1)
        pos = rng.uniform(0.1, 0.9) * -neg.sum()
        return KWProblem.scalar(g, rng.permutation(np.concatenate([[pos], neg])), 0.0)
    c = -float(rng.uniform(0.1, 1.0))
    if rng.random() < 0.5:
        return KWProblem.scalar(g, -rng.uniform(0.1, 2.0, n), c)
    h = rng.uniform(-2.0, 2.0, n)
    h[int(np.argmin(h))] = -rng.uniform(0.5, 2.0)
    h[int(np.argmax(h))] = rng.uniform(0.1, 2.0)
    return KWProblem.scalar(g, h, c)


# ----------------------------
# suites
# ----------------------------

def degree_theorem(seed: int = 0, n_cases: int = 200, opts: Optional[SolveOptions] = None) -> SuiteResult:
    """Numeric degree against the exact one on random graphs with |V| in 2..6."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("degree_theorem", max_degenerate=DEGENERATE_SHARE)
    cases = []
    for k in range(n_cases):
        regime = REGIMES[k % 3]
        g = random_graph(rng, int(rng.integers(2, 7)))
        cases.append((regime, sample_problem(rng, g, regime)))
    # every RELABEL_EVERY-th case is also solved with its vertices permuted
    perm_rng = np.random.default_rng(seed + 1)
    orders = [perm_rng.permutation(p.graph.n) if k % RELABEL_EVERY == 0 else None
              for k, (_, p) in enumerate(cases)]

    def run(k: int):
        p = cases[k][1]
        rep = degree_numeric(p, opts)
        if orders[k] is None or not rep.nondegenerate:
            return rep, rep.numeric_degree
        return rep, degree_numeric(p.relabel(orders[k]), opts).numeric_degree

    reports = map_ordered(run, range(len(cases)))
    for k, ((regime, p), (rep, relabeled)) in enumerate(zip(cases, reports)):
        if not rep.nondegenerate:
            res.skip_degenerate(regime)
            continue
        res.check(rep.match and relabeled == rep.numeric_degree,
                  f"case {k} ({regime}, n={p.graph.n}): numeric {rep.numeric_degree}, "
                  f"theoretical {rep.theoretical_degree}, relabeled {relabeled}", regime)
    if not res.ok and res.failed == 0:
        res.failures.append(f"{res.degenerate} of {res.total} cases degenerate")
    return res


def closed_form(opts: Optional[SolveOptions] = None) -> SuiteResult:
    res = SuiteResult("closed_form")
    g = k2()
    for eps in (1e-2, 1e-4):
        sols = enumerate_solutions(KWProblem.scalar(g, [1.0, 1.0], eps), opts)
        err = max((float(np.max(np.abs(s.values - math.log(eps)))) for s in sols), default=math.inf)
        res.check(len(sols) == 1 and err <= 1e-10, f"h≡1, c={eps:g}: {len(sols)} roots, error {err:.3e}")
    sols = enumerate_solutions(KWProblem.scalar(g, [-1.0, -1.0], -1.0), opts)
    err = max((float(np.max(np.abs(s.values))) for s in sols), default=math.inf)
    res.check(len(sols) == 1 and err <= 1e-12, f"h≡-1, c=-1: {len(sols)} roots, error {err:.3e}")
    p = KWProblem.scalar(g, [1.0, -2.0], 0.0)
    exact = np.array([math.log(math.log(2.0)), math.log(math.log(2.0) / 2.0)])
    rep = degree_numeric(p, opts)
    err = max((float(np.max(np.abs(s.values - exact))) for s in rep.solutions), default=math.inf)
    res.check(len(rep.solutions) == 1 and err <= 1e-10, f"h=(1,-2), c=0: error {err:.3e}")
    res.check(rep.numeric_degree == -1, f"h=(1,-2), c=0: numeric degree {rep.numeric_degree}")
    return res


def _p3_problem(rng: np.random.Generator, regime: str) -> KWProblem:
    ends = sample_problem(rng, k2(), regime)
    return KWProblem.scalar(p3(), [ends.h[0], 0.0, ends.h[1]], ends.c)


def schur(seed: int = 0, n_u: int = 100, n_degree: int = 20,
          opts: Optional[SolveOptions] = None) -> SuiteResult:
    """Determinant identity, rhs mass and degree consistency of the P3 reduction."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("schur")
    g = p3()
    for k in range(n_u):
        ends = rng.choice([-1.0, 1.0], 2) * rng.uniform(0.2, 2.0, 2)
        f = rng.uniform(-1.0, 1.0, 3)
        p = KWProblem.general(g, [ends[0], 0.0, ends[1]], f)
        red, _ = schur_reduce(p)
        u = rng.uniform(-2.0, 2.0, 3)
        defect = determinant_identity_defect(p, red, u)
        res.check(defect <= 1e-10, f"u #{k}: determinant identity defect {defect:.3e}")
        mass = abs(float(red.reduced_f.values.sum() - f.sum()))
        res.check(mass <= 1e-12, f"u #{k}: Σf̃ - Σf = {mass:.3e}")
        rows = float(np.max(np.abs(red.reduced_laplacian.sum(axis=1))))
        res.check(rows <= 1e-12 and bool(np.all(red.reduced_graph.weights >= 0.0)),
                  f"u #{k}: reduced row sums {rows:.3e}")
    cases = [_p3_problem(rng, REGIMES[k % 3]) for k in range(n_degree)]
    same = map_ordered(lambda p: degree_reduction_consistency(p, opts), cases)
    for k, ok in enumerate(same):
        res.check(ok, f"degree case {k}: original and reduced degrees differ")
    return res


def existence(seed: int = 0, n_seeds: int = 50, opts: Optional[SolveOptions] = None,
              bracket_tol: float = 1e-3) -> SuiteResult:
    opts = resolve_options(opts)
    res = SuiteResult("existence")
    g = k2()

    # h <= 0: one stable root for every seed
    p = KWProblem.scalar(g, [-1.0, -2.0], -1.0)
    for s in range(n_seeds):
        sols = enumerate_solutions(p, replace(opts, rng_seed=seed + s))
        stable = all(x.stability in (Stability.STABLE, Stability.STRICTLY_STABLE) for x in sols)
        res.check(len(sols) == 1 and stable, f"seed {seed + s}: {len(sols)} roots")

    # c_h bracket for h = (1, -2)
    br = estimate_c_h(g, [1.0, -2.0], opts, bracket_tol=bracket_tol)
    ev = br.evidence
    res.check(br.width <= bracket_tol, f"c_h bracket width {br.width:.3e}")
    res.check(ev["upper_count"] >= 2, f"c_h upper end {br.upper:.6g}: {ev['upper_count']} roots")
    res.check(ev["lower_recheck_count"] == 0, f"c_h lower end {br.lower:.6g} has roots on recheck")

    # λ* for K = (0, -1), κ ≡ -1
    br, table = estimate_lambda_star(g, [0.0, -1.0], -1.0, opts, bracket_tol=bracket_tol)
    res.check(0.0 < br.lower < br.upper < 1.0, f"λ* bracket [{br.lower:.6g}, {br.upper:.6g}]")
    counts = {r.parameter: r.count for r in table.rows}
    res.check(counts.get(-0.5) == 1, f"λ = -0.5: {counts.get(-0.5)} roots")
    res.check(counts.get(2.0) == 0, f"λ = 2: {counts.get(2.0)} roots")
    inside = [r.count for r in table.rows if 0.0 < r.parameter < br.lower]
    res.check(any(c >= 2 for c in inside), f"inside (0, λ*): counts {inside}")
    return res


def identities(seed: int = 0, n_cases: int = 1000) -> SuiteResult:
    """Green, mass, Kato, Jacobian, energy-gradient and elliptic-bound identities."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("identities")
    graphs = []
    for _ in range(max(1, n_cases // 10)):
        g = random_graph(rng, int(rng.integers(2, 7)), unit_measure=False)
        graphs.append((g, elliptic_constant(g)))
    eps = 1e-6
    for k in range(n_cases):
        g, C = graphs[k % len(graphs)]
        n = g.n
        u = rng.normal(0.0, 1.0, n)
        v = rng.normal(0.0, 1.0, n)
        wsum = float(g.weights.sum()) / float(g.measure.min())
        su = max(1.0, wsum * (1.0 + float(np.max(np.abs(u)))))
        sv = su * (1.0 + float(np.max(np.abs(v))))

        res.check(green_defect(g, u, v) <= 1e-12 * sv, f"case {k}: Green defect")
        lap = laplacian_apply(g, u).values
        res.check(abs(integrate(g, lap)) <= 1e-12 * su, f"case {k}: ∫Δu dμ = {integrate(g, lap):.3e}")
        res.check(float(kato_defect(g, u).values.min()) >= -1e-12 * su, f"case {k}: Kato defect")

        p = KWProblem.scalar(g, rng.uniform(-2.0, 2.0, n), float(rng.uniform(-1.0, 1.0)))
        jac = jacobian(p, u)
        fd = np.empty_like(jac)
        for j in range(n):
            e = np.zeros(n)
            e[j] = eps
            fd[:, j] = (residual_values(p, u + e) - residual_values(p, u - e)) / (2.0 * eps)
        rel = float(np.max(np.abs(jac - fd))) / max(1.0, float(np.max(np.abs(jac))))
        res.check(rel <= 1e-6, f"case {k}: Jacobian vs differences {rel:.3e}")

        exact = integrate(g, residual_values(p, u) * v)
        approx = (energy(p, u + eps * v) - energy(p, u - eps * v)) / (2.0 * eps)
        rel = abs(approx - exact) / max(1.0, abs(exact))
        res.check(rel <= 1e-6, f"case {k}: energy derivative {rel:.3e}")

        osc = float(u.max() - u.min())
        res.check(osc <= C * float(np.max(np.abs(lap))) + 1e-10, f"case {k}: osc {osc:.6g} above C‖Δu‖")
    return res


def boundedness(n_points: int = 20, opts: Optional[SolveOptions] = None) -> SuiteResult:
    """Root envelope over h = (1+t, -2+t), c = 0, t in [-0.2, 0.2], under refinement."""
    opts = resolve_options(opts)
    res = SuiteResult("boundedness")
    g = k2()

    def family(m: int):
        ts = [float(t) for t in np.linspace(-0.2, 0.2, m)]
        return ts, [KWProblem.scalar(g, [1.0 + t, -2.0 + t], 0.0) for t in ts]

    ts, probs = family(n_points)
    a = max(minimal_class_A(q) for q in probs)
    res.check(math.isfinite(a), "grid has no common class-A bound")
    coarse = scan_problems(probs, ts, opts)
    ts2, probs2 = family(2 * n_points - 1)
    radius = 2.0 * max(default_radius(q) for q in probs2)
    fine = scan_problems(probs2, ts2, replace(opts, start_box_radius=radius))
    e1, e2 = coarse.envelope, fine.envelope
    res.check(e1 > 0.0 and abs(e2 - e1) <= 0.01 * e1, f"envelope {e1:.6g} -> {e2:.6g}")
    return res


def run_all(seed: int = 0, scale: float = 1.0, opts: Optional[SolveOptions] = None) -> dict:
    """All suites at ``scale`` times the full randomized sizes."""
    opts = resolve_options(opts)

    def size(full: int, floor: int = 1) -> int:
        return max(floor, int(round(full * scale)))

    suites: Dict[str, Callable[[], SuiteResult]] = {
        "degree_theorem": lambda: degree_theorem(seed, size(200), opts),
        "closed_form": lambda: closed_form(opts),
        "schur": lambda: schur(seed, size(100), size(20), opts),
        "existence": lambda: existence(seed, size(50), opts),
        "identities": lambda: identities(seed, size(1000)),
        "boundedness": lambda: boundedness(size(20, floor=3), opts),
    }
    results: List[SuiteResult] = []
    for name, run in suites.items():
        r = run()
        log.info("%s: %d passed, %d failed, %d degenerate", name, r.passed, r.failed, r.degenerate)
        results.append(r)
    return {
        "seed": seed,
        "scale": scale,
        "suites": [r.to_dict() for r in results],
        "ok": all(r.ok for r in results),
    }
