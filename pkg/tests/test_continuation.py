from dataclasses import replace

import numpy as np
import pytest

from kw_graph.continuation import (
    BranchRow,
    BranchTable,
    branch_scan,
    build_supersolution_small_c,
    estimate_c_h,
    estimate_lambda_star,
    heuristic_c_h_bound,
    lambda_family_supersolution,
    strict_local_minimum,
    xi_certificate,
)
from kw_graph.exceptions import PreconditionViolated
from kw_graph.model import KWProblem, Stability
from kw_graph.solve import SubSuperKind, check_sub_super, enumerate_solutions


def test_supersolution_small_c(k2):
    sup = build_supersolution_small_c(k2, [1.0, -2.0])
    assert sup is not None
    assert sup.c_range >= 0.01
    p = KWProblem.scalar(k2, [1.0, -2.0], -0.01)
    assert check_sub_super(p, sup.u).kind is SubSuperKind.SUPER


def test_supersolution_constant_h(k2):
    sup = build_supersolution_small_c(k2, [-1.0, -1.0])
    assert sup is not None and sup.c_range > 0.0
    assert np.ptp(sup.u.values) == pytest.approx(0.0, abs=1e-12)


def test_supersolution_needs_negative_mass(k2):
    with pytest.raises(PreconditionViolated):
        build_supersolution_small_c(k2, [1.0, -0.5])


def test_xi_certificate_constant_boundary(k2):
    cert = xi_certificate(k2, [-1.0, -1.0], -1.0, [0.0, 0.0])
    assert np.allclose(cert.xi, [1.0, 1.0])
    assert cert.boundary and cert.margin == 0.0 and cert.ok


def test_xi_certificate_at_roots(k2, opts):
    p = KWProblem.scalar(k2, [1.0, -2.0], -0.03)
    sols = enumerate_solutions(p, opts)
    assert len(sols) == 2
    for s in sols:
        cert = xi_certificate(k2, [1.0, -2.0], -0.03, s)
        assert cert.ok and cert.margin > 0.0


def test_xi_certificate_needs_negative_c(k2):
    with pytest.raises(PreconditionViolated):
        xi_certificate(k2, [1.0, -2.0], 0.0, [0.0, 0.0])


def test_heuristic_bound_is_negative(k2):
    assert heuristic_c_h_bound(k2, [1.0, -2.0]) < 0.0


def test_estimate_c_h(k2, opts):
    br = estimate_c_h(k2, [1.0, -2.0], opts, bracket_tol=1e-2)
    assert br.parameter == "c"
    assert br.width <= 1e-2
    # c_h is about -0.0595
    assert -0.075 < br.lower < br.upper < -0.045
    assert br.evidence["lower_count"] == 0
    assert br.evidence["upper_count"] >= 1
    assert br.evidence["lower_recheck_count"] == 0


def test_estimate_c_h_needs_sign_change(k2, opts):
    with pytest.raises(PreconditionViolated):
        estimate_c_h(k2, [-1.0, -2.0], opts)


def test_lambda_family_supersolution(k2, opts):
    psi, lam0 = lambda_family_supersolution(k2, [0.0, -1.0], -1.0, opts)
    assert np.allclose(psi.values, [3.386, 1.386], atol=5e-3)
    assert lam0 == pytest.approx(0.034, abs=2e-3)


def test_estimate_lambda_star(k2, opts):
    # the second root near λ = 0 sits far out at the vertex where K = 0
    br, table = estimate_lambda_star(k2, [0.0, -1.0], -1.0, replace(opts, escalate=2), bracket_tol=1e-2)
    assert 0.0 < br.lower < br.upper < 1.0
    assert br.width <= 1e-2
    counts = {r.parameter: r.count for r in table.rows}
    assert counts[-0.5] == 1
    assert counts[2.0] == 0
    assert br.evidence["monotone"]
    inside = [r.count for r in table.rows if 0.0 < r.parameter < br.lower]
    assert any(c >= 2 for c in inside)
    stab = [r.stabilities for r in table.rows if r.parameter == -0.5][0]
    assert stab == (Stability.STRICTLY_STABLE.value,)


def test_estimate_lambda_star_preconditions(k2, opts):
    with pytest.raises(PreconditionViolated):
        estimate_lambda_star(k2, [1.0, -1.0], -1.0, opts)
    with pytest.raises(PreconditionViolated):
        estimate_lambda_star(k2, [0.0, -1.0], 1.0, opts)


def test_branch_scan(k2, opts):
    table = branch_scan(k2, [1.0, -2.0], [-0.3, -0.1, -0.03, -0.01], opts)
    assert table.counts() == [0, 0, 2, 2]
    stable = [s for s in table.rows[2].stabilities if s != Stability.UNSTABLE.value]
    assert len(stable) == 1
    assert branch_scan(k2, [-1.0, -2.0], [-1.0, -0.5, -0.1], opts).counts() == [1, 1, 1]
    assert branch_scan(k2, [1.0, -2.0], [], opts).rows == []
    with pytest.raises(PreconditionViolated):
        branch_scan(k2, [1.0, -2.0], [-0.01, -0.3], opts)


def test_branch_table_csv():
    table = BranchTable(rows=[
        BranchRow(parameter=-0.5, count=1, stabilities=("strictly_stable",), min_residual=1e-12, max_abs_u=0.5),
        BranchRow(parameter=2.0, count=0, stabilities=(), min_residual=float("nan"), max_abs_u=0.0),
    ])
    lines = table.to_csv().splitlines()
    assert lines[0] == "parameter,count,stabilities,min_residual"
    assert lines[1].startswith("-0.5,1,strictly_stable,")
    assert lines[2] == "2,0,,"
    assert table.envelope == pytest.approx(0.5)


def test_strict_local_minimum(k2, opts):
    upper = enumerate_solutions(KWProblem.scalar(k2, [1.0, -2.0], -0.05), opts)[-1]
    sol = strict_local_minimum(KWProblem.scalar(k2, [1.0, -2.0], -0.03), upper, opts)
    assert sol.residual_linf <= opts.tol_residual
    assert sol.stability in (Stability.STABLE, Stability.STRICTLY_STABLE)
    assert sol.jac_det_sign == 1
