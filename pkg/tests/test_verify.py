import numpy as np

from kw_graph import verify
from kw_graph.model import RegimeTag, classify_regime


def test_random_graph_is_connected():
    rng = np.random.default_rng(0)
    for n in range(2, 7):
        g = verify.random_graph(rng, n, unit_measure=False)
        assert g.n == n and g.is_connected()


def test_sample_problems_meet_regime():
    rng = np.random.default_rng(1)
    tags = {"positive": RegimeTag.POSITIVE, "flat": RegimeTag.FLAT, "negative": RegimeTag.NEGATIVE}
    for regime, tag in tags.items():
        for _ in range(10):
            p = verify.sample_problem(rng, verify.random_graph(rng, 4), regime)
            r = classify_regime(p)
            assert r.tag is tag and r.conditions_hold


def test_closed_form(opts):
    res = verify.closed_form(opts)
    assert res.ok, res.failures


def test_identities_small():
    res = verify.identities(seed=2, n_cases=40)
    assert res.ok, res.failures
    assert res.passed == 40 * 6


def test_schur_small(opts):
    res = verify.schur(seed=3, n_u=10, n_degree=3, opts=opts)
    assert res.ok, res.failures


def test_degree_theorem_counts_every_case(opts):
    res = verify.degree_theorem(seed=4, n_cases=6, opts=opts)
    assert res.passed + res.failed + res.degenerate == 6
    assert res.to_dict()["ok"] == (res.failed == 0 and res.degenerate <= 0.05 * 6)


def test_suite_limits_degenerate_share():
    res = verify.SuiteResult("x", passed=19, degenerate=1, max_degenerate=0.05)
    assert res.ok
    res.skip_degenerate("flat")
    assert not res.ok
    assert res.to_dict()["by_regime"] == {"flat": {"passed": 0, "failed": 0, "degenerate": 1}}


def test_degree_theorem_flat_cases_are_nondegenerate(opts):
    res = verify.degree_theorem(seed=0, n_cases=9, opts=opts)
    assert res.by_regime["flat"]["degenerate"] == 0
    assert sum(res.by_regime["flat"].values()) == 3
