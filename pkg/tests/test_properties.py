"""Property-based runs of the invariant checks on arbitrary patterns."""
import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from avgctrl.generate import random_pattern
from avgctrl.graph import PatternError, decide_structural_avg_ctrl, validate_pattern
from avgctrl.simulator import discretize
from avgctrl.verification import cross_validate, oracle_sample

from invariants import check_all, check_graph


@st.composite
def patterns(draw, n_max=7):
    n = draw(st.integers(1, n_max))
    pairs = [(u, v) for u in range(n + 1) for v in range(1, n + 1)]
    edges = draw(st.sets(st.sampled_from(pairs), min_size=1))
    try:
        return validate_pattern(edges, n)
    except PatternError:
        return None


SETTINGS = settings(max_examples=150, deadline=None,
                    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])


@SETTINGS
@given(patterns())
def test_pipeline_invariants(g):
    if g is not None:
        check_all(g)


@SETTINGS
@given(st.integers(1, 8), st.integers(0, 10 ** 6))
def test_planted_qualifying(n, seed):
    assert check_all(random_pattern(n, True, seed))


@SETTINGS
@given(st.integers(2, 8), st.integers(0, 10 ** 6))
def test_planted_failing(n, seed):
    assert not check_graph(random_pattern(n, False, seed)).verdict


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10 ** 6))
def test_necessity_on_failing_patterns(n, seed):
    g = random_pattern(n, False, seed)
    rep = cross_validate(g, 5, degree=seed % 3, seed=seed)
    assert rep.full_rank_count == 0 and rep.agreement


@settings(max_examples=25, deadline=None)
@given(patterns(5), st.integers(0, 1000), st.integers(1, 12))
def test_discretization_invariants(g, seed, N):
    if g is None:
        return
    pe = oracle_sample(g, 2, seed)
    de = discretize(pe, N)
    assert (de.weights > 0).all() and abs(de.weights.sum() - 1) < 1e-12
    allowed = np.zeros((g.n, g.n), bool)
    for i, j in pe.a:
        allowed[i - 1, j - 1] = True
    assert not de.A[:, ~allowed].any()
    assert decide_structural_avg_ctrl(pe.pattern()).verdict == decide_structural_avg_ctrl(g).verdict
