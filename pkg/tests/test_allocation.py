import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ecplan.allocation import (default_pro_rata_key, fixed_ratio_key, is_feasible_key,
                               priority_key, project_key, residual_load, surplus)
from oracles import brute_force_projection

G5 = [5.0]
L64 = [[6.0, 4.0]]


def test_feasible_key_example():
    ok, violations = is_feasible_key([[3.0, 2.0]], G5, L64)
    assert ok and violations == []


def test_row_sum_violation():
    ok, violations = is_feasible_key([[4.0, 2.0]], G5, L64)
    assert not ok
    assert [v.kind for v in violations] == ["row-sum"]
    assert violations[0].amount == pytest.approx(1.0)


def test_bound_violations_at_both_entries():
    ok, violations = is_feasible_key([[7.0, -2.0]], G5, L64)
    assert not ok
    kinds = {(v.member, v.kind) for v in violations}
    assert {(0, "above-load"), (1, "negative")} <= kinds


def test_nan_is_never_feasible():
    assert not is_feasible_key([[np.nan, 2.0]], G5, L64)[0]


@pytest.mark.parametrize("g, L, expected", [
    (5, [6, 4], [3, 2]),
    (20, [6, 4], [6, 4]),
    (5, [0, 0], [0, 0]),
])
def test_pro_rata_examples(g, L, expected):
    assert default_pro_rata_key([g], [L]).tolist() == [expected]


@pytest.mark.parametrize("g, order, expected", [
    (5, [1, 0], [1, 4]),
    (5, [0, 1], [5, 0]),
    (0, [1, 0], [0, 0]),
    (0, [0, 1], [0, 0]),
])
def test_priority_examples(g, order, expected):
    assert priority_key([g], L64, order).tolist() == [expected]


def test_priority_rejects_non_permutation():
    with pytest.raises(ValueError, match="permutation"):
        priority_key(G5, L64, [0, 0])


@pytest.mark.parametrize("g, L, w, expected", [
    (6, [10, 10], [1, 2], [2, 4]),
    (6, [1, 10], [1, 1], [1, 5]),
    (3, [2, 5], [1, 0], [2, 1]),
])
def test_fixed_ratio_examples(g, L, w, expected):
    assert fixed_ratio_key([g], [L], w) == pytest.approx(np.array([expected]), abs=1e-12)


def test_fixed_ratio_rejects_bad_weights():
    with pytest.raises(ValueError):
        fixed_ratio_key(G5, L64, [0, 0])
    with pytest.raises(ValueError):
        fixed_ratio_key(G5, L64, [1, -1])


def test_projection_examples():
    assert project_key([[3.0, 2.0]], G5, L64).tolist() == [[3.0, 2.0]]
    # [5, 5] lies on the symmetric axis, so its nearest point splits evenly
    assert project_key([[5.0, 5.0]], G5, L64) == pytest.approx(np.array([[2.5, 2.5]]))
    assert project_key([[0.0, 0.0]], G5, L64) == pytest.approx(np.array([[2.5, 2.5]]))


@pytest.mark.parametrize("proposal", [[5.0, 5.0], [0.0, 0.0], [9.0, -3.0], [1.0, 1.0]])
def test_projection_matches_grid_search(proposal):
    ref = brute_force_projection(proposal, [6.0, 4.0], 5.0)
    assert np.max(np.abs(project_key([proposal], G5, L64)[0] - ref)) <= 2e-3


def test_residual_load_examples():
    assert residual_load(L64, [[3.0, 2.0]]).tolist() == [[3.0, 2.0]]
    assert not residual_load(L64, L64).any()
    assert residual_load(L64, [[0.0, 0.0]]).tolist() == L64


def test_residual_load_rejects_out_of_bounds_key():
    with pytest.raises(ValueError):
        residual_load(L64, [[7.0, 0.0]])


def test_surplus():
    assert surplus([5.0, 20.0], [[6.0, 4.0], [6.0, 4.0]]).tolist() == [0.0, 10.0]


# -- properties -----------------------------------------------------------------

@st.composite
def instances(draw):
    T = draw(st.integers(1, 8))
    N = draw(st.integers(1, 6))
    L = draw(arrays(float, (T, N), elements=st.floats(0, 50)))
    g = draw(arrays(float, (T,), elements=st.floats(0, 400)))
    return g, L


def every_rule(g, L):
    N = L.shape[1]
    return [
        default_pro_rata_key(g, L),
        priority_key(g, L, list(reversed(range(N)))),
        fixed_ratio_key(g, L, np.arange(1, N + 1)),
        project_key(np.full(L.shape, 7.0), g, L),
    ]


@settings(max_examples=200)
@given(instances())
def test_every_rule_is_feasible(inst):
    g, L = inst
    for G in every_rule(g, L):
        assert is_feasible_key(G, g, L, tol=1e-9)[0]
        assert np.all(G.sum(axis=0) <= L.sum(axis=0) + 1e-9)


@given(instances())
def test_zero_generation_gives_zero_key(inst):
    _, L = inst
    g = np.zeros(L.shape[0])
    for G in every_rule(g, L):
        assert not G.any()


@given(instances())
def test_pro_rata_returns_load_when_generation_covers_it(inst):
    _, L = inst
    assert np.array_equal(default_pro_rata_key(L.sum(axis=1) + 1.0, L), L)


@given(instances(), st.floats(-20, 80))
def test_projection_is_idempotent(inst, fill):
    g, L = inst
    once = project_key(np.full(L.shape, fill), g, L)
    assert np.array_equal(project_key(once, g, L), once)
