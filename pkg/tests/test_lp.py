import numpy as np
import pytest
from scipy.optimize import linprog as highs

from ecplan.lp import InfeasibleLP, UnboundedLP, linprog


def test_small_lp():
    # max x + y s.t. x + 2y <= 4, 3x + y <= 6
    res = linprog([-1, -1], A_ub=[[1, 2], [3, 1]], b_ub=[4, 6])
    assert res.x == pytest.approx([1.6, 1.2])
    assert res.fun == pytest.approx(-2.8)


def test_upper_bounds_and_equalities():
    res = linprog([1, 2, 3], A_eq=[[1, 1, 1]], b_eq=[5], upper=[2, 2, 10])
    assert res.x == pytest.approx([2, 2, 1])


def test_infeasible():
    with pytest.raises(InfeasibleLP):
        linprog([1, 1], A_eq=[[1, 1]], b_eq=[5], upper=[1, 1])


def test_unbounded():
    with pytest.raises(UnboundedLP):
        linprog([-1, 0], A_ub=[[0, 1]], b_ub=[1])


def test_tiebreak_picks_the_cheapest_optimum():
    # every split of x + y = 2 costs the same; the tie-break prefers y
    res = linprog([1, 1], A_eq=[[1, 1]], b_eq=[2], upper=[5, 5], tiebreak=[1, 0])
    assert res.x == pytest.approx([0, 2])
    assert res.fun == pytest.approx(2)


def test_degenerate_problem_terminates():
    # Beale's cycling example
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    res = linprog(c, A_ub=A, b_ub=[0, 0, 1])
    assert res.fun == pytest.approx(-0.05)


@pytest.mark.parametrize("seed", range(60))
def test_matches_highs_on_random_problems(seed):
    rng = np.random.default_rng(seed)
    n, m_ub, m_eq = int(rng.integers(2, 9)), int(rng.integers(0, 6)), int(rng.integers(0, 3))
    c = rng.normal(size=n)
    A_ub = rng.normal(size=(m_ub, n))
    b_ub = rng.uniform(0, 5, m_ub)
    A_eq = rng.normal(size=(m_eq, n))
    x0 = rng.uniform(0, 2, n)
    b_eq = A_eq @ x0
    upper = np.where(rng.random(n) < 0.7, rng.uniform(2, 4, n), np.inf)
    ref = highs(c, A_ub if m_ub else None, b_ub if m_ub else None, A_eq if m_eq else None,
                b_eq if m_eq else None, bounds=list(zip([0] * n, upper)), method="highs")
    if ref.status == 0:
        res = linprog(c, A_ub if m_ub else None, b_ub if m_ub else None,
                      A_eq if m_eq else None, b_eq if m_eq else None, upper)
        assert res.fun == pytest.approx(ref.fun, abs=1e-7)
    elif ref.status == 2:
        with pytest.raises(InfeasibleLP):
            linprog(c, A_ub if m_ub else None, b_ub if m_ub else None,
                    A_eq if m_eq else None, b_eq if m_eq else None, upper)
    elif ref.status == 3:
        with pytest.raises(UnboundedLP):
            linprog(c, A_ub if m_ub else None, b_ub if m_ub else None,
                    A_eq if m_eq else None, b_eq if m_eq else None, upper)
