from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ecplan.investment import (InvestmentPool, Project, allocate_project_energy,
                               generation_shares, installments, repayment_schedule)


def pool(*loans, **kw):
    return InvestmentPool(tuple((f"p{i}", loan) for i, loan in enumerate(loans)), **kw)


def test_share_examples():
    assert generation_shares(pool(100, 300)).tolist() == [0.25, 0.75]
    assert generation_shares(pool(500)).tolist() == [1.0]
    assert generation_shares(pool(*[200] * 7)) == pytest.approx([1 / 7] * 7)


def test_installment_examples():
    assert installments(Decimal("2000000"), 25) == [Decimal("80000")] * 25
    assert installments(100, 25) == [Decimal("4.00")] * 25
    assert installments(1000, 3) == [Decimal("333.33"), Decimal("333.33"), Decimal("333.34")]


def test_energy_allocation_examples():
    p = pool(100, 300)
    assert allocate_project_energy(p, [10, 20]).tolist() == [[2.5, 5.0], [7.5, 15.0]]
    assert not allocate_project_energy(p, [0, 0]).any()
    assert allocate_project_energy(pool(100), [1, 2, 3]).tolist() == [[1, 2, 3]]


def test_pool_problems():
    p = pool(50, 200, project=Project("x", 10, 100))
    problems = p.problems()
    assert any("minimum" in s for s in problems)
    assert any("capex" in s for s in problems)


def test_schedule_years_start_at_one(tmp_path):
    path = tmp_path / "loans.csv"
    path.write_text("participant_id,loan_eur\na,100\nb,250.50\n")
    sched = repayment_schedule(InvestmentPool.from_csv(path, repayment_years=5))
    assert [y for y, _ in sched["b"]] == [1, 2, 3, 4, 5]
    assert sum(a for _, a in sched["b"]) == Decimal("250.50")


@given(st.integers(1, 10**11), st.integers(1, 50))
def test_schedules_sum_to_the_loan(cents, years):
    loan = Decimal(cents) / 100
    plan = installments(loan, years)
    assert len(plan) == years and sum(plan) == loan


@given(st.lists(st.integers(100, 10**6), min_size=1, max_size=30))
def test_shares_partition_generation(loans):
    gen = np.array([3.0, 0.0, 7.5])
    shares = generation_shares(pool(*loans))
    assert shares.sum() == pytest.approx(1.0)
    assert allocate_project_energy(pool(*loans), gen).sum(axis=0) == pytest.approx(gen)


def test_bundled_projects_repay_over_25_years():
    from conftest import EXAMPLE_DIR
    from ecplan.io import read_records

    rows = read_records(EXAMPLE_DIR.parent / "generation_kwh_projects.csv",
                        ["project", "peak_kw", "capex_eur"])
    assert [r["project"] for r in rows] == ["Alcolea del Río", "Fontivsolar", "La Serra"]
    capex = {r["project"]: Decimal(r["capex_eur"]) for r in rows}
    assert installments(capex["Alcolea del Río"], 25) == [Decimal("80000")] * 25
    assert sum(installments(capex["Fontivsolar"], 25)) == Decimal("850000")
