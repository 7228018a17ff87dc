import numpy as np
import pytest
from hypothesis import given, strategies as st

from ecplan.model import (CommunityScenario, Member, PvSpec, StorageSpec, TimeGrid,
                          resample_profile, validate_scenario)
from ecplan.tariffs import TariffSchedule


def scenario(load, shares=None, **kw):
    load = np.asarray(load, dtype=float)
    T, N = load.shape
    shares = shares or [1.0 / N] * N
    members = [Member(f"m{n}", "natural-person", s) for n, s in enumerate(shares)]
    return CommunityScenario(members, TimeGrid(T), load, **kw)


def test_negative_load_is_reported_with_its_position():
    problems = validate_scenario(scenario([[1.0, 2.0], [3.0, -1.0]]))
    assert "negative load at (1,1)" in problems


def test_full_example_shape_is_valid():
    rng = np.random.default_rng(0)
    s = scenario(rng.uniform(0, 3, (48, 15)), schedule=TariffSchedule.flat(48, 1, 4, 12))
    assert validate_scenario(s) == []


def test_voting_shares_must_sum_to_one():
    problems = validate_scenario(scenario([[1.0, 1.0]], shares=[0.6, 0.6]))
    assert "voting shares sum 1.2 ≠ 1" in problems


def test_all_problems_are_reported_together():
    s = scenario([[-1.0, 1.0]], shares=[0.6, 0.6],
                 storage=StorageSpec(5, 1, charge_efficiency=1.5, initial_soc_kwh=9),
                 pv=PvSpec(1.0, [0.5, 0.5]))
    problems = validate_scenario(s)
    assert len(problems) >= 5
    assert any("efficiency" in p for p in problems)
    assert any("initial state of charge" in p for p in problems)
    assert any("PV profile has length 2" in p for p in problems)


def test_dimension_mismatch():
    s = CommunityScenario([Member("a", "SME", 1.0)], TimeGrid(3), np.ones((2, 2)))
    problems = validate_scenario(s)
    assert any("2 rows" in p for p in problems)
    assert any("2 columns" in p for p in problems)


def test_unknown_category_is_rejected():
    with pytest.raises(ValueError, match="unknown category"):
        Member("x", "cooperative", 1.0)


def test_scenario_arrays_are_read_only():
    s = scenario([[1.0]])
    with pytest.raises(ValueError):
        s.load[0, 0] = 2.0


@pytest.mark.parametrize("series, src, dst, expected", [
    ([1, 2, 3, 4], 1.0, 2.0, [3, 7]),
    ([4], 1.0, 0.5, [2, 2]),
    ([1.5, 2.5, 0.0], 0.5, 0.5, [1.5, 2.5, 0.0]),
])
def test_resample_examples(series, src, dst, expected):
    assert resample_profile(series, src, dst).tolist() == expected


def test_resample_rejects_bad_ratios():
    with pytest.raises(ValueError, match="non-integer resample ratio"):
        resample_profile([1, 2, 3], 1.0, 1.5)
    with pytest.raises(ValueError, match="multiple"):
        resample_profile([1, 2, 3], 0.5, 1.0)


@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=24),
       st.sampled_from([(1.0, 0.5), (1.0, 0.25), (0.25, 1.0), (0.5, 2.0), (1.0, 1.0)]))
def test_resampling_conserves_energy(series, steps):
    src, dst = steps
    k = round(dst / src)
    if k > 1:
        series = series[: len(series) // k * k] or [0.0] * k
    out = resample_profile(series, src, dst)
    assert abs(sum(series) - out.sum()) <= 1e-9 * max(1.0, sum(series))
