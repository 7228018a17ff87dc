import dataclasses

import numpy as np
import pytest

from ecplan.model import CommunityScenario, Member, TimeGrid
from ecplan.sizing import (PvOption, RepresentativeDay, SizingCatalog, SizingError, StorageOption,
                           capital_recovery_factor, full_year_days, optimize_sizing)
from ecplan.tariffs import TariffSchedule
from oracles import annuity_factor, exhaustive_sizing

T = 4
SCHED = TariffSchedule.flat(T, 1.0, 5.0, 12.0, export_price=2.0)
SCENARIO = CommunityScenario((Member("a", "SME", 1.0),), TimeGrid(T, 1.0), np.zeros((T, 1)),
                             schedule=SCHED)
DAYS = (RepresentativeDay([1.0, 2.0, 3.0, 2.0], [0.0, 0.8, 1.0, 0.1], 180),
        RepresentativeDay([2.0, 2.0, 2.0, 2.0], [0.0, 0.3, 0.4, 0.0], 185))


def catalog(pv, storage, rate=0.05, years=20):
    return SizingCatalog(tuple(pv), tuple(storage), rate, years, DAYS)


@pytest.mark.parametrize("rate, years, expected", [(0.0, 25, 0.04), (0.0, 1, 1.0)])
def test_crf_limits(rate, years, expected):
    assert capital_recovery_factor(rate, years) == expected


def test_crf_matches_high_precision_evaluation():
    assert capital_recovery_factor(0.05, 25) == annuity_factor(0.05, 25)
    assert capital_recovery_factor(0.05, 25) == pytest.approx(0.0709524573, abs=1e-10)


def test_single_pair_catalog():
    result = optimize_sizing(SCENARIO, catalog([PvOption(3, 1000)], [StorageOption(0, 0, 0)]))
    assert (result.pv_option, result.storage_option) == (0, 0)
    assert result.total == result.candidates[1].total
    assert result.total == pytest.approx(1000 * capital_recovery_factor(0.05, 20)
                                         + result.annual_operation_cost)


def test_free_larger_pv_wins():
    cat = catalog([PvOption(1, 0), PvOption(2, 0), PvOption(4, 0)], [StorageOption(0, 0, 0)])
    assert optimize_sizing(SCENARIO, cat).pv_option == 2


def test_baseline_is_listed_but_never_chosen():
    cat = catalog([PvOption(1, 10**7)], [StorageOption(0, 0, 0)])
    result = optimize_sizing(SCENARIO, cat)
    assert result.baseline.is_baseline and result.baseline.capex == 0
    assert result.baseline.total < result.total
    assert not result.chosen.is_baseline


def test_matches_exhaustive_enumeration():
    rng = np.random.default_rng(7)
    pv = [PvOption(float(k), float(rng.uniform(0, 3000))) for k in (1, 2, 3)]
    st = [StorageOption(float(e), float(e), float(rng.uniform(0, 2000)), 0.9, 0.9) for e in (0, 1, 3)]
    cat = catalog(pv, st)
    result = optimize_sizing(SCENARIO, cat)
    (_, i, j), table = exhaustive_sizing(cat, SCHED, 1.0)
    assert (result.pv_option, result.storage_option) == (i, j)
    assert [c.total for c in result.candidates[1:]] == [total for _, _, total in table]


def test_dominated_option_does_not_change_the_choice():
    pv = [PvOption(2, 500), PvOption(3, 900)]
    st = [StorageOption(0, 0, 0), StorageOption(2, 1, 400, 0.9, 0.9)]
    before = optimize_sizing(SCENARIO, catalog(pv, st))
    worse = pv + [dataclasses.replace(pv[before.pv_option], capex=pv[before.pv_option].capex + 1)]
    after = optimize_sizing(SCENARIO, catalog(worse, st))
    assert (after.pv_option, after.storage_option) == (before.pv_option, before.storage_option)


def test_parallel_table_equals_serial():
    pv = [PvOption(k, 100 * k) for k in (1, 2, 3)]
    st = [StorageOption(e, e, 50 * e) for e in (0, 1, 2)]
    cat = catalog(pv, st)
    assert optimize_sizing(SCENARIO, cat, workers=4) == optimize_sizing(SCENARIO, cat, workers=1)


def test_day_weights_must_cover_a_year():
    cat = SizingCatalog((PvOption(1, 0),), (StorageOption(0, 0, 0),), 0.0, 10, DAYS[:1])
    with pytest.raises(SizingError, match="weights"):
        optimize_sizing(SCENARIO, cat)


def test_full_year_days_cut_the_series():
    days = full_year_days(np.ones((8, 2)), np.linspace(0, 1, 8), 4)
    assert len(days) == 2 and days[1].load.tolist() == [2.0] * 4
    with pytest.raises(ValueError):
        full_year_days(np.ones((7, 2)), np.zeros(7), 4)
