"""PV and storage sizing by exhaustive search over a discrete catalog.

Each (PV, storage) pair is scored by its annualized capex plus the yearly
operation cost, which is the weighted sum of the optimal dispatch cost over
a set of representative days. The no-asset baseline is always scored and
reported, but it is only selectable when the catalog itself offers it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ecplan.dispatch import DispatchProblem, solve_dispatch
from ecplan.model import CommunityScenario, StorageSpec
from ecplan.tariffs import TariffSchedule

DAYS_PER_YEAR = 365
WEIGHT_TOL = 1.0


class SizingError(ValueError):
    pass


@dataclass(frozen=True)
class PvOption:
    peak_kw: float
    capex: float


@dataclass(frozen=True)
class StorageOption:
    capacity_kwh: float
    power_kw: float
    capex: float
    charge_efficiency: float = 1.0
    discharge_efficiency: float = 1.0

    def spec(self, initial_soc_fraction: float = 0.0) -> StorageSpec:
        return StorageSpec(self.capacity_kwh, self.power_kw, self.charge_efficiency,
                           self.discharge_efficiency, initial_soc_fraction * self.capacity_kwh)


@dataclass(frozen=True)
class RepresentativeDay:
    load: np.ndarray
    pv_profile: np.ndarray
    weight: float

    def __post_init__(self):
        load = np.array(self.load, dtype=float)
        if load.ndim == 2:
            load = load.sum(axis=1)
        load.flags.writeable = False
        prof = np.array(self.pv_profile, dtype=float)
        prof.flags.writeable = False
        object.__setattr__(self, "load", load)
        object.__setattr__(self, "pv_profile", prof)


@dataclass(frozen=True)
class SizingCatalog:
    pv_options: tuple[PvOption, ...]
    storage_options: tuple[StorageOption, ...]
    discount_rate: float
    lifetime_years: int
    days: tuple[RepresentativeDay, ...]
    initial_soc_fraction: float = 0.0

    def __post_init__(self):
        for name in ("pv_options", "storage_options", "days"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def problems(self) -> list[str]:
        out = []
        if not self.pv_options:
            out.append("PV catalog is empty")
        if not self.storage_options:
            out.append("storage catalog is empty")
        if not self.discount_rate >= 0:
            out.append(f"discount rate must be nonnegative, got {self.discount_rate}")
        if not self.lifetime_years >= 1:
            out.append(f"lifetime must be at least one year, got {self.lifetime_years}")
        if not self.days:
            out.append("no representative days")
        total = sum(d.weight for d in self.days)
        if abs(total - DAYS_PER_YEAR) > WEIGHT_TOL:
            out.append(f"day weights sum to {total:g}, expected {DAYS_PER_YEAR} ± {WEIGHT_TOL:g}")
        return out


@dataclass(frozen=True)
class Candidate:
    index: int
    pv_index: Optional[int]
    storage_index: Optional[int]
    pv_peak_kw: float
    storage_kwh: float
    storage_kw: float
    capex: float
    annualized_capex: float
    annual_operation_cost: float

    @property
    def total(self) -> float:
        return self.annualized_capex + self.annual_operation_cost

    @property
    def is_baseline(self) -> bool:
        return self.pv_index is None


@dataclass(frozen=True)
class SizingResult:
    chosen: Candidate
    candidates: tuple[Candidate, ...]

    @property
    def pv_option(self) -> int:
        return self.chosen.pv_index

    @property
    def storage_option(self) -> int:
        return self.chosen.storage_index

    @property
    def annualized_capex(self) -> float:
        return self.chosen.annualized_capex

    @property
    def annual_operation_cost(self) -> float:
        return self.chosen.annual_operation_cost

    @property
    def total(self) -> float:
        return self.chosen.total

    @property
    def baseline(self) -> Candidate:
        return self.candidates[0]


def capital_recovery_factor(rate: float, years: int) -> float:
    """Annuity factor turning an upfront cost into equal yearly payments."""
    if years < 1 or rate < 0:
        raise ValueError("need years >= 1 and rate >= 0")
    if rate == 0:
        return 1.0 / years
    # exact rational evaluation of the decimal rate, rounded once
    r = Fraction(repr(float(rate)))
    growth = (1 + r) ** years
    return float(r * growth / (growth - 1))


def full_year_days(load, pv_profile, periods_per_day: int) -> list[RepresentativeDay]:
    """Cut a year of data into weight-1 days (state of charge restarts daily)."""
    load = np.asarray(load, dtype=float)
    pv_profile = np.asarray(pv_profile, dtype=float)
    if load.shape[0] % periods_per_day or pv_profile.shape[0] != load.shape[0]:
        raise ValueError("year data must be a whole number of days and PV must match load")
    n_days = load.shape[0] // periods_per_day
    return [
        RepresentativeDay(load[k * periods_per_day:(k + 1) * periods_per_day],
                          pv_profile[k * periods_per_day:(k + 1) * periods_per_day], 1.0)
        for k in range(n_days)
    ]


def _operation_cost(pv_kw: float, storage: StorageSpec, days: Sequence[RepresentativeDay],
                    schedule: TariffSchedule, step_hours: float, grid_charging: bool) -> float:
    total = 0.0
    for day in days:
        problem = DispatchProblem(pv_kw * day.pv_profile, day.load, storage, schedule,
                                  step_hours, grid_charging)
        total += day.weight * solve_dispatch(problem).objective_cost
    return total


def optimize_sizing(scenario: CommunityScenario, catalog: SizingCatalog,
                    workers: int = 1) -> SizingResult:
    """Score every catalog pair and return the cheapest.

    Ties on total cost go to the smaller capex, then the smaller PV peak.
    ``workers > 1`` evaluates candidates concurrently; results are gathered
    by candidate index so the table is identical either way.
    """
    errs = catalog.problems()
    if errs:
        raise SizingError("invalid catalog: " + "; ".join(errs))
    schedule = scenario.schedule
    if schedule is None:
        raise SizingError("scenario has no tariff schedule")
    for k, day in enumerate(catalog.days):
        if day.load.shape != (schedule.period_count,) or day.pv_profile.shape != day.load.shape:
            raise SizingError(f"representative day {k} does not match the {schedule.period_count}-period tariff")

    crf = capital_recovery_factor(catalog.discount_rate, catalog.lifetime_years)
    grid_charging = scenario.allow_grid_charging
    step = scenario.grid.step_hours

    # row 0 is the no-asset baseline
    plan = [(None, None, 0.0, StorageSpec.none(), 0.0)]
    for i, pv in enumerate(catalog.pv_options):
        for j, st in enumerate(catalog.storage_options):
            plan.append((i, j, pv.peak_kw, st.spec(catalog.initial_soc_fraction), pv.capex + st.capex))

    def evaluate(row):
        i, j, pv_kw, storage, _ = row
        try:
            return _operation_cost(pv_kw, storage, catalog.days, schedule, step, grid_charging)
        except ValueError as exc:
            what = "baseline" if i is None else f"pv option {i}, storage option {j}"
            raise SizingError(f"{what}: {exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            op_costs = list(pool.map(evaluate, plan))
    else:
        op_costs = [evaluate(row) for row in plan]

    candidates = tuple(
        Candidate(index=k, pv_index=i, storage_index=j, pv_peak_kw=pv_kw,
                  storage_kwh=storage.capacity_kwh, storage_kw=storage.power_kw,
                  capex=capex, annualized_capex=capex * crf, annual_operation_cost=op)
        for k, ((i, j, pv_kw, storage, capex), op) in enumerate(zip(plan, op_costs))
    )
    selectable = [c for c in candidates if not c.is_baseline]
    chosen = min(selectable, key=lambda c: (c.total, c.capex, c.pv_peak_kw, c.index))
    if not math.isfinite(chosen.total):
        raise SizingError("no candidate has a finite cost")
    return SizingResult(chosen, candidates)
