"""Shared data model: time grid, members, profiles and assets.

Energies are kWh per period everywhere. Types are frozen; arrays stored on
them are made read-only so a scenario can be shared between threads.
Construction is deliberately lenient: problems are collected by
:func:`validate_scenario` instead of raised, so a single pass reports all
of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

if TYPE_CHECKING:
    from ecplan.tariffs import TariffSchedule

VOTING_SHARE_TOL = 1e-9


def frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if ndim == 2 and arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


class Category(str, Enum):
    NATURAL_PERSON = "natural-person"
    SME = "SME"
    MEDIUM_LARGE_ENTERPRISE = "medium-large-enterprise"
    LOCAL_AUTHORITY = "local-authority"
    ENERGY_COMPANY = "energy-company"


@dataclass(frozen=True)
class TimeGrid:
    period_count: int
    step_hours: float = 0.5

    @property
    def T(self) -> int:
        return self.period_count


@dataclass(frozen=True)
class Member:
    id: str
    category: Category
    voting_share: float
    location: Optional[tuple[float, float]] = None
    admin_region: Optional[str] = None
    transformer_id: Optional[str] = None
    vulnerable: bool = False

    def __post_init__(self):
        if not isinstance(self.category, Category):
            try:
                object.__setattr__(self, "category", Category(self.category))
            except ValueError:
                raise ValueError(
                    f"member {self.id!r}: unknown category {self.category!r}; "
                    f"expected one of {[c.value for c in Category]}"
                ) from None


@dataclass(frozen=True)
class StorageSpec:
    capacity_kwh: float
    power_kw: float
    charge_efficiency: float = 1.0
    discharge_efficiency: float = 1.0
    initial_soc_kwh: float = 0.0

    @classmethod
    def none(cls) -> "StorageSpec":
        return cls(0.0, 0.0)


@dataclass(frozen=True)
class PvSpec:
    peak_kw: float
    normalized_profile: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "normalized_profile", frozen_array(self.normalized_profile, 1))

    def production(self) -> np.ndarray:
        """Production in kWh per period."""
        return self.peak_kw * np.asarray(self.normalized_profile)


@dataclass(frozen=True)
class CommunityScenario:
    members: tuple[Member, ...]
    grid: TimeGrid
    load: np.ndarray
    pv: Optional[PvSpec] = None
    storage: Optional[StorageSpec] = None
    schedule: Optional["TariffSchedule"] = None
    generation: Optional[np.ndarray] = None
    allow_grid_charging: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "load", frozen_array(self.load, 2))
        if self.generation is not None:
            object.__setattr__(self, "generation", frozen_array(self.generation, 1))

    @property
    def member_ids(self) -> list[str]:
        return [m.id for m in self.members]

    def aggregate_load(self) -> np.ndarray:
        return np.asarray(self.load).sum(axis=1)


def _check_nonnegative(values: np.ndarray, name: str) -> list[str]:
    out = []
    bad = np.argwhere(~(values >= 0))
    for idx in bad:
        where = ",".join(str(int(i)) for i in idx)
        out.append(f"negative {name} at ({where})")
    return out


def validate_scenario(scenario: CommunityScenario) -> list[str]:
    """Return every problem found in ``scenario``; an empty list means valid."""
    problems: list[str] = []
    grid = scenario.grid
    if not isinstance(grid.period_count, (int, np.integer)) or grid.period_count < 1:
        problems.append(f"period count must be a positive integer, got {grid.period_count!r}")
    if not grid.step_hours > 0:
        problems.append(f"step must be positive, got {grid.step_hours!r}")

    L = np.asarray(scenario.load)
    n_members = len(scenario.members)
    if L.ndim != 2:
        problems.append(f"load matrix must be 2-d, got shape {L.shape}")
    else:
        if L.shape[0] != grid.period_count:
            problems.append(f"load has {L.shape[0]} rows, time grid has {grid.period_count} periods")
        if L.shape[1] != n_members:
            problems.append(f"load has {L.shape[1]} columns, community has {n_members} members")
        problems += _check_nonnegative(L, "load")

    ids = [m.id for m in scenario.members]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        problems.append(f"duplicate member ids {dupes}")
    for m in scenario.members:
        if not 0.0 <= m.voting_share <= 1.0:
            problems.append(f"voting share of {m.id} outside [0,1]: {m.voting_share}")
    if scenario.members:
        total = math.fsum(m.voting_share for m in scenario.members)
        if abs(total - 1.0) > VOTING_SHARE_TOL:
            problems.append(f"voting shares sum {total:g} ≠ 1")

    if scenario.generation is not None:
        g = np.asarray(scenario.generation)
        if g.shape != (grid.period_count,):
            problems.append(f"generation has length {g.shape[0]}, time grid has {grid.period_count} periods")
        problems += _check_nonnegative(g, "generation")

    if scenario.pv is not None:
        prof = np.asarray(scenario.pv.normalized_profile)
        if prof.shape != (grid.period_count,):
            problems.append(f"PV profile has length {prof.shape[0]}, time grid has {grid.period_count} periods")
        if np.any(~((prof >= 0) & (prof <= 1))):
            problems.append("PV normalized profile entries must lie in [0,1]")
        if not scenario.pv.peak_kw >= 0:
            problems.append(f"PV peak must be nonnegative, got {scenario.pv.peak_kw}")

    st = scenario.storage
    if st is not None:
        problems += storage_problems(st)

    if scenario.schedule is not None:
        problems += scenario.schedule.problems(grid.period_count)
    return problems


def storage_problems(st: StorageSpec) -> list[str]:
    problems = []
    if not st.capacity_kwh >= 0:
        problems.append(f"storage capacity must be nonnegative, got {st.capacity_kwh}")
    if not st.power_kw >= 0:
        problems.append(f"storage power must be nonnegative, got {st.power_kw}")
    for name, eff in (("charge", st.charge_efficiency), ("discharge", st.discharge_efficiency)):
        if not 0.0 < eff <= 1.0:
            problems.append(f"{name} efficiency {eff} out of range (0,1]")
    if not 0.0 <= st.initial_soc_kwh <= st.capacity_kwh:
        problems.append(
            f"initial state of charge {st.initial_soc_kwh} outside [0, {st.capacity_kwh}]"
        )
    return problems


def resample_profile(series: Sequence[float], source_step: float, target_step: float) -> np.ndarray:
    """Resample an energy series (kWh per period) to a new step length.

    Coarsening sums whole groups of periods; refining splits each period's
    energy equally. Steps are compared as exact fractions so 0.5 h and
    0.25 h behave.

    >>> resample_profile([1, 2, 3, 4], 1.0, 2.0).tolist()
    [3.0, 7.0]
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if not (source_step > 0 and target_step > 0):
        raise ValueError("steps must be positive")
    ratio = Fraction(target_step).limit_denominator(10**6) / Fraction(source_step).limit_denominator(10**6)
    if ratio == 1:
        return x.copy()
    if ratio.denominator == 1:
        k = ratio.numerator
        if x.size % k:
            raise ValueError(f"series length {x.size} is not a multiple of the resample factor {k}")
        return x.reshape(-1, k).sum(axis=1)
    if ratio.numerator == 1:
        k = ratio.denominator
        return np.repeat(x / k, k)
    raise ValueError(f"non-integer resample ratio {source_step} h -> {target_step} h")
