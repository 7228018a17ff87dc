"""Time-of-use tariffs that price local ("autoproduit") and grid ("alloproduit")
energy differently, and the member bills that follow from a repartition key.

Prices are c€/kWh. Bills are accumulated in c€ and converted to € once;
rounding to the cent only happens in :func:`to_cents` at report time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Optional, Sequence

import numpy as np

SOURCES = ("auto", "allo", "supplier", "export", "internal", "auto_taxes", "allo_taxes")


@dataclass(frozen=True)
class Band:
    name: str
    periods: frozenset[int]
    auto_network: float
    allo_network: float
    supplier_energy: float
    auto_taxes: float = 0.0
    allo_taxes: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "periods", frozenset(int(p) for p in self.periods))


@dataclass(frozen=True)
class TariffSchedule:
    """Banded tariff over a grid of ``period_count`` periods (0-based)."""

    period_count: int
    bands: tuple[Band, ...]
    export_price: float = 0.0
    internal_energy_price: float = 0.0
    _band_of: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "bands", tuple(self.bands))
        lookup = [-1] * self.period_count
        for i, band in enumerate(self.bands):
            for p in band.periods:
                if 0 <= p < self.period_count and lookup[p] == -1:
                    lookup[p] = i
        object.__setattr__(self, "_band_of", tuple(lookup))

    @classmethod
    def flat(
        cls,
        period_count: int,
        auto_network: float,
        allo_network: float,
        supplier_energy: float,
        export_price: float = 0.0,
        internal_energy_price: float = 0.0,
        auto_taxes: float = 0.0,
        allo_taxes: float = 0.0,
    ) -> "TariffSchedule":
        band = Band("flat", frozenset(range(period_count)), auto_network, allo_network,
                    supplier_energy, auto_taxes, allo_taxes)
        return cls(period_count, (band,), export_price, internal_energy_price)

    def problems(self, period_count: Optional[int] = None) -> list[str]:
        out = []
        if period_count is not None and period_count != self.period_count:
            out.append(f"tariff covers {self.period_count} periods, time grid has {period_count}")
        seen: dict[int, str] = {}
        for band in self.bands:
            for p in sorted(band.periods):
                if not 0 <= p < self.period_count:
                    out.append(f"band {band.name!r} lists period {p} outside the grid")
                elif p in seen:
                    out.append(f"period {p} is in both band {seen[p]!r} and band {band.name!r}")
                else:
                    seen[p] = band.name
            for attr in ("auto_network", "allo_network", "supplier_energy", "auto_taxes", "allo_taxes"):
                if not getattr(band, attr) >= 0:
                    out.append(f"band {band.name!r}: {attr} must be nonnegative")
        missing = sorted(set(range(self.period_count)) - set(seen))
        if missing:
            out.append(f"periods {missing} are not covered by any band")
        if not self.export_price >= 0:
            out.append("export price must be nonnegative")
        if not self.internal_energy_price >= 0:
            out.append("internal energy price must be nonnegative")
        return out

    def band_at(self, period: int) -> Band:
        if not 0 <= period < self.period_count:
            raise IndexError(f"period {period} outside the grid 0..{self.period_count - 1}")
        i = self._band_of[period]
        if i < 0:
            raise ValueError(f"period {period} is not covered by any band")
        return self.bands[i]

    def series(self, source: str) -> np.ndarray:
        """Price of ``source`` for every period, as a length-T array."""
        return np.array([price_of(t, source, self) for t in range(self.period_count)])

    def allo_cost(self) -> np.ndarray:
        """All-in c€/kWh of energy drawn from the grid."""
        return self.series("supplier") + self.series("allo") + self.series("allo_taxes")

    def auto_cost(self) -> np.ndarray:
        """All-in c€/kWh of allocated local energy."""
        return self.series("internal") + self.series("auto") + self.series("auto_taxes")


def price_of(period: int, source: str, schedule: TariffSchedule) -> float:
    """Price in c€/kWh of ``source`` in ``period``.

    ``auto``/``allo`` are the network fees for local and grid energy,
    ``supplier`` the retail energy price, ``export`` the feed-in price and
    ``internal`` what members pay the community for allocated energy.
    """
    if source == "export":
        schedule.band_at(period)
        return schedule.export_price
    if source == "internal":
        schedule.band_at(period)
        return schedule.internal_energy_price
    band = schedule.band_at(period)
    try:
        attr = {
            "auto": "auto_network",
            "allo": "allo_network",
            "supplier": "supplier_energy",
            "auto_taxes": "auto_taxes",
            "allo_taxes": "allo_taxes",
        }[source]
    except KeyError:
        raise ValueError(f"unknown source {source!r}; expected one of {SOURCES}") from None
    return getattr(band, attr)


@dataclass(frozen=True)
class MemberBill:
    member: str
    residual_energy_cost: float
    residual_network_cost: float
    shared_network_cost: float
    shared_energy_cost: float
    taxes: float

    @property
    def network_cost(self) -> float:
        return self.residual_network_cost + self.shared_network_cost

    @property
    def total(self) -> float:
        return (self.residual_energy_cost + self.residual_network_cost + self.shared_network_cost
                + self.shared_energy_cost + self.taxes)


@dataclass(frozen=True)
class Bills:
    members: tuple[MemberBill, ...]
    export_revenue: float

    def totals(self) -> np.ndarray:
        return np.array([b.total for b in self.members])

    def network_revenue(self) -> float:
        return sum(b.network_cost for b in self.members)

    def community_cost(self) -> float:
        """What the community pays overall: member bills net of export revenue."""
        return float(self.totals().sum()) - self.export_revenue


def compute_bills(L, G, R, export, schedule: TariffSchedule,
                  member_ids: Optional[Sequence[str]] = None) -> Bills:
    L = np.asarray(L, dtype=float)
    G = np.asarray(G, dtype=float)
    R = np.asarray(R, dtype=float)
    export = np.asarray(export, dtype=float)
    T, N = L.shape
    if G.shape != (T, N) or R.shape != (T, N):
        raise ValueError(f"load {L.shape}, key {G.shape} and residual {R.shape} must match")
    if export.shape != (T,):
        raise ValueError(f"export has shape {export.shape}, expected ({T},)")
    if schedule.period_count != T:
        raise ValueError(f"tariff covers {schedule.period_count} periods, load has {T}")
    if member_ids is None:
        member_ids = [str(n) for n in range(N)]

    sup, allo, auto = schedule.series("supplier"), schedule.series("allo"), schedule.series("auto")
    internal = schedule.series("internal")
    allo_tax, auto_tax = schedule.series("allo_taxes"), schedule.series("auto_taxes")

    # c€ per member, converted to € once
    bills = tuple(
        MemberBill(
            member=member_ids[n],
            residual_energy_cost=float(R[:, n] @ sup) / 100,
            residual_network_cost=float(R[:, n] @ allo) / 100,
            shared_network_cost=float(G[:, n] @ auto) / 100,
            shared_energy_cost=float(G[:, n] @ internal) / 100,
            taxes=float(R[:, n] @ allo_tax + G[:, n] @ auto_tax) / 100,
        )
        for n in range(N)
    )
    revenue = float(export @ schedule.series("export")) / 100
    return Bills(bills, revenue)


def business_as_usual_bills(L, schedule: TariffSchedule,
                            member_ids: Optional[Sequence[str]] = None) -> Bills:
    L = np.asarray(L, dtype=float)
    zero = np.zeros_like(L)
    return compute_bills(L, zero, L, np.zeros(L.shape[0]), schedule, member_ids)


def to_cents(euros: float) -> Decimal:
    """Round € to the cent, half away from zero."""
    return Decimal(repr(float(euros))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


def band_periods(spec: Iterable) -> frozenset[int]:
    """Parse band periods given as ints or ``"a-b"`` ranges (inclusive)."""
    out: set[int] = set()
    for item in spec:
        if isinstance(item, str) and "-" in item:
            lo, hi = item.split("-", 1)
            out.update(range(int(lo), int(hi) + 1))
        else:
            out.add(int(item))
    return frozenset(out)
