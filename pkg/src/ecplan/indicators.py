"""Community-versus-business-as-usual indicators and the weighted score."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from ecplan.model import Member
from ecplan.tariffs import Bills, TariffSchedule, business_as_usual_bills, compute_bills

SOCIAL_ASSUMPTION = (
    "social benefit is measured as the bill savings of members flagged vulnerable"
)


def renewable_share(L, G) -> float:
    """Fraction of community load met by allocated local energy."""
    total = float(np.sum(L))
    if total == 0:
        return 0.0
    return float(np.sum(G)) / total


def stakeholder_deltas(L, G, R, schedule: TariffSchedule) -> tuple[float, float]:
    """(DSO, supplier) revenue change in € caused by sharing ``G``.

    Every allocated kWh moves from the grid network fee to the local one and
    is no longer sold by the supplier.
    """
    G = np.asarray(G, dtype=float)
    per_period = G.sum(axis=1)
    dso = float(per_period @ (schedule.series("auto") - schedule.series("allo"))) / 100
    supplier = -float(per_period @ schedule.series("supplier")) / 100
    return dso, supplier


def emissions_value(G, grid_emission_factor: float, social_cost_of_carbon: float) -> float:
    """€ value of grid emissions avoided by the allocated local energy.

    ``grid_emission_factor`` is kgCO2/kWh, ``social_cost_of_carbon`` €/tCO2;
    local generation counts as zero-emission.
    """
    if grid_emission_factor < 0 or social_cost_of_carbon < 0:
        raise ValueError("emission factor and carbon price must be nonnegative")
    return float(np.sum(G)) * grid_emission_factor / 1000 * social_cost_of_carbon


@dataclass(frozen=True)
class ImpactReport:
    total_energy_cost_ec: float
    total_energy_cost_bau: float
    renewable_share: float
    dso_revenue_ec: float
    dso_revenue_bau: float
    dso_delta: float
    supplier_revenue_ec: float
    supplier_revenue_bau: float
    supplier_delta: float
    emissions_tco2_ec: float
    emissions_tco2_bau: float
    emissions_delta_value: float
    avoided_emissions_value: float
    vulnerable_savings: float
    weighted_score: float = 0.0
    weights: Mapping[str, float] = field(default_factory=dict)
    assumptions: tuple[str, ...] = (SOCIAL_ASSUMPTION,)

    @property
    def cost_savings(self) -> float:
        return self.total_energy_cost_bau - self.total_energy_cost_ec

    def as_dict(self) -> dict:
        return asdict(self)


def community_score(report: ImpactReport, weights: Mapping[str, float]) -> float:
    """Weighted sum of economic, environmental and social benefit (higher is better)."""
    w_econ = weights.get("economic", 0.0)
    w_env = weights.get("environmental", 0.0)
    w_soc = weights.get("social", 0.0)
    if min(w_econ, w_env, w_soc) < 0:
        raise ValueError("score weights must be nonnegative")
    return (w_econ * report.cost_savings + w_env * report.avoided_emissions_value
            + w_soc * report.vulnerable_savings)


def impact_report(
    L,
    G,
    R,
    export,
    schedule: TariffSchedule,
    members: Optional[Sequence[Member]] = None,
    grid_emission_factor: float = 0.0,
    social_cost_of_carbon: float = 0.0,
    weights: Optional[Mapping[str, float]] = None,
) -> ImpactReport:
    L = np.asarray(L, dtype=float)
    ids = None if members is None else [m.id for m in members]
    ec: Bills = compute_bills(L, G, R, export, schedule, ids)
    bau: Bills = business_as_usual_bills(L, schedule, ids)
    dso_delta, supplier_delta = stakeholder_deltas(L, G, R, schedule)
    sup = schedule.series("supplier")

    vulnerable = [n for n, m in enumerate(members or ()) if m.vulnerable]
    savings = sum(bau.members[n].total - ec.members[n].total for n in vulnerable)

    factor = grid_emission_factor / 1000
    avoided = emissions_value(G, grid_emission_factor, social_cost_of_carbon)
    weights = dict(weights or {})
    report = ImpactReport(
        total_energy_cost_ec=ec.community_cost(),
        total_energy_cost_bau=bau.community_cost(),
        renewable_share=renewable_share(L, G),
        dso_revenue_ec=ec.network_revenue(),
        dso_revenue_bau=bau.network_revenue(),
        dso_delta=dso_delta,
        supplier_revenue_ec=float(np.asarray(R).sum(axis=1) @ sup) / 100,
        supplier_revenue_bau=float(L.sum(axis=1) @ sup) / 100,
        supplier_delta=supplier_delta,
        emissions_tco2_ec=float(np.sum(R)) * factor,
        emissions_tco2_bau=float(np.sum(L)) * factor,
        emissions_delta_value=-avoided,
        avoided_emissions_value=avoided,
        vulnerable_savings=float(savings),
        weights=weights,
    )
    return replace(report, weighted_score=community_score(report, weights))
