"""Batch pipeline behind the command line: dispatch -> key -> bills -> indicators."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ecplan import allocation
from ecplan.compliance import ComplianceVerdict, check_compliance
from ecplan.config import ConfigError, ScenarioConfig
from ecplan.dispatch import DispatchProblem, DispatchResult, solve_dispatch, verify_dispatch
from ecplan.indicators import ImpactReport, impact_report
from ecplan.io import (energy, fmt_nano, key_rows, money, read_key_csv, round_key, write_json,
                       write_table)
from ecplan.model import CommunityScenario, StorageSpec, validate_scenario
from ecplan.sizing import SizingResult, optimize_sizing
from ecplan.tariffs import Bills, business_as_usual_bills, compute_bills, to_cents

log = logging.getLogger(__name__)


class ValidationFailure(ValueError):
    """Inputs or a produced artifact failed a feasibility or validity check."""

    def __init__(self, message: str, details: Optional[list[str]] = None):
        super().__init__(message)
        self.details = details or []


def checked_scenario(cfg: ScenarioConfig) -> CommunityScenario:
    scenario = cfg.scenario()
    problems = validate_scenario(scenario)
    if problems:
        raise ValidationFailure("scenario is invalid", problems)
    return scenario


def dispatch(scenario: CommunityScenario) -> tuple[DispatchProblem, DispatchResult]:
    if scenario.pv is None:
        raise ConfigError("dispatch needs scenario.pv_profile")
    problem = DispatchProblem(scenario.pv.production(), scenario.aggregate_load(),
                              scenario.storage or StorageSpec.none(), scenario.schedule,
                              scenario.grid.step_hours, scenario.allow_grid_charging)
    result = solve_dispatch(problem)
    ok, issues = verify_dispatch(result, problem)
    if not ok:
        raise ValidationFailure("dispatch failed its own verification", issues)
    return problem, result


def shared_generation(scenario: CommunityScenario) -> tuple[np.ndarray, Optional[DispatchResult]]:
    """Post-dispatch generation available for sharing."""
    if scenario.generation is not None:
        return np.asarray(scenario.generation), None
    _, result = dispatch(scenario)
    return result.shared_generation, result


def build_key(cfg: ScenarioConfig, scenario: CommunityScenario, g: np.ndarray) -> np.ndarray:
    L = scenario.load
    ids = scenario.member_ids
    rule = cfg.rule()
    if rule == "pro_rata":
        return allocation.default_pro_rata_key(g, L)
    if rule == "priority":
        order = cfg.require("allocation.order")
        try:
            return allocation.priority_key(g, L, [ids.index(str(m)) for m in order])
        except ValueError as exc:
            raise ConfigError(f"allocation.order: {exc}") from None
    if rule == "fixed_ratio":
        w = cfg.require("allocation.weights")
        weights = [float(w.get(i, 0.0)) for i in ids] if isinstance(w, dict) else [float(v) for v in w]
        return allocation.fixed_ratio_key(g, L, weights)
    cols, G = read_key_csv(cfg.path("allocation.key_path"))
    if cols != ids or G.shape != L.shape:
        raise ValidationFailure(f"external key has columns {cols} and shape {G.shape}, "
                                f"expected {ids} and {L.shape}")
    if cfg.get("allocation.project", False):
        G = allocation.project_key(G, g, L)
    return G


def check_key(G, g, L) -> list[str]:
    _, violations = allocation.is_feasible_key(G, g, L)
    return [str(v) for v in violations]


# -- writers -------------------------------------------------------------------

def write_key(out: Path, G: np.ndarray, g, L, ids, fmt: str) -> Path:
    return write_table(out, "key", ["period", *ids], key_rows(G, g, L), fmt)


def write_dispatch(out: Path, result: DispatchResult, fmt: str) -> Path:
    rows = [[str(t), energy(result.charge[t]), energy(result.discharge[t]), energy(result.soc[t]),
             energy(result.shared_generation[t]), energy(result.export[t])]
            for t in range(result.charge.size)]
    return write_table(out, "dispatch", ["period", "charge", "discharge", "soc", "shared", "export"],
                       rows, fmt)


def write_plot_data(out: Path, scenario: CommunityScenario, g, G, fmt: str) -> Path:
    """Data behind a load / key / surplus chart for one day."""
    L = scenario.load
    prod = scenario.pv.production() if scenario.pv is not None else g
    stamps = scenario.metadata.get("timestamps") or [str(t) for t in range(L.shape[0])]
    rk = round_key(G, g, L)
    rows = [[stamps[t], fmt_nano(rk.load[t]), energy(prod[t]), fmt_nano(rk.shared[t]),
             fmt_nano(rk.allocated[t]), fmt_nano(rk.surplus[t]), *(fmt_nano(v) for v in rk.key[t])]
            for t in range(L.shape[0])]
    header = ["time", "load", "production", "shared", "allocated", "surplus", *scenario.member_ids]
    return write_table(out, "plot_data", header, rows, fmt)


def write_bills(out: Path, bills: Bills, bau: Bills, fmt: str) -> Path:
    rows = []
    for b, base in zip(bills.members, bau.members):
        rows.append([b.member, money(b.residual_energy_cost), money(b.residual_network_cost),
                     money(b.shared_network_cost), money(b.shared_energy_cost), money(b.taxes),
                     money(b.total), money(base.total)])
    header = ["member", "residual_energy_cost", "residual_network_cost", "shared_network_cost",
              "shared_energy_cost", "taxes", "total", "bau_total"]
    return write_table(out, "bills", header, rows, fmt)


MONEY_FIELDS = {
    "total_energy_cost_ec", "total_energy_cost_bau", "dso_revenue_ec", "dso_revenue_bau",
    "dso_delta", "supplier_revenue_ec", "supplier_revenue_bau", "supplier_delta",
    "emissions_delta_value", "avoided_emissions_value", "vulnerable_savings", "weighted_score",
}


def report_payload(report: ImpactReport, export_revenue: float) -> dict:
    payload = {}
    for f in dataclasses.fields(report):
        value = getattr(report, f.name)
        if f.name in MONEY_FIELDS:
            payload[f.name] = float(to_cents(value))
        elif f.name == "renewable_share":
            payload[f.name] = round(value, 9)
        elif f.name.startswith("emissions_tco2"):
            payload[f.name] = round(value, 9)
        elif f.name == "weights":
            payload[f.name] = {k: value[k] for k in sorted(value)}
        elif f.name == "assumptions":
            payload[f.name] = list(value)
        else:
            payload[f.name] = value
    payload["export_revenue"] = float(to_cents(export_revenue))
    return payload


# -- commands ------------------------------------------------------------------

@dataclass
class ReportArtifacts:
    g: np.ndarray
    key: np.ndarray
    dispatch: Optional[DispatchResult]
    report: ImpactReport
    bills: Bills


def run_report(cfg: ScenarioConfig, out: Path, fmt: str = "csv") -> ReportArtifacts:
    scenario = checked_scenario(cfg)
    g, result = shared_generation(scenario)
    L = scenario.load
    G = build_key(cfg, scenario, g)
    issues = check_key(G, g, L)
    if issues:
        raise ValidationFailure("repartition key is infeasible", issues)
    R = allocation.residual_load(L, G)
    x = allocation.surplus(g, L)
    bills = compute_bills(L, G, R, x, scenario.schedule, scenario.member_ids)
    weights = cfg.get("indicators.weights") or {}
    report = impact_report(L, G, R, x, scenario.schedule, scenario.members,
                           float(cfg.get("indicators.emission_factor", 0.0)),
                           float(cfg.get("indicators.social_cost_of_carbon", 0.0)),
                           {k: float(v) for k, v in weights.items()})
    bau = business_as_usual_bills(L, scenario.schedule, scenario.member_ids)

    out.mkdir(parents=True, exist_ok=True)
    if result is not None:
        write_dispatch(out, result, fmt)
    write_key(out, G, g, scenario.load, scenario.member_ids, fmt)
    write_plot_data(out, scenario, g, G, fmt)
    write_bills(out, bills, bau, fmt)
    write_json(out / "report.json", report_payload(report, bills.export_revenue))
    return ReportArtifacts(g, G, result, report, bills)


def run_allocate(cfg: ScenarioConfig, out: Path, fmt: str = "csv") -> list[str]:
    scenario = checked_scenario(cfg)
    g, _ = shared_generation(scenario)
    G = build_key(cfg, scenario, g)
    issues = check_key(G, g, scenario.load)
    out.mkdir(parents=True, exist_ok=True)
    if issues:
        # written as given; rounding onto the row targets would hide the violations
        write_table(out, "key", ["period", *scenario.member_ids], key_rows(G), fmt)
    else:
        write_key(out, G, g, scenario.load, scenario.member_ids, fmt)
    write_json(out / "feasibility.json", {"feasible": not issues, "violations": issues})
    return issues


def run_dispatch(cfg: ScenarioConfig, out: Path, fmt: str = "csv") -> DispatchResult:
    scenario = checked_scenario(cfg)
    _, result = dispatch(scenario)
    out.mkdir(parents=True, exist_ok=True)
    write_dispatch(out, result, fmt)
    write_json(out / "dispatch_summary.json",
               {"objective_cost": float(to_cents(result.objective_cost))})
    return result


def run_size(cfg: ScenarioConfig, out: Path, fmt: str = "csv",
             workers: Optional[int] = None) -> SizingResult:
    scenario = checked_scenario(cfg)
    if cfg.get("sizing.full_year", False):
        per_day = int(round(24 / scenario.grid.step_hours))
        scenario = dataclasses.replace(scenario, schedule=cfg.schedule(per_day))
    catalog = cfg.catalog(scenario)
    workers = int(cfg.get("sizing.workers", 1)) if workers is None else workers
    result = optimize_sizing(scenario, catalog, workers=workers)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out, "candidates", CANDIDATE_HEADER, candidate_rows(result), fmt)
    c = result.chosen
    write_json(out / "sizing.json", {
        "pv_option": c.pv_index,
        "storage_option": c.storage_index,
        "pv_peak_kw": c.pv_peak_kw,
        "storage_kwh": c.storage_kwh,
        "storage_kw": c.storage_kw,
        "annualized_capex": float(to_cents(c.annualized_capex)),
        "annual_operation_cost": float(to_cents(c.annual_operation_cost)),
        "total": float(to_cents(c.total)),
    })
    return result


CANDIDATE_HEADER = ["candidate", "pv_option", "storage_option", "pv_peak_kw", "storage_kwh",
                    "storage_kw", "capex", "annualized_capex", "annual_operation_cost", "total",
                    "chosen"]


def candidate_rows(result: SizingResult) -> list[list[str]]:
    rows = []
    for c in result.candidates:
        rows.append([
            str(c.index),
            "baseline" if c.is_baseline else str(c.pv_index),
            "baseline" if c.is_baseline else str(c.storage_index),
            energy(c.pv_peak_kw), energy(c.storage_kwh), energy(c.storage_kw),
            money(c.capex), money(c.annualized_capex), money(c.annual_operation_cost),
            money(c.total), "1" if c.index == result.chosen.index else "0",
        ])
    return rows


def run_check(cfg: ScenarioConfig, out: Path) -> ComplianceVerdict:
    members = cfg.members()
    verdict = check_compliance(
        members, str(cfg.get("scenario.community_type", "REC")), cfg.assets(), cfg.proximity(),
        float(cfg.get("compliance.control_threshold", 0.5)),
        float(cfg.get("compliance.autonomy_threshold", 0.5)),
    )
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "verdict.json", verdict.as_dict())
    return verdict
