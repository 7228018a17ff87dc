"""Storage dispatch that minimizes the community's energy bill.

The battery charges from local PV only (unless grid charging is switched
on), so everything it later releases is community-produced energy. The
operational problem is a linear program: the ``max``/``min`` terms of the
bill are split into local use ``u``, grid import ``y`` and export ``x`` with
``u + y = load`` and ``u + x = p - c + d``. That split is exact as long as
a kWh used locally is worth at least as much as a kWh exported, i.e.
``allo_cost - auto_cost >= export_price`` in every period; schedules that
break this are rejected.

Among cost-optimal schedules the one with the least battery throughput
``sum(c + d)`` is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ecplan.lp import InfeasibleLP, UnboundedLP, linprog
from ecplan.model import StorageSpec, storage_problems
from ecplan.tariffs import TariffSchedule

@dataclass(frozen=True)
class DispatchProblem:
    pv_production: np.ndarray
    aggregate_load: np.ndarray
    storage: StorageSpec
    schedule: TariffSchedule
    step_hours: float = 0.5
    allow_grid_charging: bool = False

    def __post_init__(self):
        for name in ("pv_production", "aggregate_load"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def T(self) -> int:
        return self.pv_production.size


@dataclass(frozen=True)
class DispatchResult:
    charge: np.ndarray
    discharge: np.ndarray
    soc: np.ndarray
    shared_generation: np.ndarray
    export: np.ndarray
    objective_cost: float
    grid_charge: np.ndarray = field(default=None)

    @property
    def local_use(self) -> np.ndarray:
        return self.shared_generation - self.export


def period_cost(g, load, allo_cost, auto_cost, export_price, grid_charge=0.0) -> np.ndarray:
    """Bill of each period in c€ for shared generation ``g`` against ``load``."""
    g = np.asarray(g, dtype=float)
    load = np.asarray(load, dtype=float)
    return (allo_cost * np.maximum(0.0, load - g) + auto_cost * np.minimum(g, load)
            - export_price * np.maximum(0.0, g - load) + allo_cost * grid_charge)


def _check(problem: DispatchProblem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    p, load = problem.pv_production, problem.aggregate_load
    T = p.size
    if load.shape != (T,):
        raise ValueError(f"load has shape {load.shape}, PV has ({T},)")
    if np.any(p < 0) or np.any(load < 0):
        raise ValueError("PV production and load must be nonnegative")
    errs = storage_problems(problem.storage)
    if errs:
        raise ValueError("infeasible storage parameters: " + "; ".join(errs))
    if not problem.step_hours > 0:
        raise ValueError("step must be positive")
    sched_errs = problem.schedule.problems(T)
    if sched_errs:
        raise ValueError("bad tariff schedule: " + "; ".join(sched_errs))
    allo, auto = problem.schedule.allo_cost(), problem.schedule.auto_cost()
    export = problem.schedule.series("export")
    bad = np.flatnonzero(allo - auto < export)
    if bad.size:
        raise ValueError(
            f"non-convex tariff in periods {bad.tolist()}: export price exceeds the "
            "grid-minus-local price spread, local use would not be preferred to export"
        )
    return allo, auto, export


def solve_dispatch(problem: DispatchProblem) -> DispatchResult:
    allo, auto, export = _check(problem)
    p, load = problem.pv_production, problem.aggregate_load
    st = problem.storage
    T = p.size
    power = st.power_kw * problem.step_hours
    eta_c, eta_d = st.charge_efficiency, st.discharge_efficiency

    # variable blocks, each of length T
    C, CG, D, S, U, Y, X = (slice(k * T, (k + 1) * T) for k in range(7))
    nv = 7 * T
    I = np.eye(T)

    A_eq = np.zeros((3 * T, nv))
    b_eq = np.zeros(3 * T)
    # local use + grid import = load
    A_eq[0:T, U] = I
    A_eq[0:T, Y] = I
    b_eq[0:T] = load
    # local use + export = p - c + d
    A_eq[T:2 * T, U] = I
    A_eq[T:2 * T, X] = I
    A_eq[T:2 * T, C] = I
    A_eq[T:2 * T, D] = -I
    b_eq[T:2 * T] = p
    # s_t - s_{t-1} - eta_c (c_t + cg_t) + d_t / eta_d = 0
    A_eq[2 * T:, S] = I - np.eye(T, k=-1)
    A_eq[2 * T:, C] = -eta_c * I
    A_eq[2 * T:, CG] = -eta_c * I
    A_eq[2 * T:, D] = I / eta_d
    b_eq[2 * T] = st.initial_soc_kwh

    upper = np.full(nv, np.inf)
    upper[C] = np.minimum(p, power)
    upper[CG] = power if problem.allow_grid_charging else 0.0
    upper[D] = power
    upper[S] = st.capacity_kwh
    upper[U] = load

    A_ub = b_ub = None
    if problem.allow_grid_charging:
        A_ub = np.zeros((T, nv))
        A_ub[:, C] = I
        A_ub[:, CG] = I
        b_ub = np.full(T, power)

    cost = np.zeros(nv)
    cost[Y] = allo
    cost[U] = auto
    cost[X] = -export
    cost[CG] = allo

    # least battery throughput among the cost-optimal schedules
    wear = np.zeros(nv)
    wear[C] = wear[CG] = wear[D] = 1.0
    try:
        sol = linprog(cost, A_ub, b_ub, A_eq, b_eq, upper, tiebreak=wear).x
    except UnboundedLP:
        raise ValueError("unbounded dispatch") from None
    except InfeasibleLP as exc:
        raise ValueError(f"dispatch is infeasible: {exc}") from None

    def clean(v):
        v = np.where(np.abs(v) < 1e-12, 0.0, v)
        return np.maximum(v, 0.0)

    c, cg, d = clean(sol[C]), clean(sol[CG]), clean(sol[D])
    s = np.clip(sol[S], 0.0, st.capacity_kwh)
    g = np.maximum(p - c + d, 0.0)
    x = np.maximum(0.0, g - load)
    objective = float(period_cost(g, load, allo, auto, export, cg).sum()) / 100
    return DispatchResult(charge=c, discharge=d, soc=s, shared_generation=g, export=x,
                          objective_cost=objective, grid_charge=cg)


def verify_dispatch(result: DispatchResult, problem: DispatchProblem,
                    tol: float = 1e-6) -> tuple[bool, list[str]]:
    """Re-check every invariant of ``result`` and recompute its cost."""
    out: list[str] = []
    p, load = problem.pv_production, problem.aggregate_load
    st = problem.storage
    T = p.size
    c, d, s = (np.asarray(v, dtype=float) for v in (result.charge, result.discharge, result.soc))
    cg = np.zeros(T) if result.grid_charge is None else np.asarray(result.grid_charge, dtype=float)
    g, x = np.asarray(result.shared_generation, dtype=float), np.asarray(result.export, dtype=float)
    for name, v in (("charge", c), ("discharge", d), ("soc", s), ("shared", g), ("export", x),
                    ("grid charge", cg)):
        if v.shape != (T,):
            return False, [f"{name} has shape {v.shape}, expected ({T},)"]

    power = st.power_kw * problem.step_hours
    for t in range(T):
        if c[t] < -tol or d[t] < -tol or cg[t] < -tol:
            out.append(f"period {t}: negative charge or discharge")
        if c[t] * d[t] > tol:
            out.append(f"period {t}: simultaneous charge {c[t]:.6g} and discharge {d[t]:.6g}")
        if s[t] < -tol or s[t] > st.capacity_kwh + tol:
            out.append(f"period {t}: state of charge {s[t]:.6g} outside [0, {st.capacity_kwh}]")
        if c[t] > p[t] + tol:
            out.append(f"period {t}: charge {c[t]:.6g} exceeds PV production {p[t]:.6g}")
        if c[t] + cg[t] > power + tol or d[t] > power + tol:
            out.append(f"period {t}: power limit {power:.6g} kWh exceeded")
        if cg[t] > tol and not problem.allow_grid_charging:
            out.append(f"period {t}: grid charging is not allowed")
        prev = st.initial_soc_kwh if t == 0 else s[t - 1]
        expected = prev + st.charge_efficiency * (c[t] + cg[t]) - d[t] / st.discharge_efficiency
        if abs(s[t] - expected) > tol:
            out.append(f"period {t}: state of charge does not follow the storage balance")
        if abs(g[t] - (p[t] - c[t] + d[t])) > tol or g[t] < -tol:
            out.append(f"period {t}: shared generation inconsistent with PV and storage flows")
        if abs(x[t] - max(0.0, g[t] - load[t])) > tol:
            out.append(f"period {t}: export is not the surplus over load")

    sched = problem.schedule
    cost = float(period_cost(g, load, sched.allo_cost(), sched.auto_cost(),
                             sched.series("export"), cg).sum()) / 100
    if abs(cost - result.objective_cost) > tol:
        out.append(f"reported cost {result.objective_cost:.9g} € differs from recomputed {cost:.9g} €")
    return not out, out


def energy_balance_gap(result: DispatchResult, problem: DispatchProblem) -> float:
    """PV in minus (local use + export + stored + conversion losses) out, in kWh."""
    st = problem.storage
    c, d = result.charge, result.discharge
    cg = np.zeros_like(c) if result.grid_charge is None else result.grid_charge
    stored = (result.soc[-1] if result.soc.size else st.initial_soc_kwh) - st.initial_soc_kwh
    losses = (1 - st.charge_efficiency) * (c + cg).sum() + (1 / st.discharge_efficiency - 1) * d.sum()
    inflow = problem.pv_production.sum() + cg.sum()
    return float(inflow - (result.local_use.sum() + result.export.sum() + stored + losses))
