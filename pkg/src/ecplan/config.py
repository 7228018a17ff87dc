"""Scenario configuration: one YAML file of flat dotted keys.

Nested mappings are accepted too and flattened, so ``tariff: {export_price: 4}``
and ``tariff.export_price: 4`` are the same key. Relative paths resolve
against the directory of the config file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import yaml

from ecplan.compliance import (AdminProximity, DistanceProximity, FeederGraph, GenerationAsset,
                               NetworkProximity, ProximityMethod)
from ecplan.io import Profiles, load_profiles, optional_float, read_records
from ecplan.model import CommunityScenario, Member, PvSpec, StorageSpec, TimeGrid
from ecplan.sizing import PvOption, RepresentativeDay, SizingCatalog, StorageOption, full_year_days
from ecplan.tariffs import Band, TariffSchedule, band_periods

RULES = ("pro_rata", "priority", "fixed_ratio", "external_key")


class ConfigError(ValueError):
    pass


def flatten(tree: dict, prefix: str = "") -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in tree.items():
        full = f"{prefix}{key}"
        if isinstance(value, dict) and not full.endswith("weights"):
            out.update(flatten(value, full + "."))
        else:
            out[full] = value
    return out


@dataclass
class ScenarioConfig:
    keys: dict[str, Any]
    base_dir: Path

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as fh:
                raw = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        return cls(flatten(raw), path.resolve().parent)

    def get(self, key: str, default: Any = None) -> Any:
        return self.keys.get(key, default)

    def require(self, key: str) -> Any:
        if key not in self.keys:
            raise ConfigError(f"missing config key {key!r}")
        return self.keys[key]

    def path(self, key: str, required: bool = True) -> Optional[Path]:
        value = self.require(key) if required else self.get(key)
        if value is None:
            return None
        p = Path(value)
        p = p if p.is_absolute() else self.base_dir / p
        if not p.exists():
            raise ConfigError(f"{key}: file {p} does not exist")
        return p

    # -- scenario pieces -------------------------------------------------

    def members(self) -> list[Member]:
        rows = read_records(self.path("scenario.members"), ["id", "category", "voting_share"])
        out = []
        for r in rows:
            lat, lon = optional_float(r.get("latitude")), optional_float(r.get("longitude"))
            out.append(Member(
                id=r["id"],
                category=r["category"],
                voting_share=float(r["voting_share"]),
                location=None if lat is None or lon is None else (lat, lon),
                admin_region=r.get("admin_region") or None,
                transformer_id=r.get("transformer_id") or None,
                vulnerable=(r.get("vulnerable", "").lower() in ("1", "true", "yes")),
            ))
        return out

    def load_profiles(self) -> Profiles:
        return load_profiles(self.path("scenario.load"))

    def pv_profile(self) -> Optional[Profiles]:
        p = self.path("scenario.pv_profile", required=False)
        return None if p is None else load_profiles(p)

    def schedule(self, period_count: int) -> TariffSchedule:
        bands_cfg = self.get("tariff.bands")
        if bands_cfg is None:
            bands = [Band("flat", frozenset(range(period_count)),
                          float(self.require("tariff.auto_network")),
                          float(self.require("tariff.allo_network")),
                          float(self.require("tariff.supplier_energy")),
                          float(self.get("tariff.auto_taxes", 0.0)),
                          float(self.get("tariff.allo_taxes", 0.0)))]
        else:
            bands = []
            for i, b in enumerate(bands_cfg):
                try:
                    bands.append(Band(str(b.get("name", f"band{i}")), band_periods(b["periods"]),
                                      float(b["auto_network"]), float(b["allo_network"]),
                                      float(b["supplier_energy"]), float(b.get("auto_taxes", 0.0)),
                                      float(b.get("allo_taxes", 0.0))))
                except KeyError as exc:
                    raise ConfigError(f"tariff.bands[{i}] is missing {exc}") from None
        return TariffSchedule(period_count, tuple(bands),
                              float(self.get("tariff.export_price", 0.0)),
                              float(self.get("tariff.internal_energy_price", 0.0)))

    def storage(self) -> Optional[StorageSpec]:
        if self.get("storage.capacity_kwh") is None:
            return None
        return StorageSpec(float(self.get("storage.capacity_kwh")),
                           float(self.get("storage.power_kw", 0.0)),
                           float(self.get("storage.charge_efficiency", 1.0)),
                           float(self.get("storage.discharge_efficiency", 1.0)),
                           float(self.get("storage.initial_soc_kwh", 0.0)))

    def scenario(self) -> CommunityScenario:
        members = self.members()
        loads = self.load_profiles()
        ids = [m.id for m in members]
        if list(loads.columns) != ids:
            raise ConfigError(f"load columns {list(loads.columns)} do not match member ids {ids}")
        T = loads.values.shape[0]
        pv = None
        prof = self.pv_profile()
        if prof is not None:
            if prof.values.shape[0] != T or prof.step_hours != loads.step_hours:
                raise ConfigError("PV profile and load profiles are on different time grids")
            pv = PvSpec(float(self.get("pv.peak_kw", 1.0)), prof.vector)
        return CommunityScenario(
            members=tuple(members),
            grid=TimeGrid(T, loads.step_hours),
            load=loads.values,
            pv=pv,
            storage=self.storage(),
            schedule=self.schedule(T),
            allow_grid_charging=bool(self.get("flags.allow_grid_charging", False)),
            metadata={"timestamps": loads.timestamps},
        )

    # -- allocation --------------------------------------------------------

    def rule(self) -> str:
        rule = self.get("allocation.rule", "pro_rata")
        if rule not in RULES:
            raise ConfigError(f"allocation.rule must be one of {RULES}, got {rule!r}")
        return rule

    # -- compliance --------------------------------------------------------

    def assets(self) -> list[GenerationAsset]:
        p = self.path("scenario.assets", required=False)
        if p is None:
            return []
        out = []
        for r in read_records(p, ["id"]):
            lat, lon = optional_float(r.get("latitude")), optional_float(r.get("longitude"))
            out.append(GenerationAsset(r["id"], r.get("connection_id") or None,
                                       None if lat is None or lon is None else (lat, lon),
                                       r.get("admin_region") or None))
        return out

    def proximity(self) -> Optional[ProximityMethod]:
        method = self.get("compliance.method")
        if method is None:
            return None
        if method == "network":
            allowed = self.get("compliance.allowed_transformers")
            return NetworkProximity(FeederGraph.from_csv(self.path("scenario.feeder")),
                                    None if allowed is None else frozenset(map(str, allowed)))
        if method == "distance":
            return DistanceProximity(float(self.require("compliance.radius_km")))
        if method == "admin":
            return AdminProximity()
        raise ConfigError(f"compliance.method must be network, distance or admin, got {method!r}")

    # -- sizing ------------------------------------------------------------

    def catalog(self, scenario: CommunityScenario) -> SizingCatalog:
        pv_opts = [PvOption(float(o["peak_kw"]), float(o["capex"]))
                   for o in self.require("sizing.pv_options")]
        st_opts = [StorageOption(float(o["capacity_kwh"]), float(o["power_kw"]), float(o["capex"]),
                                 float(o.get("charge_efficiency", 1.0)),
                                 float(o.get("discharge_efficiency", 1.0)))
                   for o in self.require("sizing.storage_options")]
        if self.get("sizing.full_year", False):
            per_day = int(round(24 / scenario.grid.step_hours))
            if scenario.pv is None:
                raise ConfigError("full-year sizing needs scenario.pv_profile")
            days = full_year_days(scenario.load, scenario.pv.normalized_profile, per_day)
        else:
            days = []
            for i, d in enumerate(self.require("sizing.days")):
                base = ScenarioConfig(flatten(d), self.base_dir)
                load = load_profiles(base.path("load"))
                pv = load_profiles(base.path("pv_profile"))
                days.append(RepresentativeDay(load.values, pv.vector, float(d["weight"])))
        return SizingCatalog(tuple(pv_opts), tuple(st_opts),
                             float(self.get("sizing.discount_rate", 0.0)),
                             int(self.get("sizing.lifetime_years", 25)), tuple(days),
                             float(self.get("sizing.initial_soc_fraction", 0.0)))
