"""Legal checks for renewable (REC) and citizen (CEC) energy communities.

Two families of rules are implemented: proximity of the controlling
members to the community's generation assets (by feeder topology, by
distance or by administrative region) and governance (who may be a member
and who may control). Control means a voting share strictly above a
configurable threshold.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from ecplan.model import VOTING_SHARE_TOL, Category, Member

EARTH_RADIUS_KM = 6371.0
REC_ELIGIBLE = frozenset({Category.NATURAL_PERSON, Category.SME, Category.LOCAL_AUTHORITY})

TRANSFORMER = "transformer"
CONNECTION = "connection"


@dataclass(frozen=True)
class Finding:
    rule: str
    severity: str  # "violation" or "warning"
    message: str
    members: tuple[str, ...] = ()


@dataclass(frozen=True)
class ComplianceVerdict:
    community_type: str
    findings: tuple[Finding, ...]

    @property
    def passed(self) -> bool:
        return not any(f.severity == "violation" for f in self.findings)

    def as_dict(self) -> dict:
        return {
            "community_type": self.community_type,
            "passed": self.passed,
            "findings": [
                {"rule": f.rule, "severity": f.severity, "message": f.message,
                 "members": list(f.members)}
                for f in self.findings
            ],
        }


@dataclass(frozen=True)
class GenerationAsset:
    id: str
    connection_id: Optional[str] = None
    location: Optional[tuple[float, float]] = None
    admin_region: Optional[str] = None


class FeederGraph:
    """Radial feeder as a forest of transformers and connection points."""

    def __init__(self, edges: Iterable[tuple[str, Optional[str], str]]):
        self.parent: dict[str, Optional[str]] = {}
        self.kind: dict[str, str] = {}
        for child, parent, kind in edges:
            if child in self.parent:
                raise ValueError(f"node {child!r} is listed twice; a feeder node has one parent")
            if kind not in (TRANSFORMER, CONNECTION):
                raise ValueError(f"node {child!r}: kind must be {TRANSFORMER!r} or {CONNECTION!r}, got {kind!r}")
            self.parent[child] = parent or None
            self.kind[child] = kind
        for child, parent in self.parent.items():
            if parent is not None and parent not in self.parent:
                raise ValueError(f"node {child!r} refers to unknown parent {parent!r}")
        for node in self.parent:
            self._path(node)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "FeederGraph":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = {"child_id", "parent_id", "node_kind"} - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"{path}: missing columns {sorted(missing)}")
            rows = [(r["child_id"].strip(), r["parent_id"].strip(), r["node_kind"].strip())
                    for r in reader]
        return cls(rows)

    def _path(self, node: str) -> list[str]:
        path, seen = [], set()
        while node is not None:
            if node in seen:
                raise ValueError(f"cycle through node {node!r}")
            seen.add(node)
            path.append(node)
            node = self.parent[node]
        return path

    def __contains__(self, node: str) -> bool:
        return node in self.parent

    def transformers_above(self, node: str) -> frozenset[str]:
        """Transformers on the path from ``node`` to its root, ``node`` included."""
        if node not in self.parent:
            raise KeyError(node)
        return frozenset(n for n in self._path(node) if self.kind[n] == TRANSFORMER)

    def merge(self, keep: str, drop: str) -> "FeederGraph":
        """Copy with transformer ``drop`` folded into ``keep``."""
        edges = []
        for child, parent in self.parent.items():
            if child == drop:
                continue
            edges.append((child, keep if parent == drop else parent, self.kind[child]))
        return FeederGraph(edges)


@dataclass(frozen=True)
class NetworkProximity:
    graph: FeederGraph
    allowed_transformers: Optional[frozenset[str]] = None
    name: str = field(default="network", init=False)


@dataclass(frozen=True)
class DistanceProximity:
    radius_km: float
    name: str = field(default="distance", init=False)


@dataclass(frozen=True)
class AdminProximity:
    name: str = field(default="admin", init=False)


ProximityMethod = Union[NetworkProximity, DistanceProximity, AdminProximity]


def great_circle_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Haversine distance between two (lat, lon) points in degrees."""
    lat1, lon1, lat2, lon2 = map(math.radians, (*a, *b))
    h = (math.sin((lat2 - lat1) / 2) ** 2
         + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2)
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def controlling_members(members: Sequence[Member]) -> list[Member]:
    """Members that take part in control, i.e. hold any vote."""
    return [m for m in members if m.voting_share > 0]


def _require(items, attr: str, method: str, what: str):
    for item in items:
        if getattr(item, attr) is None:
            raise ValueError(f"{what} {item.id!r} has no {attr.replace('_', ' ')}, "
                             f"required by the {method} proximity check")


def check_proximity(members: Sequence[Member], assets: Sequence[GenerationAsset],
                    method: ProximityMethod,
                    controllers: Optional[Sequence[Member]] = None) -> list[Finding]:
    if controllers is None:
        controllers = controlling_members(members)
    if not assets:
        return [Finding("proximity-assets", "violation", "community has no generation assets")]
    findings: list[Finding] = []

    if isinstance(method, NetworkProximity):
        _require(controllers, "transformer_id", "network", "member")
        _require(assets, "connection_id", "network", "asset")
        graph = method.graph
        for item, node in [(m, m.transformer_id) for m in controllers] + [(a, a.connection_id) for a in assets]:
            if node not in graph:
                raise ValueError(f"{item.id!r} is attached to {node!r}, which is not in the feeder graph")
        common = frozenset.intersection(*(graph.transformers_above(a.connection_id) for a in assets))
        if method.allowed_transformers is not None:
            common &= method.allowed_transformers
        if not common:
            findings.append(Finding("proximity-network", "violation",
                                    "generation assets share no eligible MV/LV transformer"))
            return findings
        outside = sorted(m.id for m in controllers
                         if not graph.transformers_above(m.transformer_id) & common)
        if outside:
            findings.append(Finding(
                "proximity-network", "violation",
                f"members not below a transformer shared with the assets: {', '.join(outside)}",
                tuple(outside)))

    elif isinstance(method, DistanceProximity):
        _require(controllers, "location", "distance", "member")
        _require(assets, "location", "distance", "asset")
        far = []
        for m in controllers:
            nearest = min(great_circle_km(m.location, a.location) for a in assets)
            if nearest > method.radius_km:
                far.append((m.id, nearest))
        far.sort()
        if far:
            detail = ", ".join(f"{mid} ({d:.3f} km)" for mid, d in far)
            findings.append(Finding("proximity-distance", "violation",
                                    f"members farther than {method.radius_km} km from every asset: {detail}",
                                    tuple(mid for mid, _ in far)))

    elif isinstance(method, AdminProximity):
        _require(controllers, "admin_region", "admin", "member")
        _require(assets, "admin_region", "admin", "asset")
        regions = {a.admin_region for a in assets}
        outside = sorted(m.id for m in controllers if m.admin_region not in regions)
        if outside:
            findings.append(Finding("proximity-admin", "violation",
                                    f"members outside the assets' region(s) {sorted(regions)}: {', '.join(outside)}",
                                    tuple(outside)))
    else:
        raise TypeError(f"unknown proximity method {method!r}")
    return findings


def check_governance(members: Sequence[Member], community_type: str,
                     control_threshold: float = 0.5,
                     autonomy_threshold: float = 0.5) -> list[Finding]:
    community_type = community_type.upper()
    if community_type not in ("REC", "CEC"):
        raise ValueError(f"community type must be REC or CEC, got {community_type!r}")
    total = math.fsum(m.voting_share for m in members)
    if abs(total - 1.0) > VOTING_SHARE_TOL:
        raise ValueError(f"voting shares sum {total:g} ≠ 1")

    findings: list[Finding] = []
    controllers = [m for m in members if m.voting_share > control_threshold]

    if community_type == "REC":
        ineligible = sorted(m.id for m in members if m.category not in REC_ELIGIBLE)
        if ineligible:
            findings.append(Finding(
                "rec-membership", "violation",
                "REC members must be natural persons, SMEs or local authorities: "
                + ", ".join(ineligible), tuple(ineligible)))

    energy = sorted(m.id for m in controllers if m.category is Category.ENERGY_COMPANY)
    if energy:
        findings.append(Finding("energy-sector-control", "violation",
                                "energy-sector control by " + ", ".join(energy), tuple(energy)))

    if community_type == "CEC":
        large = sorted(m.id for m in controllers if m.category is Category.MEDIUM_LARGE_ENTERPRISE)
        if large:
            findings.append(Finding("cec-enterprise-control", "violation",
                                    "medium or large enterprise in control of a CEC: " + ", ".join(large),
                                    tuple(large)))
    else:
        dominant = sorted(m.id for m in members if m.voting_share > autonomy_threshold)
        if dominant:
            findings.append(Finding("rec-autonomy", "warning",
                                    "a single member can outvote the rest of the community: "
                                    + ", ".join(dominant), tuple(dominant)))
    return findings


def check_compliance(members: Sequence[Member], community_type: str,
                     assets: Sequence[GenerationAsset] = (),
                     method: Optional[ProximityMethod] = None,
                     control_threshold: float = 0.5,
                     autonomy_threshold: float = 0.5) -> ComplianceVerdict:
    findings = check_governance(members, community_type, control_threshold, autonomy_threshold)
    if method is not None:
        findings += check_proximity(members, assets, method)
    findings.sort(key=lambda f: (f.rule, f.severity, f.members, f.message))
    return ComplianceVerdict(community_type.upper(), tuple(findings))
