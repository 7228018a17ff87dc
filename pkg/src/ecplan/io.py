"""CSV/JSON readers and writers with fixed formatting.

Energies are written with 9 decimals and money with 2, so identical inputs
give byte-identical files on every platform.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import datetime
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from ecplan.tariffs import to_cents

PathLike = Union[str, Path]


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class Profiles:
    columns: tuple[str, ...]
    values: np.ndarray  # T x N
    step_hours: float
    timestamps: tuple[str, ...]

    @property
    def vector(self) -> np.ndarray:
        if self.values.shape[1] != 1:
            raise ProfileError(f"expected a single value column, found {len(self.columns)}")
        return self.values[:, 0]


def energy(x: float) -> str:
    s = f"{float(x):.9f}"
    return "0.000000000" if s == "-0.000000000" else s


def money(x: Union[float, Decimal]) -> str:
    return str(to_cents(x) if not isinstance(x, Decimal) else x.quantize(Decimal("0.01")))


def load_profiles(path: PathLike) -> Profiles:
    """Read ``timestamp,<col>,...`` rows of kWh per period on a uniform grid."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "timestamp" or len(header) < 2:
            raise ProfileError(f"{path}: header must be 'timestamp,<column>,...'")
        columns = tuple(h.strip() for h in header[1:])
        stamps: list[datetime] = []
        raw_stamps: list[str] = []
        rows: list[list[float]] = []
        seen: dict[datetime, int] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ProfileError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                ts = datetime.fromisoformat(row[0].strip())
            except ValueError:
                raise ProfileError(f"{path}:{lineno}: bad timestamp {row[0]!r}") from None
            if ts in seen:
                raise ProfileError(f"{path}:{lineno}: duplicated timestamp {row[0].strip()} "
                                   f"(first seen on line {seen[ts]})")
            seen[ts] = lineno
            try:
                rows.append([float(c) for c in row[1:]])
            except ValueError:
                raise ProfileError(f"{path}:{lineno}: non-numeric value in {row[1:]}") from None
            stamps.append(ts)
            raw_stamps.append(row[0].strip())
    if not rows:
        raise ProfileError(f"{path}: no data rows")
    if len(stamps) == 1:
        step = 0.5
    else:
        deltas = {(b - a).total_seconds() for a, b in zip(stamps, stamps[1:])}
        if len(deltas) != 1:
            raise ProfileError(f"{path}: non-uniform time step {sorted(deltas)} s")
        secs = deltas.pop()
        if secs <= 0:
            raise ProfileError(f"{path}: timestamps must increase")
        step = secs / 3600
    return Profiles(columns, np.array(rows, dtype=float), step, tuple(raw_stamps))


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path: PathLike, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def write_table(out_dir: Path, stem: str, header: Sequence[str], rows: list[list[str]],
                fmt: str = "csv") -> Path:
    """Write a table as CSV, or as a JSON list of records when ``fmt == 'json'``."""
    if fmt == "json":
        path = out_dir / f"{stem}.json"
        write_json(path, [dict(zip(header, r)) for r in rows])
    else:
        path = out_dir / f"{stem}.csv"
        write_csv(path, header, rows)
    return path


NANO = 10**9


def to_nano(values) -> np.ndarray:
    """Energies as integer multiples of 1e-9 kWh."""
    return np.rint(np.asarray(values, dtype=float) * NANO).astype(np.int64)


def fmt_nano(n: int) -> str:
    n = int(n)
    sign = "-" if n < 0 else ""
    q, r = divmod(abs(n), NANO)
    return f"{sign}{q}.{r:09d}"


@dataclass(frozen=True)
class RoundedKey:
    """A key on the 1e-9 kWh output grid whose rows still sum to the target."""

    key: np.ndarray  # T x N int64, nano-kWh
    shared: np.ndarray
    load: np.ndarray
    allocated: np.ndarray
    surplus: np.ndarray


def round_key(G, g, L) -> RoundedKey:
    G = np.asarray(G, dtype=float)
    scaled = np.maximum(G, 0.0) * NANO
    base = np.floor(scaled).astype(np.int64)
    frac = scaled - base
    shared = to_nano(g)
    load = to_nano(np.asarray(L, dtype=float).sum(axis=1))
    allocated = np.minimum(shared, load)
    for t in range(G.shape[0]):
        # largest remainder: round up the entries with the biggest fractional parts
        k = int(np.clip(allocated[t] - base[t].sum(), 0, G.shape[1]))
        if k:
            up = np.argsort(-frac[t], kind="stable")[:k]
            base[t, up] += 1
    return RoundedKey(base, shared, load, base.sum(axis=1), np.maximum(shared - load, 0))


def key_rows(G: np.ndarray, g=None, L=None) -> list[list[str]]:
    if g is None:
        return [[str(t)] + [energy(v) for v in G[t]] for t in range(G.shape[0])]
    nano = round_key(G, g, L).key
    return [[str(t)] + [fmt_nano(v) for v in nano[t]] for t in range(G.shape[0])]


def read_key_csv(path: PathLike) -> tuple[list[str], np.ndarray]:
    """Read a key written by :func:`key_rows` (``period,<member ids>``)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "period":
            raise ProfileError(f"{path}: header must start with 'period'")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ProfileError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(c) for c in row[1:]])
            except ValueError:
                raise ProfileError(f"{path}:{lineno}: non-numeric value") from None
    if not rows:
        raise ProfileError(f"{path}: no data rows")
    return header[1:], np.array(rows, dtype=float)


def read_records(path: PathLike, required: Sequence[str]) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(required) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return [{k: (v or "").strip() for k, v in row.items()} for row in reader]


def optional_float(text: Optional[str]) -> Optional[float]:
    return None if text in (None, "") else float(text)
