"""Regenerate the bundled example community (deterministic, no RNG).

A 15-member community on a sunny June day in the south of France, on a
30-minute grid. Loads and PV are synthetic and only meant for demos and
golden-file tests.
"""

import csv
import math
from datetime import datetime, timedelta
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "ecplan" / "data" / "example"
DAY = datetime(2020, 6, 21)
T = 48
N = 15


def stamps():
    return [(DAY + timedelta(minutes=30 * t)).isoformat(timespec="minutes") for t in range(T)]


def pv_shape(hour, scale=1.0):
    # kWh per kWp per half hour, clear-sky bell between 06:00 and 21:30
    if not 6.0 <= hour <= 21.5:
        return 0.0
    return round(scale * 0.5 * 0.85 * math.sin(math.pi * (hour - 6.0) / 15.5) ** 1.5, 6)


def member_load(n, hour):
    base = 0.12 + 0.015 * (n % 5)
    morning = 0.35 * math.exp(-((hour - 7.5 - 0.1 * (n % 3)) ** 2) / 1.2)
    evening = 0.55 * math.exp(-((hour - 19.5 - 0.2 * (n % 4)) ** 2) / 2.5)
    if n in (4, 11):  # small businesses, daytime load
        midday = 0.9 * math.exp(-((hour - 13.0) ** 2) / 12.0)
        return round(base + midday, 3)
    if n == 7:  # town hall
        return round(base + 0.6 * math.exp(-((hour - 11.0) ** 2) / 8.0), 3)
    return round((base + morning + evening) * (0.8 + 0.05 * (n % 6)), 3)


def write(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    ids = [f"m{n + 1:02d}" for n in range(N)]
    ts = stamps()
    hours = [0.5 * t + 0.25 for t in range(T)]
    write(OUT / "load.csv", ["timestamp", *ids],
          [[ts[t], *(f"{member_load(n, hours[t]):.3f}" for n in range(N))] for t in range(T)])
    write(OUT / "pv.csv", ["timestamp", "pv"], [[ts[t], f"{pv_shape(hours[t]):.6f}"] for t in range(T)])
    winter = [(DAY.replace(month=12) + timedelta(minutes=30 * t)).isoformat(timespec="minutes") for t in range(T)]
    write(OUT / "pv_winter.csv", ["timestamp", "pv"],
          [[winter[t], f"{pv_shape(hours[t] * 1.3 - 4.0, 0.45):.6f}"] for t in range(T)])
    write(OUT / "load_winter.csv", ["timestamp", *ids],
          [[winter[t], *(f"{1.3 * member_load(n, hours[t]):.3f}" for n in range(N))] for t in range(T)])

    cats = {4: "SME", 11: "SME", 7: "local-authority"}
    rows = []
    for n, mid in enumerate(ids):
        share = "0.11" if n in (4, 7) else "0.06"
        lat = 42.6990 + 0.0012 * (n % 5)
        lon = 2.8950 + 0.0015 * (n // 5)
        rows.append([mid, cats.get(n, "natural-person"), share, f"{lat:.4f}", f"{lon:.4f}",
                     "66-Perpignan", f"cp{n + 1:02d}", "true" if n in (2, 8) else "false"])
    write(OUT / "members.csv",
          ["id", "category", "voting_share", "latitude", "longitude", "admin_region",
           "transformer_id", "vulnerable"], rows)

    feeder = [["T1", "", "transformer"], ["F1", "T1", "connection"], ["F2", "T1", "connection"]]
    for n in range(N):
        feeder.append([f"cp{n + 1:02d}", "F1" if n < 8 else "F2", "connection"])
    feeder.append(["cpPV", "T1", "connection"])
    feeder.append(["T2", "", "transformer"])
    feeder.append(["cpX", "T2", "connection"])
    write(OUT / "feeder.csv", ["child_id", "parent_id", "node_kind"], feeder)
    write(OUT / "assets.csv", ["id", "connection_id", "latitude", "longitude", "admin_region"],
          [["PV1", "cpPV", "42.7010", "2.8970", "66-Perpignan"]])


if __name__ == "__main__":
    main()
