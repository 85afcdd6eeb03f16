#!/usr/bin/env python3
"""Writes data/maps/carson_demo_corridor.json.

Two northbound lane chains with three signalized intersections each,
laid out near Carson, CA. Positions come from a local east/north offset
around each chain's origin with a gentle lateral weave so that segments
are not perfectly collinear.
"""
import argparse
import json
import math
from pathlib import Path

EARTH_RADIUS_M = 6371008.8

CHAINS = [
    {
        "prefix": "WIL",
        "road": "Wilmington Ave",
        "origin": (33.8200, -118.2390),
        "speed_limit_mps": 15.65,  # 35 mph
        "signals": {700.0: 101, 1500.0: 102, 2300.0: 103},
    },
    {
        "prefix": "ALA",
        "road": "Alameda St",
        "origin": (33.8200, -118.2200),
        "speed_limit_mps": 20.1,  # 45 mph
        "signals": {700.0: 201, 1500.0: 202, 2300.0: 203},
    },
]
LENGTH_M = 3000.0
STEPS_M = [120.0, 135.0, 110.0, 145.0, 100.0, 130.0, 150.0, 115.0]
SIGNAL_GROUP = 2  # northbound through movement


def offset(origin, east_m, north_m):
    lat0, lon0 = origin
    dlat = north_m / EARTH_RADIUS_M
    dlon = east_m / (EARTH_RADIUS_M * math.cos(math.radians(lat0)))
    return lat0 + math.degrees(dlat), lon0 + math.degrees(dlon)


def bearing(a, b):
    p1, p2 = math.radians(a[0]), math.radians(b[0])
    dl = math.radians(b[1] - a[1])
    y = math.sin(dl) * math.cos(p2)
    x = math.cos(p1) * math.sin(p2) - math.sin(p1) * math.cos(p2) * math.cos(dl)
    return math.degrees(math.atan2(y, x)) % 360.0


def stations(signal_positions):
    """Along-road node positions: fixed step pattern, snapped to signals."""
    out = [0.0]
    targets = sorted(signal_positions) + [LENGTH_M]
    k = 0
    for target in targets:
        while out[-1] < target:
            step = STEPS_M[k % len(STEPS_M)]
            k += 1
            nxt = out[-1] + step
            if nxt > target - 60.0:
                nxt = target
            out.append(nxt)
    return out


def build():
    doc = {"nodes": [], "segments": [], "signals": []}
    for chain in CHAINS:
        pts = stations(chain["signals"].keys())
        ids = []
        for i, s in enumerate(pts):
            east = 6.0 * math.sin(s / 400.0)
            lat, lon = offset(chain["origin"], east, s)
            node_id = f"{chain['prefix']}-N{i:02d}"
            ids.append((node_id, (round(lat, 8), round(lon, 8))))
            doc["nodes"].append({"id": node_id, "lat": round(lat, 8), "lon": round(lon, 8)})
            if s in chain["signals"]:
                doc["signals"].append(
                    {"node_id": node_id, "intersection_id": chain["signals"][s], "signal_group_id": SIGNAL_GROUP}
                )
        for i in range(len(ids) - 1):
            (a, pa), (b, pb) = ids[i], ids[i + 1]
            doc["segments"].append(
                {
                    "id": f"{chain['prefix']}-S{i:02d}",
                    "from": a,
                    "to": b,
                    "speed_limit_mps": chain["speed_limit_mps"],
                    "road_name": chain["road"],
                    "heading_deg": round(bearing(pa, pb), 2),
                }
            )
    return doc


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    root = Path(__file__).resolve().parent.parent
    parser.add_argument("-o", "--out", type=Path, default=root / "data" / "maps" / "carson_demo_corridor.json")
    args = parser.parse_args()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(build(), indent=2) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
