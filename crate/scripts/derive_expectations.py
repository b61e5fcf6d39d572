#!/usr/bin/env python3
"""Compute the facts the golden traces must reproduce, straight from the
fixture files and without using the engine:

- office: XR book ids, the two XR books the trace adds to its container and
  their price sum
- kitchen: ids under the microwave, and under its control panel
- building: department partitions of the ground-floor rooms, in room order
- drone: full-battery drones and the drones left of the fleet centroid

Writes fixtures/expectations.json. Run from the repo root.
"""

import json
from pathlib import Path

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def load(name):
    with open(FIX / name) as f:
        return json.load(f)


def nodes_by_id(nodes, out=None):
    out = {} if out is None else out
    for n in nodes:
        out[n["id"]] = n
        nodes_by_id(n["children"], out)
    return out


def by_label(nodes, label):
    return [n for n in nodes_by_id(nodes).values() if n["label"] == label]


def office():
    s = load("office.scene.json")
    books = by_label(s["nodes"], "book")
    xr = sorted(b["id"] for b in books if b["attributes"].get("topic") == "XR")
    members = xr[:2]
    prices = {b["id"]: b["attributes"]["price"] for b in books}
    return {
        "xr_books": xr,
        "container_members": members,
        "container_price_sum": sum(prices[m] for m in members),
        "skimmed": sorted(b["id"] for b in books)[:3],
    }


def kitchen():
    s = load("kitchen.scene.json")
    (mw,) = by_label(s["nodes"], "microwave")
    (panel,) = by_label(s["nodes"], "control panel")
    return {
        "microwave_parts": [c["id"] for c in mw["children"]],
        "panel_parts": [c["id"] for c in panel["children"]],
    }


def building():
    s = load("building.scene.json")
    (ground,) = [f for f in by_label(s["nodes"], "floor") if f["attributes"]["floor"] == 1]
    parts = {}
    for room in ground["children"]:
        parts.setdefault(room["attributes"]["department"], []).append(room["id"])
    return {"department_partitions": [{"department": d, "members": m} for d, m in parts.items()]}


def drone():
    s = load("drone.scene.json")
    drones = by_label(s["nodes"], "drone")
    cx = sum(d["world_pos"][0] for d in drones) / len(drones)
    return {
        "full_battery": sorted(d["id"] for d in drones if d["attributes"]["battery"] == "full"),
        "left_half": sorted(d["id"] for d in drones if d["world_pos"][0] < cx),
    }


if __name__ == "__main__":
    out = {"office": office(), "kitchen": kitchen(), "building": building(), "drone": drone()}
    with open(FIX / "expectations.json", "w") as f:
        json.dump(out, f, indent=2)
        f.write("\n")
    print(json.dumps(out, indent=2))
