#!/usr/bin/env python3
"""Write the scene, detection, annotation and trace fixtures.

Hand positions in the traces are computed here from the scene geometry with
a standalone re-implementation of the placement and layout rules, so the
scripted gestures land on the intended proxies. Run from the repo root:

    python3 scripts/make_fixtures.py
"""

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "fixtures"

IMAGE = [1280.0, 960.0]
CAMERA = {"fx": 800.0, "fy": 800.0, "cx": 640.0, "cy": 480.0}
HEAD = {"position": [0.0, 0.0, 0.0], "quaternion": [1.0, 0.0, 0.0, 0.0]}
WALL = {
    "vertices": [[-4.0, -3.0, 2.0], [4.0, -3.0, 2.0], [4.0, 3.0, 2.0], [-4.0, 3.0, 2.0]],
    "triangles": [[0, 1, 2], [0, 2, 3]],
}

PROXY = 0.03
PITCH = 0.035
WORKSPACE = 0.30
ANCHOR = [0.2, 0.1, 0.4]


def node(id_, label, bbox, attrs=None, children=None, world_pos=None):
    n = {
        "id": id_,
        "label": label,
        "bbox": [float(v) for v in bbox],
        "level": id_.count("."),
        "attributes": attrs or {},
        "children": children or [],
    }
    if world_pos is not None:
        n["world_pos"] = [float(v) for v in world_pos]
    return n


def walk(nodes, origin=(0.0, 0.0)):
    """Yield (node, image-frame bbox)."""
    for n in nodes:
        x, y, w, h = n["bbox"]
        box = (origin[0] + x, origin[1] + y, w, h)
        yield n, box
        yield from walk(n["children"], (box[0], box[1]))


def find(nodes, id_):
    for n, box in walk(nodes):
        if n["id"] == id_:
            return n, box
    raise KeyError(id_)


def world_position(scene, id_):
    n, box = find(scene["nodes"], id_)
    if "world_pos" in n:
        return n["world_pos"]
    # identity head, wall plane at z = 2
    u = box[0] + box[2] / 2
    v = box[1] + box[3] / 2
    z = 2.0
    return [(u - CAMERA["cx"]) / CAMERA["fx"] * z, (v - CAMERA["cy"]) / CAMERA["fy"] * z, z]


def dominant(d):
    best = 0
    for k in (1, 2):
        if abs(d[k]) > abs(d[best]):
            best = k
    return best


def layout(positions):
    """id -> world point  =>  id -> layout center (anchor-relative)."""
    ids = sorted(positions)
    world = [positions[i] for i in ids]
    n = len(ids)
    c = [sum(p[k] for p in world) / n for k in range(3)]
    centered = [[p[k] - c[k] for k in range(3)] for p in world]
    extent = max(max(p[k] for p in centered) - min(p[k] for p in centered) for k in range(3))
    scale = min(WORKSPACE / max(extent, 1e-6), 10.0)
    coords = [[0.0, 0.0, 0.0] for _ in ids]
    for k in range(3):
        order = sorted(range(n), key=lambda i: (world[i][k], ids[i]))
        for r, i in enumerate(order):
            v = scale * centered[i][k]
            for p in order[:r]:
                d = [world[i][j] - world[p][j] for j in range(3)]
                if dominant(d) == k:
                    v = max(v, coords[p][k] + PITCH)
            coords[i][k] = v
    return dict(zip(ids, coords))


def add(a, b):
    return [a[0] + b[0], a[1] + b[1], a[2] + b[2]]


def inside(p, center, half=PROXY / 2):
    return all(abs(p[k] - center[k]) <= half for k in range(3))


class Trace:
    def __init__(self):
        self.events = []
        self.t = 0

    def at(self, t, kind, **fields):
        assert t >= self.t
        self.t = t
        self.events.append({"t": t, "type": kind, **fields})

    def write(self, path):
        with open(path, "w") as f:
            for e in self.events:
                f.write(json.dumps(e, separators=(",", ":")) + "\n")


def scene(nodes, mesh=WALL, config=None):
    s = {"image_size": IMAGE, "camera": CAMERA, "head": HEAD, "mesh": mesh}
    if config:
        s["config"] = config
    s["nodes"] = nodes
    return s


def detections_for(nodes, key="root", out=None, base_score=0.99):
    """Detector fixture reproducing `nodes`; scores fall in sibling order."""
    out = {} if out is None else out
    dets = out.setdefault(key, [])
    for i, n in enumerate(nodes):
        dets.append({"bbox": n["bbox"], "label": n["label"], "score": round(base_score - 0.01 * i, 2)})
        detections_for(n["children"], n["id"], out)
    return out


def annotations_for(nodes):
    return {n["id"]: n["attributes"] for n, _ in walk(nodes) if n["attributes"]}


def check_sibling_order(nodes):
    areas = [n["bbox"][2] * n["bbox"][3] for n in nodes]
    assert areas == sorted(areas, reverse=True), [n["id"] for n in nodes]
    for n in nodes:
        check_sibling_order(n["children"])


def dump(obj, name):
    with open(ROOT / name, "w") as f:
        json.dump(obj, f, indent=2)
        f.write("\n")


# ---------------------------------------------------------------- office

BOOKS = [
    ("Distributed Systems", "Systems", 35, "blue"),
    ("Mixed Reality Design", "XR", 49, "red"),
    ("Compilers", "PL", 28, "green"),
    ("Deep Learning", "AI", 62, "black"),
    ("Interaction in XR", "XR", 59, "orange"),
    ("Type Theory", "PL", 55, "white"),
    ("Virtual Worlds", "XR", 38, "purple"),
    ("Databases", "Systems", 30, "blue"),
]


def office():
    books = []
    for i, (title, topic, price, color) in enumerate(BOOKS):
        children = []
        if i == 2:
            # too small to be searched further
            children = [node("1.1.3.1", "sticker", [10, 10, 16, 12], {"text": "sale"})]
        books.append(
            node(
                f"1.1.{i + 1}",
                "book",
                [20 + 55 * i, 100, 48, 160],
                {"title": title, "topic": topic, "price": price, "color": color},
                children,
            )
        )
    nodes = [
        node("1.1", "bookshelf", [240, 160, 480, 560], {"kind": "bookshelf", "material": "oak"}, books),
        node("1.2", "whiteboard", [760, 100, 400, 300], {"kind": "whiteboard"}),
        node("1.3", "rack", [800, 520, 320, 300], {"kind": "rack"}),
        node("1.4", "poster", [1200, 800, 80, 160], {"kind": "poster"}),
    ]
    check_sibling_order(nodes)
    s = scene(nodes)

    det = detections_for(nodes)
    # near-duplicate of the shelf and of one book; both must be suppressed
    det["root"].append({"bbox": [244.0, 164.0, 470.0, 550.0], "label": "bookshelf", "score": 0.6})
    det["1.1"].append({"bbox": [77.0, 102.0, 46.0, 156.0], "label": "book", "score": 0.5})
    # the poster runs off the image and is clipped
    det["root"][3]["bbox"] = [1200.0, 800.0, 200.0, 200.0]
    # would only be found if recursion went below min_bbox_px
    det["1.1.3.1"] = [{"bbox": [1.0, 1.0, 5.0, 5.0], "label": "dot", "score": 0.9}]
    ann = annotations_for(nodes)

    dump(s, "office.scene.json")
    dump(det, "office.detections.json")
    dump(ann, "office.annotations.json")

    # trace
    a = ANCHOR
    t = Trace()
    t.at(0, "GazeMove", px=[480.0, 440.0])
    t.at(10, "HandMove", hand="right", point=a)
    t.at(20, "PinchStart", hand="right")
    t.at(120, "PinchEnd", hand="right")

    # zoom into the shelf (single proxy at the anchor)
    t.at(200, "HandMove", hand="left", point=add(a, [-0.04, 0, 0]))
    t.at(210, "HandMove", hand="right", point=add(a, [0.04, 0, 0]))
    t.at(220, "PinchStart", hand="right")
    t.at(230, "PinchStart", hand="left")
    t.at(300, "HandMove", hand="right", point=add(a, [0.08, 0, 0]))
    t.at(350, "PinchEnd", hand="left")
    t.at(360, "PinchEnd", hand="right")

    pos = {f"1.1.{i + 1}": world_position(s, f"1.1.{i + 1}") for i in range(8)}
    lay = layout(pos)
    c = {k: add(a, v) for k, v in lay.items()}

    # skim across the first three books
    t.at(400, "HandMove", hand="right", point=add(c["1.1.1"], [-0.02, 0, 0]))
    t.at(410, "PinchStart", hand="right")
    t.at(420, "HandMove", hand="right", point=c["1.1.1"])
    t.at(440, "HandMove", hand="right", point=c["1.1.2"])
    t.at(460, "HandMove", hand="right", point=c["1.1.3"])
    t.at(470, "HandMove", hand="right", point=c["1.1.3"])
    t.at(480, "PinchEnd", hand="right")

    # hold an XR book, slide onto its topic attribute
    t.at(600, "HoldStart", point=c["1.1.2"])
    t.at(1150, "HandMove", hand="right", point=c["1.1.2"])
    keys = list(find(nodes, "1.1.2")[0]["attributes"])
    k = keys.index("topic")
    topic_proxy = add(c["1.1.2"], [(k - (len(keys) - 1) / 2) * PITCH, PITCH, 0])
    t.at(1200, "HandMove", hand="right", point=topic_proxy)
    t.at(1300, "HoldEnd")

    # brush three books, then retrace to two
    x4, x5, x6 = lay["1.1.4"][0], lay["1.1.5"][0], lay["1.1.6"][0]
    left = add(a, [x4 - 0.005, -0.02, -0.02])
    right3 = add(a, [x6, 0.08, 0.02])
    right2 = add(a, [x5, 0.08, 0.02])
    mid = [(left[i] + right3[i]) / 2 for i in range(3)]
    assert not any(inside(mid, v) for v in c.values())
    t.at(1400, "HandMove", hand="left", point=left)
    t.at(1410, "HandMove", hand="right", point=right3)
    t.at(1420, "PinchStart", hand="left")
    t.at(1430, "PinchStart", hand="right")
    t.at(1500, "HandMove", hand="right", point=right2)
    t.at(1550, "PinchEnd", hand="right")
    t.at(1560, "PinchEnd", hand="left")

    # empty-space brush below the row: a container
    cl = add(a, [-0.02, 0.04, -0.02])
    cr = add(a, [0.02, 0.08, 0.02])
    t.at(1700, "HandMove", hand="left", point=cl)
    t.at(1710, "HandMove", hand="right", point=cr)
    t.at(1720, "PinchStart", hand="left")
    t.at(1730, "PinchStart", hand="right")
    t.at(1800, "PinchEnd", hand="left")
    t.at(1810, "PinchEnd", hand="right")

    # hold the container, tap the two XR books in (one twice)
    cc = add(a, [0.0, 0.06, 0.0])
    t.at(1900, "HoldStart", point=cc)
    t.at(2000, "Tap", point=c["1.1.2"])
    t.at(2100, "Tap", point=c["1.1.5"])
    t.at(2150, "Tap", point=c["1.1.5"])
    t.at(2200, "HoldEnd")

    # pinch the container closed, then skim it
    t.at(2300, "HandMove", hand="left", point=add(cc, [-0.04, 0, 0]))
    t.at(2310, "HandMove", hand="right", point=add(cc, [0.04, 0, 0]))
    t.at(2320, "PinchStart", hand="left")
    t.at(2330, "PinchStart", hand="right")
    t.at(2400, "HandMove", hand="right", point=add(cc, [-0.03, 0, 0]))
    t.at(2450, "PinchEnd", hand="right")
    t.at(2460, "PinchEnd", hand="left")
    t.at(2500, "HandMove", hand="right", point=add(cc, [0.0, 0.0, -0.01]))
    t.at(2510, "PinchStart", hand="right")
    t.at(2600, "PinchEnd", hand="right")
    t.write(ROOT / "traces" / "office-01.jsonl")


# ---------------------------------------------------------------- kitchen


def kitchen():
    buttons = [
        node(f"1.1.2.{i + 1}", "button", [20, 20 + 70 * i, 110, 50], {"function": f})
        for i, f in enumerate(["start", "stop", "defrost"])
    ]
    microwave = node(
        "1.1",
        "microwave",
        [400, 300, 480, 320],
        {"kind": "appliance", "power_w": 900},
        [
            node("1.1.1", "door", [10, 10, 300, 300], {"state": "closed"}),
            node("1.1.2", "control panel", [320, 10, 150, 300], {"buttons": 3}, buttons),
        ],
    )
    nodes = [
        microwave,
        node("1.2", "fridge", [960, 60, 280, 520], {"kind": "appliance", "power_w": 150}),
        node("1.3", "kettle", [150, 420, 120, 160], {"kind": "appliance", "power_w": 2000}),
    ]
    check_sibling_order(nodes)
    s = scene(nodes)
    dump(s, "kitchen.scene.json")
    dump(detections_for(nodes), "kitchen.detections.json")
    dump(annotations_for(nodes), "kitchen.annotations.json")

    a = ANCHOR
    t = Trace()
    t.at(0, "GazeMove", px=[640.0, 460.0])
    t.at(10, "HandMove", hand="right", point=a)
    t.at(20, "PinchStart", hand="right")
    t.at(100, "PinchEnd", hand="right")

    def zoom(t0, focus, ratio_in):
        t.at(t0, "HandMove", hand="left", point=add(focus, [-0.04, 0, 0]))
        t.at(t0 + 10, "HandMove", hand="right", point=add(focus, [0.04, 0, 0]))
        t.at(t0 + 20, "PinchStart", hand="left")
        t.at(t0 + 30, "PinchStart", hand="right")
        dx = 0.08 if ratio_in else -0.03
        t.at(t0 + 80, "HandMove", hand="right", point=add(focus, [dx, 0, 0]))
        t.at(t0 + 120, "PinchEnd", hand="right")
        t.at(t0 + 130, "PinchEnd", hand="left")

    zoom(200, a, True)
    lvl2 = layout({i: world_position(s, i) for i in ["1.1.1", "1.1.2"]})
    door, panel = add(a, lvl2["1.1.1"]), add(a, lvl2["1.1.2"])
    zoom(400, door, True)  # the door has no parts
    zoom(600, panel, True)
    lvl3 = layout({f"1.1.2.{i}": world_position(s, f"1.1.2.{i}") for i in (1, 2, 3)})
    b2 = add(a, lvl3["1.1.2.2"])
    t.at(800, "HandMove", hand="right", point=add(b2, [0, 0, -0.03]))
    t.at(810, "PinchStart", hand="right")
    t.at(820, "HandMove", hand="right", point=b2)
    t.at(900, "PinchEnd", hand="right")
    zoom(1000, b2, False)
    zoom(1200, door, False)
    zoom(1400, a, False)  # already at the top
    t.write(ROOT / "traces" / "kitchen-01.jsonl")


# ---------------------------------------------------------------- building

DEPARTMENTS = {
    "1.1": ["Radiology", "Radiology", "Cardiology", "Pharmacy"],
    "1.2": ["Cardiology", "Pharmacy", "Pharmacy", "Radiology"],
}


def building():
    floors = []
    for f, (fid, y_img, y_world) in enumerate([("1.1", 500, 0.8), ("1.2", 60, -0.8)]):
        rooms = []
        for i, dept in enumerate(DEPARTMENTS[fid]):
            rooms.append(
                node(
                    f"{fid}.{i + 1}",
                    "room",
                    [20 + 215 * i, 40, 200, 280],
                    {"name": f"{f + 1}0{i + 1}", "department": dept, "occupancy": 4 + 3 * i + f},
                    world_pos=[-1.5 + i, y_world, 6.0],
                )
            )
        floors.append(
            node(fid, "floor", [200, y_img, 880, 360], {"floor": f + 1}, rooms, world_pos=[0.0, y_world, 6.0])
        )
    nodes = floors
    check_sibling_order(nodes)
    s = scene(nodes, mesh={"vertices": [], "triangles": []})
    dump(s, "building.scene.json")
    dump(detections_for(nodes), "building.detections.json")
    dump(annotations_for(nodes), "building.annotations.json")

    a = ANCHOR
    t = Trace()
    t.at(0, "GazeMove", px=[640.0, 680.0])
    t.at(10, "HandMove", hand="right", point=a)
    t.at(20, "PinchStart", hand="right")
    t.at(100, "PinchEnd", hand="right")

    def pinch_pair(t0, focus, dx_end):
        t.at(t0, "HandMove", hand="left", point=add(focus, [-0.04, 0, 0]))
        t.at(t0 + 10, "HandMove", hand="right", point=add(focus, [0.04, 0, 0]))
        t.at(t0 + 20, "PinchStart", hand="left")
        t.at(t0 + 30, "PinchStart", hand="right")
        t.at(t0 + 80, "HandMove", hand="right", point=add(focus, [dx_end, 0, 0]))
        t.at(t0 + 120, "PinchEnd", hand="right")
        t.at(t0 + 130, "PinchEnd", hand="left")

    pinch_pair(200, a, 0.08)
    rooms = [f"1.1.{i}" for i in range(1, 5)]
    lay = layout({r: world_position(s, r) for r in rooms})
    c = {k: add(a, v) for k, v in lay.items()}
    t.at(500, "DoubleTap", point=c["1.1.1"], key="department")

    parts = {}
    for r in rooms:
        d = find(nodes, r)[0]["attributes"]["department"]
        parts.setdefault(d, []).append(r)
    cent = {
        f"group:department={d}": [sum(world_position(s, m)[k] for m in ms) / len(ms) for k in range(3)]
        for d, ms in parts.items()
    }
    play = layout(cent)
    pc = {k: add(a, v) for k, v in play.items()}
    ids = list(cent)
    # skim the partition proxies
    t.at(700, "HandMove", hand="right", point=add(pc[ids[0]], [0, 0, -0.02]))
    t.at(710, "PinchStart", hand="right")
    for j, gid in enumerate(ids):
        t.at(720 + 20 * j, "HandMove", hand="right", point=pc[gid])
    t.at(800, "PinchEnd", hand="right")
    # open the first partition, then back out twice
    pinch_pair(900, pc[ids[0]], 0.08)
    members = parts[ids[0].split("=", 1)[1]]
    mlay = layout({m: world_position(s, m) for m in members})
    pinch_pair(1100, add(a, mlay[members[0]]), -0.03)
    pinch_pair(1300, c["1.1.1"], -0.03)
    t.write(ROOT / "traces" / "building-01.jsonl")


# ---------------------------------------------------------------- drones

DRONES = [
    ("1.1", [-1.6, -1.0, 4.0], "full"),
    ("1.2", [-0.9, -1.0, 5.0], "low"),
    ("1.3", [-0.4, -1.0, 4.2], "full"),
    ("1.4", [0.5, -1.0, 4.6], "full"),
    ("1.5", [1.2, -1.0, 5.2], "low"),
    ("1.6", [1.8, -1.0, 4.1], "full"),
]


def drones():
    nodes = []
    for i, (id_, p, battery) in enumerate(DRONES):
        u = CAMERA["cx"] + CAMERA["fx"] * p[0] / p[2]
        v = CAMERA["cy"] + CAMERA["fy"] * p[1] / p[2]
        nodes.append(
            node(
                id_,
                "drone",
                [round(u - 30), round(v - 20), 60, 40],
                {"battery": battery, "model": "quad-x" if i % 2 else "quad-s", "altitude_m": 10 + 2 * i},
                world_pos=p,
            )
        )
    s = scene(nodes, mesh={"vertices": [], "triangles": []}, config={"gaze_extension_m": 2.0})
    dump(s, "drone.scene.json")

    a = ANCHOR
    lay = layout({id_: p for id_, p, _ in DRONES})
    c = {k: add(a, v) for k, v in lay.items()}
    gaze = find(nodes, "1.3")[1]

    t = Trace()
    t.at(0, "GazeMove", px=[gaze[0] + gaze[2] / 2, gaze[1] + gaze[3] / 2])
    t.at(10, "HandMove", hand="right", point=a)
    t.at(20, "PinchStart", hand="right")
    t.at(100, "PinchEnd", hand="right")

    # filter battery=full through the held drone's attribute row
    t.at(200, "HoldStart", point=c["1.3"])
    t.at(750, "HandMove", hand="right", point=c["1.3"])
    keys = list(nodes[2]["attributes"])
    battery = add(c["1.3"], [(keys.index("battery") - (len(keys) - 1) / 2) * PITCH, PITCH, 0])
    t.at(800, "HandMove", hand="right", point=battery)
    t.at(900, "HoldEnd")

    # brush the left half of the layout
    left_ids = [i for i, p, _ in DRONES if p[0] < 0]
    right_ids = [i for i, p, _ in DRONES if p[0] >= 0]
    lx_max = max(lay[i][0] for i in left_ids) + PROXY / 2
    rx_min = min(lay[i][0] for i in right_ids) - PROXY / 2
    assert lx_max < rx_min, (lx_max, rx_min)
    split = (lx_max + rx_min) / 2
    xs = [lay[i][0] for i in lay]
    zs = [lay[i][2] for i in lay]
    bl = add(a, [min(xs) - 0.02, -0.02, min(zs) - 0.02])
    br = add(a, [split, 0.08, max(zs) + 0.02])
    mid = [(bl[k] + br[k]) / 2 for k in range(3)]
    assert not any(inside(mid, v) for v in c.values())
    t.at(1000, "HandMove", hand="left", point=bl)
    t.at(1010, "HandMove", hand="right", point=br)
    t.at(1020, "PinchStart", hand="left")
    t.at(1030, "PinchStart", hand="right")
    t.at(1100, "PinchEnd", hand="right")
    t.at(1110, "PinchEnd", hand="left")

    # drag a selected drone forward
    start = c["1.1"]
    t.at(1200, "HandMove", hand="right", point=start)
    t.at(1210, "PinchStart", hand="right")
    t.at(1300, "HandMove", hand="right", point=add(start, [0.0, 0.0, 0.125]))
    t.at(1400, "PinchEnd", hand="right")

    # walk away: the panel lazily follows
    far = add(a, [0.3, 0.0, 0.0])
    t.at(1500, "HandMove", hand="right", point=far)
    for k in range(4):
        t.at(1550 + 50 * k, "Tick", dt=0.05)
    t.write(ROOT / "traces" / "drone-01.jsonl")


if __name__ == "__main__":
    (ROOT / "traces").mkdir(parents=True, exist_ok=True)
    office()
    kitchen()
    building()
    drones()
