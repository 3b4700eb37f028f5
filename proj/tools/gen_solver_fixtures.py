#!/usr/bin/env python3
"""Generate the solver benchmark scenes.

Each scene starts from a valid layout (objects resting on the floor or on
furniture tops, no overlaps, inside their rooms). Assertions are then drawn
from relations that hold in that layout, so every program is satisfiable.
The layout is written next to the program as <name>.truth.json.

usage: gen_solver_fixtures.py [outdir]
"""

import json
import math
import random
import sys
from pathlib import Path

FLOOR = [
    # name, (w, h, d), surface
    ("sofa", (2.0, 0.9, 0.9), False),
    ("bed", (2.0, 0.6, 1.6), False),
    ("dining_table", (1.4, 0.75, 0.8), True),
    ("desk", (1.2, 0.75, 0.6), True),
    ("bookshelf", (0.9, 1.8, 0.35), False),
    ("wardrobe", (1.2, 2.0, 0.6), False),
    ("cabinet", (0.8, 0.9, 0.45), True),
    ("tv_stand", (1.5, 0.5, 0.4), True),
    ("armchair", (0.9, 0.9, 0.9), False),
    ("nightstand", (0.5, 0.55, 0.4), True),
    ("chair", (0.5, 0.9, 0.5), False),
    ("coffee_table", (1.0, 0.45, 0.6), True),
    ("plant", (0.4, 1.2, 0.4), False),
    ("floor_lamp", (0.35, 1.6, 0.35), False),
    ("dresser", (1.0, 0.8, 0.5), True),
    ("stool", (0.4, 0.6, 0.4), False),
]
SMALL = [
    ("lamp", (0.3, 0.5, 0.3)),
    ("vase", (0.2, 0.35, 0.2)),
    ("book", (0.25, 0.05, 0.18)),
    ("laptop", (0.35, 0.03, 0.25)),
    ("bowl", (0.25, 0.1, 0.25)),
    ("clock", (0.3, 0.3, 0.1)),
]
COLORS = ["red", "white", "black", "oak", "grey", "blue", "green"]
MATERIALS = ["wood", "fabric", "metal", "glass", "leather"]


def fmt(v):
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class Box:
    def __init__(self, oid, dims, pos, yaw, region):
        self.id, self.dims, self.pos, self.yaw, self.region = oid, dims, pos, yaw, region

    def half(self):
        w, _, d = self.dims
        return (w / 2, d / 2) if self.yaw % 180 == 0 else (d / 2, w / 2)

    def rect(self):
        hx, hz = self.half()
        return (self.pos[0] - hx, self.pos[0] + hx, self.pos[2] - hz, self.pos[2] + hz)

    def bottom(self):
        return self.pos[1] - self.dims[1] / 2

    def top(self):
        return self.pos[1] + self.dims[1] / 2


def overlap(a, b, gap):
    ax0, ax1, az0, az1 = a.rect()
    bx0, bx1, bz0, bz1 = b.rect()
    if ax1 + gap <= bx0 or bx1 + gap <= ax0 or az1 + gap <= bz0 or bz1 + gap <= az0:
        return False
    return not (a.top() <= b.bottom() or b.top() <= a.bottom())


class Room:
    def __init__(self, rid, cx, cz, w, d):
        self.id, self.cx, self.cz, self.w, self.d = rid, cx, cz, w, d

    def contains(self, b):
        x0, x1, z0, z1 = b.rect()
        return (x0 >= self.cx - self.w / 2 and x1 <= self.cx + self.w / 2 and
                z0 >= self.cz - self.d / 2 and z1 <= self.cz + self.d / 2 and b.top() <= 3.0)


def quant(v):
    return round(v * 20) / 20


def build_layout(rng, rooms, n_objects):
    boxes = []
    used = {}

    def fresh(name):
        used[name] = used.get(name, 0) + 1
        return name if used[name] == 1 else f"{name}{used[name]}"

    attempts = 0
    while len(boxes) < n_objects and attempts < 5000:
        attempts += 1
        surfaces = [b for b in boxes if b.surface]
        if surfaces and rng.random() < 0.3:
            host = rng.choice(surfaces)
            name, dims = rng.choice(SMALL)
            yaw = host.yaw
            probe = Box("", dims, (0, 0, 0), yaw, host.region)
            hx, hz = probe.half()
            x0, x1, z0, z1 = host.rect()
            if x1 - x0 < 2 * hx or z1 - z0 < 2 * hz:
                continue
            x = quant(rng.uniform(x0 + hx, x1 - hx))
            z = quant(rng.uniform(z0 + hz, z1 - hz))
            b = Box("", dims, (x, host.top() + dims[1] / 2, z), yaw, host.region)
            bx0, bx1, bz0, bz1 = b.rect()
            if bx0 < x0 or bx1 > x1 or bz0 < z0 or bz1 > z1:
                continue
            b.host = host.id
        else:
            name, dims, surface = rng.choice(FLOOR)
            room = rng.choice(rooms)
            yaw = rng.choice([0, 90, 180, 270])
            probe = Box("", dims, (0, 0, 0), yaw, room.id)
            hx, hz = probe.half()
            if room.w < 2 * hx + 0.2 or room.d < 2 * hz + 0.2:
                continue
            x = quant(rng.uniform(room.cx - room.w / 2 + hx, room.cx + room.w / 2 - hx))
            z = quant(rng.uniform(room.cz - room.d / 2 + hz, room.cz + room.d / 2 - hz))
            b = Box("", dims, (x, dims[1] / 2, z), yaw, room.id)
            if not next(r for r in rooms if r.id == room.id).contains(b):
                continue
            b.host = None
            b.surface = surface
        if not hasattr(b, "surface"):
            b.surface = False
        if any(overlap(b, o, 0.15 if b.host is None and o.host is None else 0.02) for o in boxes):
            continue
        b.id = fresh(name)
        b.color = rng.choice(COLORS)
        b.material = rng.choice(MATERIALS)
        boxes.append(b)
    return boxes


def dist(a, b):
    return math.hypot(a.pos[0] - b.pos[0], a.pos[2] - b.pos[2])


def sq(a, b, axis):
    return f"({a}.pos.{axis} - {b}.pos.{axis}) * ({a}.pos.{axis} - {b}.pos.{axis})"


def relations(rng, boxes, rooms, want):
    """Assertions true in the layout, at most `want` of them."""
    out = []
    seen = set()

    def add(text):
        if text not in seen:
            seen.add(text)
            out.append(text)

    by_id = {b.id: b for b in boxes}
    for b in boxes:
        if b.host:
            h = by_id[b.host]
            add(f"{b.id}.pos.y > {h.id}.pos.y + {h.id}.scale.y / 2")
    guard = 0
    while len(out) < want and guard < 10000:
        guard += 1
        kind = rng.choice(["order", "order", "near", "far", "wall", "rot", "or", "and", "not", "dot", "inside",
                           "height", "color"])
        a, b = rng.sample(boxes, 2) if len(boxes) > 1 else (boxes[0], boxes[0])
        if kind == "order":
            axis = rng.choice(["x", "z"])
            i = 0 if axis == "x" else 2
            gap = b.pos[i] - a.pos[i]
            if gap < 0:
                a, b, gap = b, a, -gap
            if gap < 0.3:
                continue
            margin = fmt(math.floor(min(gap - 0.2, 1.5) * 2) / 2)
            lhs = f"{a.id}.pos.{axis}" if margin == "0" else f"{a.id}.pos.{axis} + {margin}"
            add(f"{lhs} < {b.id}.pos.{axis}")
        elif kind == "near":
            d = dist(a, b)
            if d > 4:
                continue
            r = math.ceil((d + 0.5) * 2) / 2
            add(f"{sq(a.id, b.id, 'x')} + {sq(a.id, b.id, 'z')} < {fmt(r * r)}")
        elif kind == "far":
            d = dist(a, b)
            if d < 1.5:
                continue
            r = math.floor((d - 0.5) * 2) / 2
            add(f"{sq(a.id, b.id, 'x')} + {sq(a.id, b.id, 'z')} > {fmt(r * r)}")
        elif kind == "wall":
            room = next(r for r in rooms if r.id == a.region)
            axis = rng.choice(["x", "z"])
            i = 0 if axis == "x" else 2
            c = room.cx if axis == "x" else room.cz
            if a.pos[i] < c:
                add(f"{a.id}.pos.{axis} < {fmt(math.ceil((a.pos[i] + 0.3) * 2) / 2)}")
            else:
                add(f"{a.id}.pos.{axis} > {fmt(math.floor((a.pos[i] - 0.3) * 2) / 2)}")
        elif kind == "rot":
            if a.host:
                continue
            add(f"{a.id}.rot.y = {a.yaw}")
        elif kind == "or":
            if a.pos[0] < b.pos[0] or a.pos[2] < b.pos[2]:
                add(f"{a.id}.pos.x < {b.id}.pos.x || {a.id}.pos.z < {b.id}.pos.z")
        elif kind == "and":
            room = next(r for r in rooms if r.id == a.region)
            lo = fmt(math.floor(a.pos[0] - 1.0))
            hi = fmt(math.ceil(a.pos[0] + 1.0))
            if float(lo) <= room.cx - room.w / 2 and float(hi) >= room.cx + room.w / 2:
                continue
            add(f"{a.id}.pos.x > {lo} && {a.id}.pos.x < {hi}")
        elif kind == "not":
            if a.pos[2] <= b.pos[2] - 0.3:
                add(f"!({a.id}.pos.z > {b.id}.pos.z)")
        elif kind == "dot":
            v = (b.pos[0] - a.pos[0], b.pos[2] - a.pos[2])
            if abs(v[0]) < 0.6:
                continue
            sx = 1 if v[0] > 0 else -1
            add(f"dot({b.id}.pos - {a.id}.pos, vec3({sx}, 0, 0)) > 0.3")
        elif kind == "inside":
            add(f"inside({a.id}, {a.region})")
        elif kind == "height":
            if a.host:
                continue
            add(f"{a.id}.pos.y < {fmt(a.dims[1] / 2 + 0.25)}")
        elif kind == "color":
            add(f"{a.id}.color = \"{a.color}\"")
    return out


SCENES = [
    # (name, rooms, objects, explicit)
    ("s01_studio", 1, 5, 14),
    ("s02_office", 1, 6, 12),
    ("s03_bedroom", 1, 6, 16),
    ("s04_lounge", 1, 7, 12),
    ("s05_library", 1, 7, 18),
    ("s06_dining", 1, 7, 20),
    ("s07_suite", 2, 8, 14),
    ("s08_family", 1, 8, 18),
    ("s09_loft", 1, 8, 22),
    ("s10_flat", 2, 9, 16),
    ("s11_den", 1, 9, 20),
    ("s12_gallery", 1, 9, 24),
    ("s13_apartment", 2, 10, 18),
    ("s14_classroom", 1, 10, 22),
    ("s15_showroom", 1, 10, 26),
    ("s16_house", 2, 11, 20),
    ("s17_workspace", 1, 11, 24),
    ("s18_hall", 1, 11, 28),
    ("s19_mansion", 2, 12, 22),
    ("s20_warehouse", 1, 12, 32),
]


def make_scene(index, name, n_rooms, n_objects, n_explicit):
    rng = random.Random(1000 + index)
    rooms = []
    if n_rooms == 1:
        rooms.append(Room("room", 0.0, 0.0, rng.choice([6, 7, 8, 9]), rng.choice([5, 6, 7])))
    else:
        w1, w2, d = rng.choice([5, 6]), rng.choice([4, 5]), rng.choice([5, 6])
        rooms.append(Room("living", 0.0, 0.0, w1, d))
        rooms.append(Room("kitchen", w1 / 2 + 0.5 + w2 / 2, 0.0, w2, d))
    boxes = build_layout(rng, rooms, n_objects)
    assert len(boxes) == n_objects, name
    assertions = relations(rng, boxes, rooms, n_explicit)

    lines = [f"// {name}: {n_objects} objects"]
    for room in rooms:
        lines.append(f"region {room.id};")
        lines.append(f"{room.id}.pos <- vec3({fmt(room.cx)}, 0, {fmt(room.cz)});")
        lines.append(f"{room.id}.scale <- vec3({fmt(room.w)}, 3, {fmt(room.d)});")
        for b in boxes:
            if b.region != room.id:
                continue
            w, h, d = b.dims
            lines.append(f"object {b.id};")
            lines.append(f"{b.id}.scale <- vec3({fmt(w)}, {fmt(h)}, {fmt(d)});")
            lines.append(f"{b.id}.color <- \"{b.color}\";")
            lines.append(f"{b.id}.material <- \"{b.material}\";")
    for a in assertions:
        lines.append(f"assert {a};")
    truth = {b.id: {"pos": [b.pos[0], b.pos[1], b.pos[2]], "rot": [0, b.yaw, 0]} for b in boxes}
    return "\n".join(lines) + "\n", truth


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures" / "solver")
    out.mkdir(parents=True, exist_ok=True)
    for i, (name, rooms, objects, explicit) in enumerate(SCENES):
        text, truth = make_scene(i, name, rooms, objects, explicit)
        (out / f"{name}.sthl").write_text(text)
        (out / f"{name}.truth.json").write_text(json.dumps(truth, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
