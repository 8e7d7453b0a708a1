#!/usr/bin/env python3
"""Regenerates the test fixtures in this directory.

room.json   living room, 5.10 x 3.15 x 2.40 m: 4 walls, 3 doors, 15 furniture scaffolds
track.json  16 sampled camera frames (SLAM coordinates) plus the world<-SLAM Sim(3)
frames/     640x480 frame images referenced by track.json

room.json is written in the canonical scene format (sorted keys, two-space
indent, scalar arrays inline, six-decimal floats) so it round-trips byte-for-byte.
"""
import json
import math
import os

import numpy as np
from PIL import Image, ImageDraw

HERE = os.path.dirname(os.path.abspath(__file__))


def canonical(value, indent=0):
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(k, ensure_ascii=False)}: {canonical(value[k], indent + 1)}"
                 for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in value):
            return "[" + ", ".join(canonical(v, indent + 1) for v in value) + "]"
        return "[\n" + ",\n".join(inner + canonical(v, indent + 1) for v in value) + "\n" + pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, float):
        s = "%.6f" % value
        return "0.000000" if s == "-0.000000" else s
    if isinstance(value, int):
        return str(value)
    return json.dumps(value, ensure_ascii=False)


HALF_X, HALF_Y, HEIGHT = 2.55, 1.575, 2.40
CORNERS = [(-HALF_X, -HALF_Y), (HALF_X, -HALF_Y), (HALF_X, HALF_Y), (-HALF_X, HALF_Y)]


def entity(eid, kind, label, center, size, yaw, host=None):
    return {
        "id": eid, "kind": kind, "label": label,
        "box": {"center": [float(c) for c in center], "size": [float(s) for s in size], "yaw": float(yaw)},
        "host_wall_id": host, "status": "pending", "best_frame_pose": None, "best_view_yaw": None,
        "mapping": None, "mapping_stale": False, "asset_id": None,
    }


def build_room():
    walls, entities = [], []
    for i in range(4):
        a, b = CORNERS[i], CORNERS[(i + 1) % 4]
        walls.append({"id": f"wall_{i}", "a": [a[0], a[1], 0.0], "b": [b[0], b[1], 0.0],
                      "height": HEIGHT, "thickness": 0.1})
        length = math.hypot(b[0] - a[0], b[1] - a[1])
        # Boxes are symmetric under a half turn; keep yaw away from +-pi so the
        # six-decimal text stays inside (-pi, pi].
        yaw = math.atan2(b[1] - a[1], b[0] - a[0])
        if yaw > math.pi / 2 + 1e-9:
            yaw -= math.pi
        elif yaw <= -math.pi / 2 - 1e-9:
            yaw += math.pi
        yaw = round(yaw, 6)
        entities.append(entity(f"wall_{i}", "wall", "wall", ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2, HEIGHT / 2),
                               (length, 0.1, HEIGHT), yaw))
    entities += [
        entity("door_0", "door", "door", (-1.8, -HALF_Y, 1.0), (0.9, 0.1, 2.0), 0.0, "wall_0"),
        entity("door_1", "door", "door", (HALF_X, 0.8, 1.0), (0.9, 0.1, 2.0), 1.570796, "wall_1"),
        entity("door_2", "door", "door", (-HALF_X, 0.6, 1.0), (0.9, 0.1, 2.0), -1.570796, "wall_3"),
    ]
    furniture = [
        ("sofa", (0.0, 1.05, 0.425), (2.0, 0.9, 0.85), 0.0),
        ("coffee table", (0.0, 0.1, 0.225), (1.1, 0.6, 0.45), 0.0),
        ("tv", (0.0, -1.45, 1.1), (1.2, 0.08, 0.7), 0.0),
        ("tv stand", (0.0, -1.35, 0.25), (1.6, 0.4, 0.5), 0.0),
        ("armchair", (-1.6, 0.2, 0.45), (0.85, 0.85, 0.9), 0.52),
        ("armchair", (1.6, 0.2, 0.45), (0.85, 0.85, 0.9), -0.52),
        ("curtains", (2.45, -0.6, 1.2), (0.08, 1.6, 2.3), 0.0),
        ("rug", (0.0, 0.2, 0.01), (2.4, 1.7, 0.02), 0.0),
        ("floor lamp", (-2.2, 1.25, 0.8), (0.4, 0.4, 1.6), 0.0),
        ("bookshelf", (-2.35, -0.5, 0.9), (0.35, 1.0, 1.8), 0.0),
        ("dining table", (1.5, -0.85, 0.375), (0.9, 0.6, 0.75), 0.0),
        ("chair", (0.8, -0.85, 0.45), (0.45, 0.45, 0.9), 0.0),
        ("chair", (2.2, -0.85, 0.45), (0.45, 0.45, 0.9), 3.0),
        ("painting", (-0.9, 1.52, 1.5), (0.8, 0.04, 0.6), 0.0),
        ("plant", (2.2, 1.2, 0.5), (0.5, 0.5, 1.0), 0.0),
    ]
    for i, (label, c, s, yaw) in enumerate(furniture):
        entities.append(entity(f"obj_{i}", "object", label, c, s, yaw))
    return {
        "origin_calibration": {"position": [0.0, 0.0, 0.0], "yaw": 0.0},
        "style": None,
        "environment": {"wall_texture": None, "floor_texture": None, "skybox": None},
        "walls": walls,
        "entities": entities,
        "revision": 0,
    }


def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


def look_at(eye, target):
    """World->camera rotation (rows: camera x right, y down, z forward)."""
    fwd = np.asarray(target, float) - np.asarray(eye, float)
    fwd /= np.linalg.norm(fwd)
    right = np.cross(fwd, [0, 0, 1.0])
    right /= np.linalg.norm(right)
    down = np.cross(fwd, right)
    return np.vstack([right, down, fwd])


def build_track():
    sim_r, sim_t, sim_s = rot_z(math.radians(30.0)), np.array([0.5, -0.2, 0.1]), 2.0
    frames = []
    for i in range(16):
        a = 2 * math.pi * i / 16
        eye = np.array([1.8 * math.cos(a), 1.0 * math.sin(a), 1.5])
        look = a + math.pi + (0.3 if i % 2 else -0.3)
        target = np.array([eye[0] + 3.5 * math.cos(look), eye[1] + 3.5 * math.sin(look), 0.6])
        r_world = look_at(eye, target)
        r_cw = r_world @ sim_r
        t_cw = r_world @ (sim_t - eye) / sim_s
        frames.append({"index": i * 10, "R_cw": [round(float(v), 9) for v in r_cw.reshape(-1)],
                       "t_cw": [round(float(v), 9) for v in t_cw], "image": f"frames/{i * 10:06d}.png"})
    return {
        "intrinsics": {"fx": 500.0, "fy": 500.0, "cx": 320.0, "cy": 240.0, "W": 640, "H": 480},
        "sim3": {"R": [round(float(v), 12) for v in sim_r.reshape(-1)], "t": sim_t.tolist(), "s": sim_s},
        "frames": frames,
    }


def write_frames(track):
    os.makedirs(os.path.join(HERE, "frames"), exist_ok=True)
    for f in track["frames"]:
        img = Image.new("RGB", (640, 480), (96, 96, 104))
        d = ImageDraw.Draw(img)
        shade = 60 + (f["index"] * 3) % 120
        d.rectangle([40, 300, 600, 460], fill=(shade, shade - 20, shade - 40))
        img.save(os.path.join(HERE, f["image"]), optimize=True)


def main():
    with open(os.path.join(HERE, "room.json"), "w") as fh:
        fh.write(canonical(build_room()) + "\n")
    track = build_track()
    with open(os.path.join(HERE, "track.json"), "w") as fh:
        json.dump(track, fh, indent=2)
        fh.write("\n")
    write_frames(track)


if __name__ == "__main__":
    main()
