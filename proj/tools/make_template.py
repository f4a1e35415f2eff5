#!/usr/bin/env python3
# Copyright 2026 The garmtex Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS-IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the sample T-shirt template, its skeleton and an A-pose.

The garment is in T-pose, y up, meters, front facing +z. Panels are
two-sided grids whose texture coordinates land inside the matching
uv_rect of data/schemas/tshirt.json, so a digitized atlas drapes onto it.

Usage: make_template.py [data_dir]
"""

import json
import math
import pathlib
import sys

HALF_WIDTH = 0.25
HEM_Y = 0.70
TOP_Y = 1.40
SLEEVE_LENGTH = 0.30
TORSO_DEPTH = 0.10
SLEEVE_DEPTH = 0.06
A_POSE_DEGREES = 45.0


def clamp01(t):
    return min(1.0, max(0.0, t))


def rect(schema, name):
    for p in schema["panels"]:
        if p["name"] == name:
            return p["uv_rect"]
    raise KeyError(name)


def anchor_v(schema, panel, landmark):
    for p in schema["panels"]:
        if p["name"] == panel:
            for a in p["anchors"]:
                if a["landmark"] == landmark:
                    return a["v"]
    raise KeyError(landmark)


class Builder:
    def __init__(self):
        self.v = []
        self.vt = []
        self.f = []
        self.w = []

    def grid(self, nx, ny, position, uv, weights, flip):
        """Adds an (nx+1) x (ny+1) grid; s and t run over [0, 1]."""
        base_v = len(self.v)
        base_t = len(self.vt)
        for j in range(ny + 1):
            for i in range(nx + 1):
                s, t = i / nx, j / ny
                p = position(s, t)
                self.v.append(p)
                self.vt.append(uv(s, t))
                self.w.append(weights(p))
        for j in range(ny):
            for i in range(nx):
                a = j * (nx + 1) + i
                b, c, d = a + 1, a + nx + 2, a + nx + 1
                for tri in ((a, b, c), (a, c, d)):
                    if flip:
                        tri = (tri[0], tri[2], tri[1])
                    self.f.append(tuple((base_v + k, base_t + k) for k in tri))


def torso_weights(p):
    x, y, _ = p
    chest = clamp01((y - 1.0) / 0.3)
    arm = 0.5 * clamp01((abs(x) - 0.15) / 0.1) * clamp01((y - 1.1) / 0.2)
    w = {"spine": (1 - chest) * (1 - arm), "chest": chest * (1 - arm)}
    if arm > 0:
        w["arm_left" if x < 0 else "arm_right"] = arm
    return w


def sleeve_weights(p):
    x = p[0]
    arm = 0.5 + 0.5 * clamp01((abs(x) - HALF_WIDTH) / 0.08)
    return {"chest": 1 - arm, ("arm_left" if x < 0 else "arm_right"): arm}


def build(schema):
    b = Builder()
    height = TOP_Y - HEM_Y
    fu0, fv0, fu1, fv1 = rect(schema, "front")
    bu0, bv0, bu1, bv1 = rect(schema, "back")

    def torso_pos(z):
        def pos(s, t):
            x = -HALF_WIDTH + 2 * HALF_WIDTH * s
            return (x, TOP_Y - height * t, z)
        return pos

    b.grid(12, 16, torso_pos(TORSO_DEPTH),
           lambda s, t: (fu0 + (fu1 - fu0) * s, fv0 + (fv1 - fv0) * t),
           torso_weights, flip=False)
    # Seen from behind, the back's image left is the wearer's left.
    b.grid(12, 16, torso_pos(-TORSO_DEPTH),
           lambda s, t: (bu1 - (bu1 - bu0) * s, bv0 + (bv1 - bv0) * t),
           torso_weights, flip=True)

    # The sleeve seam spans shoulder to armpit as placed on the front panel.
    def seam_y(landmark):
        v = anchor_v(schema, "front", landmark)
        return TOP_Y - height * (v - fv0) / (fv1 - fv0)

    top, bottom = seam_y("shoulder_left"), seam_y("armpit_left")
    for side, name in ((-1.0, "sleeve_left"), (1.0, "sleeve_right")):
        u0, v0, u1, v1 = rect(schema, name)
        # sleeve_left has its shoulder on the rect's right edge; the mirrored
        # sleeve_right has it on the left.
        if side < 0:
            uv = lambda s, t, u0=u0, u1=u1, v0=v0, v1=v1: (
                u1 - (u1 - u0) * s, v0 + (v1 - v0) * t)
        else:
            uv = lambda s, t, u0=u0, u1=u1, v0=v0, v1=v1: (
                u0 + (u1 - u0) * s, v0 + (v1 - v0) * t)
        for z in (SLEEVE_DEPTH, -SLEEVE_DEPTH):
            pos = lambda s, t, z=z, side=side: (
                side * (HALF_WIDTH + SLEEVE_LENGTH * s),
                top - (top - bottom) * t, z)
            b.grid(6, 4, pos, uv, sleeve_weights, flip=(side > 0) == (z > 0))
    return b


def fmt(x):
    s = "%.6f" % x
    s = s.rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def write_obj(b, path):
    lines = ["# garmtex sample T-shirt template (T-pose, meters, y up)"]
    lines += ["v %s %s %s" % tuple(fmt(c) for c in p) for p in b.v]
    # OBJ texture v points up; the atlas v points down.
    lines += ["vt %s %s" % (fmt(u), fmt(1.0 - v)) for u, v in b.vt]
    lines += ["f " + " ".join("%d/%d" % (vi + 1, ti + 1) for vi, ti in tri)
              for tri in b.f]
    path.write_text("\n".join(lines) + "\n")


def quat_z(degrees):
    h = math.radians(degrees) / 2
    return [round(math.cos(h), 12), 0.0, 0.0, round(math.sin(h), 12)]


def write_skeleton(b, path):
    identity = [1.0, 0.0, 0.0, 0.0]
    joints = [
        {"name": "spine", "parent": None, "rotation": identity,
         "translation": [0.0, 1.0, 0.0]},
        {"name": "chest", "parent": "spine", "rotation": identity,
         "translation": [0.0, 0.3, 0.0]},
        {"name": "arm_left", "parent": "chest", "rotation": identity,
         "translation": [-0.22, 0.0, 0.0]},
        {"name": "arm_right", "parent": "chest", "rotation": identity,
         "translation": [0.22, 0.0, 0.0]},
    ]
    weights = [{k: round(v, 6) for k, v in w.items() if v > 0} for w in b.w]
    doc = {"format_version": 1, "joints": joints, "weights": weights}
    path.write_text(json.dumps(doc, indent=1) + "\n")


def write_a_pose(path):
    # Arms point along -x (left) and +x (right); rotating about z lowers both.
    doc = {
        "format_version": 1,
        "rotations": {
            "arm_left": quat_z(A_POSE_DEGREES),
            "arm_right": quat_z(-A_POSE_DEGREES),
        },
        "root_translation": [0.0, 0.0, 0.0],
    }
    path.write_text(json.dumps(doc, indent=1) + "\n")


def main():
    data = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else
                        pathlib.Path(__file__).resolve().parent.parent / "data")
    schema = json.loads((data / "schemas" / "tshirt.json").read_text())
    b = build(schema)
    (data / "templates").mkdir(parents=True, exist_ok=True)
    (data / "poses").mkdir(parents=True, exist_ok=True)
    write_obj(b, data / "templates" / "tshirt.obj")
    write_skeleton(b, data / "templates" / "tshirt.skel.json")
    write_a_pose(data / "poses" / "a_pose.json")
    print("%d vertices, %d triangles" % (len(b.v), len(b.f)))


if __name__ == "__main__":
    main()
