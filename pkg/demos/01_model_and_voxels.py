"""Build a model from the typed API, evaluate it as a solid, export it.

A bracket-like part: a base plate, a joined boss, and a drilled hole.
"""

import numpy as np

from recad import (
    BooleanOp,
    CADModel,
    Circle,
    Extrude,
    Face,
    Line,
    Loop,
    Point2,
    SEPair,
    Sketch,
    Vec3,
    mass_properties,
    membership,
    normalize_transform,
    validate_model,
    voxelize,
)
from recad.export import mesh_to_obj
from recad.solid import model_mesh


def rectangle(cx, cy, w, h):
    return Loop(
        Point2(cx - w / 2, cy - h / 2),
        (
            Line(Point2(cx + w / 2, cy - h / 2)),
            Line(Point2(cx + w / 2, cy + h / 2)),
            Line(Point2(cx - w / 2, cy + h / 2)),
            Line(Point2(cx - w / 2, cy - h / 2)),
        ),
    )


def disc(cx, cy, r):
    return Loop(Point2(cx, cy), (Circle(r),))


plane = dict(origin=Vec3(0, 0, 0), x_axis=Vec3(1, 0, 0), normal=Vec3(0, 0, 1))

base = SEPair(
    Sketch(faces=(Face(rectangle(0, 0, 0.9, 0.6)),), **plane),
    Extrude(0.12),
    BooleanOp.NEW_BODY,
)
boss = SEPair(
    Sketch(faces=(Face(disc(0.25, 0, 0.18)),), **plane),
    Extrude(0.35),
    BooleanOp.JOIN,
)
hole = SEPair(
    Sketch(faces=(Face(disc(0.25, 0, 0.08)),), **plane),
    Extrude(0.5),
    BooleanOp.CUT,
)
model = CADModel((base, boss, hole))

report = validate_model(model)
print("valid:", report.ok)

print("center of boss is drilled out:", not membership(model, Vec3(0.25, 0, 0.2)))
print("boss ring is solid:", membership(model, Vec3(0.25 + 0.13, 0, 0.2)))

grid = voxelize(model, 96)
props = mass_properties(grid)
print(f"volume ~ {props.volume:.4f}")
print(f"centroid ~ ({props.centroid.x:.3f}, {props.centroid.y:.3f}, {props.centroid.z:.3f})")
tf = normalize_transform(props)
print(f"normalization scale (1/radius of gyration) ~ {tf.scale:.3f}")

obj_text = mesh_to_obj(model_mesh(model))
print(f"OBJ export: {len(obj_text.splitlines())} lines")
