"""Model serialization.

Two formats are supported:

* The native schema (``"schema": "recad/1"``), a field-for-field JSON
  mirror of the model dataclasses; lossless and versioned.
* A reader for the external sketch-extrude sequence format used by the
  upstream dataset: a ``sequence`` of extrude features referencing sketch
  entities whose profiles hold loops of Line3D/Arc3D/Circle3D curves in
  sketch-local coordinates.  Profiles are merged into faces by
  containment and the three extent types collapse to a
  (dist_pos, dist_neg) pair.
"""

from __future__ import annotations

import json
import math

from .errors import GeometryError, JsonFormatError, UnsupportedFeatureError
from .model import (
    Arc,
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
    merge_profiles_to_faces,
)

SCHEMA = "recad/1"

_CHAIN_TOL = 1e-6


# ---------------------------------------------------------------------------
# Native schema


def model_to_json(model: CADModel) -> dict:
    return {
        "schema": SCHEMA,
        "pairs": [
            {
                "sketch": {
                    "origin": _vec(pair.sketch.origin),
                    "x_axis": _vec(pair.sketch.x_axis),
                    "normal": _vec(pair.sketch.normal),
                    "faces": [_face_json(f) for f in pair.sketch.faces],
                },
                "extrude": {
                    "dist_pos": pair.extrude.dist_pos,
                    "dist_neg": pair.extrude.dist_neg,
                },
                "op": pair.op.value,
            }
            for pair in model.pairs
        ],
    }


def model_to_json_str(model: CADModel) -> str:
    return json.dumps(model_to_json(model), indent=2) + "\n"


def _vec(v: Vec3) -> list:
    return [v.x, v.y, v.z]


def _face_json(face: Face) -> dict:
    return {
        "outer": _loop_json(face.outer),
        "holes": [_loop_json(h) for h in face.holes],
    }


def _loop_json(loop: Loop) -> dict:
    curves = []
    for cmd in loop.curves:
        if isinstance(cmd, Line):
            curves.append(
                {"type": "line", "end": [cmd.end.x, cmd.end.y], "relative": cmd.relative}
            )
        elif isinstance(cmd, Arc):
            curves.append(
                {
                    "type": "arc",
                    "end": [cmd.end.x, cmd.end.y],
                    "sweep": cmd.sweep,
                    "clockwise": cmd.clockwise,
                    "relative": cmd.relative,
                }
            )
        else:
            curves.append({"type": "circle", "radius": cmd.radius})
    return {
        "start": [loop.start.x, loop.start.y],
        "closed": loop.closed,
        "curves": curves,
    }


def model_from_json(data) -> CADModel:
    """Parse the native schema; raises ``JsonFormatError`` with a path."""
    data = _ensure_dict(data)
    if data.get("schema") != SCHEMA:
        raise JsonFormatError(
            f"expected schema {SCHEMA!r}, got {data.get('schema')!r}", path="schema"
        )
    pairs = []
    for i, pj in enumerate(_get(data, "pairs", list, "pairs")):
        path = f"pairs[{i}]"
        sj = _get(pj, "sketch", dict, path)
        faces = tuple(
            _face_from_json(fj, f"{path}.sketch.faces[{j}]")
            for j, fj in enumerate(_get(sj, "faces", list, f"{path}.sketch"))
        )
        sketch = Sketch(
            _vec_from(sj, "origin", f"{path}.sketch"),
            _vec_from(sj, "x_axis", f"{path}.sketch"),
            _vec_from(sj, "normal", f"{path}.sketch"),
            faces,
        )
        ej = _get(pj, "extrude", dict, path)
        extrude = Extrude(
            _number(ej.get("dist_pos"), f"{path}.extrude.dist_pos"),
            _number(ej.get("dist_neg"), f"{path}.extrude.dist_neg"),
        )
        op_name = _get(pj, "op", str, path)
        try:
            op = BooleanOp(op_name)
        except ValueError:
            raise JsonFormatError(f"unknown op {op_name!r}", path=f"{path}.op") from None
        pairs.append(SEPair(sketch, extrude, op))
    return CADModel(tuple(pairs))


def _ensure_dict(data) -> dict:
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise JsonFormatError(f"malformed JSON: {exc}") from None
    if not isinstance(data, dict):
        raise JsonFormatError("top-level value must be an object")
    return data


def _get(obj, key, typ, path):
    if not isinstance(obj, dict) or key not in obj:
        raise JsonFormatError(f"missing field {key!r}", path=path)
    value = obj[key]
    if not isinstance(value, typ):
        raise JsonFormatError(f"field {key!r} has wrong type", path=f"{path}.{key}")
    return value


def _number(v, path) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise JsonFormatError("expected a number", path=path)
    return float(v)


def _point(v, path) -> Point2:
    if not isinstance(v, list) or len(v) != 2:
        raise JsonFormatError("expected [x, y]", path=path)
    return Point2(_number(v[0], path), _number(v[1], path))


def _vec_from(obj, key, path) -> Vec3:
    v = _get(obj, key, list, path)
    if len(v) != 3:
        raise JsonFormatError("expected [x, y, z]", path=f"{path}.{key}")
    return Vec3(*(_number(c, f"{path}.{key}") for c in v))


def _face_from_json(fj, path) -> Face:
    outer = _loop_from_json(_get(fj, "outer", dict, path), f"{path}.outer")
    holes = tuple(
        _loop_from_json(hj, f"{path}.holes[{k}]")
        for k, hj in enumerate(fj.get("holes", []))
    )
    return Face(outer, holes)


def _loop_from_json(lj, path) -> Loop:
    start = _point(_get(lj, "start", list, path), f"{path}.start")
    curves = []
    for i, cj in enumerate(_get(lj, "curves", list, path)):
        cpath = f"{path}.curves[{i}]"
        kind = _get(cj, "type", str, cpath)
        if kind == "line":
            curves.append(
                Line(_point(_get(cj, "end", list, cpath), cpath), bool(cj.get("relative", False)))
            )
        elif kind == "arc":
            curves.append(
                Arc(
                    _point(_get(cj, "end", list, cpath), cpath),
                    _number(cj.get("sweep"), f"{cpath}.sweep"),
                    bool(cj.get("clockwise", False)),
                    bool(cj.get("relative", False)),
                )
            )
        elif kind == "circle":
            curves.append(Circle(_number(cj.get("radius"), f"{cpath}.radius")))
        else:
            raise UnsupportedFeatureError(f"curve type {kind!r}", path=cpath)
    return Loop(start, tuple(curves), bool(lj.get("closed", True)))


# ---------------------------------------------------------------------------
# External sequence format

_OP_MAP = {
    "NewBodyFeatureOperation": BooleanOp.NEW_BODY,
    "JoinFeatureOperation": BooleanOp.JOIN,
    "CutFeatureOperation": BooleanOp.CUT,
    "IntersectFeatureOperation": BooleanOp.INTERSECT,
}


def from_external_json(data) -> CADModel:
    """Convert an external sequence document into a ``CADModel``.

    Raises ``JsonFormatError`` for structural problems,
    ``UnsupportedFeatureError`` for curves or extents outside the
    supported interface, and ``GeometryError`` for broken loops.
    """
    doc = _ensure_dict(data)
    entities = _get(doc, "entities", dict, "")
    sequence = _get(doc, "sequence", list, "")
    pairs = []
    for i, entry in enumerate(sequence):
        path = f"sequence[{i}]"
        if not isinstance(entry, dict) or entry.get("type") != "ExtrudeFeature":
            continue
        ext_id = _get(entry, "entity", str, path)
        if ext_id not in entities:
            raise JsonFormatError(f"unknown entity {ext_id!r}", path=path)
        pairs.append(_convert_extrude(entities, ext_id, f"entities[{ext_id!r}]"))
    if not pairs:
        raise JsonFormatError("document contains no extrude features")
    return CADModel(tuple(pairs))


def _convert_extrude(entities, ext_id, path) -> SEPair:
    ext = entities[ext_id]
    op_name = _get(ext, "operation", str, path)
    if op_name not in _OP_MAP:
        raise UnsupportedFeatureError(f"operation {op_name!r}", path=path)

    start_extent = ext.get("start_extent", {})
    if start_extent.get("type") not in (None, "ProfilePlaneStartDefinition"):
        offset = start_extent.get("offset", {}).get("value", 0.0)
        if offset:
            raise UnsupportedFeatureError("offset start extent", path=path)

    loops = []
    sketch_json = None
    sketch_id = None
    for j, ref in enumerate(_get(ext, "profiles", list, path)):
        rpath = f"{path}.profiles[{j}]"
        sid = _get(ref, "sketch", str, rpath)
        pid = _get(ref, "profile", str, rpath)
        if sid not in entities:
            raise JsonFormatError(f"unknown sketch {sid!r}", path=rpath)
        sk = entities[sid]
        if sketch_id is None:
            sketch_id = sid
            sketch_json = sk
        elif sid != sketch_id and sk.get("transform") != sketch_json.get("transform"):
            raise UnsupportedFeatureError(
                "extrude references profiles on different planes", path=rpath
            )
        profile = _get(sk, "profiles", dict, rpath).get(pid)
        if profile is None:
            raise JsonFormatError(f"unknown profile {pid!r}", path=rpath)
        for k, lj in enumerate(_get(profile, "loops", list, rpath)):
            loops.append(_convert_loop(lj, f"{rpath}.loops[{k}]"))
    faces = merge_profiles_to_faces([loops])

    origin, x_axis, normal, flip = _convert_transform(sketch_json, path)
    lo, hi = _extent_interval(ext, path)
    if flip:
        lo, hi = -hi, -lo
    if lo > 0 or hi < 0:
        raise UnsupportedFeatureError(
            "extrusion interval does not span the sketch plane", path=path
        )
    sketch = Sketch(origin, x_axis, normal, tuple(faces))
    return SEPair(sketch, Extrude(hi, -lo), _OP_MAP[op_name])


def _signed_distance(node, path) -> float:
    dist = _get(node, "distance", dict, path)
    value = _number(dist.get("value"), f"{path}.distance.value")
    if dist.get("role") == "AgainstDistance":
        return -value
    return value


def _extent_interval(ext, path):
    kind = _get(ext, "extent_type", str, path)
    if kind == "OneSideFeatureExtentType":
        v = _signed_distance(_get(ext, "extent_one", dict, path), f"{path}.extent_one")
        return tuple(sorted((0.0, v)))
    if kind == "SymmetricFeatureExtentType":
        total = _signed_distance(
            _get(ext, "extent_one", dict, path), f"{path}.extent_one"
        )
        half = abs(total) / 2.0
        return (-half, half)
    if kind == "TwoSidesFeatureExtentType":
        v1 = _signed_distance(_get(ext, "extent_one", dict, path), f"{path}.extent_one")
        v2 = _signed_distance(_get(ext, "extent_two", dict, path), f"{path}.extent_two")
        # The second extent measures the opposite direction.
        return tuple(sorted((v1, -v2)))
    raise UnsupportedFeatureError(f"extent type {kind!r}", path=path)


def _convert_transform(sk, path):
    tr = _get(sk, "transform", dict, path)

    def vec(key):
        node = _get(tr, key, dict, f"{path}.transform")
        return (
            _number(node.get("x"), f"{path}.transform.{key}.x"),
            _number(node.get("y"), f"{path}.transform.{key}.y"),
            _number(node.get("z"), f"{path}.transform.{key}.z"),
        )

    origin = Vec3(*vec("origin"))
    x = _normalize(Vec3(*vec("x_axis")), f"{path}.transform.x_axis")
    z = _normalize(Vec3(*vec("z_axis")), f"{path}.transform.z_axis")
    # Re-orthogonalize x against the normal.
    d = x.dot(z)
    x = _normalize(Vec3(x.x - d * z.x, x.y - d * z.y, x.z - d * z.z), path)
    flip = False
    if "y_axis" in tr:
        y_given = Vec3(*vec("y_axis"))
        if z.cross(x).dot(y_given) < 0:
            # Left-handed frame: flip the normal, mirroring the extents.
            z = Vec3(-z.x, -z.y, -z.z)
            flip = True
    return origin, x, z, flip


def _normalize(v: Vec3, path) -> Vec3:
    n = v.norm()
    if n < 1e-12:
        raise JsonFormatError("zero-length axis", path=path)
    return Vec3(v.x / n, v.y / n, v.z / n)


def _convert_loop(lj, path) -> Loop:
    curves_json = _get(lj, "profile_curves", list, path)
    if not curves_json:
        raise JsonFormatError("empty loop", path=path)
    if len(curves_json) == 1 and curves_json[0].get("type") == "Circle3D":
        cj = curves_json[0]
        center = _xy(cj.get("center_point"), f"{path}.profile_curves[0].center_point")
        radius = _number(cj.get("radius"), f"{path}.profile_curves[0].radius")
        return Loop(Point2(*center), (Circle(radius),), True)

    segs = []
    for i, cj in enumerate(curves_json):
        cpath = f"{path}.profile_curves[{i}]"
        kind = cj.get("type")
        if kind == "Line3D":
            segs.append(
                (
                    _xy(cj.get("start_point"), cpath),
                    _xy(cj.get("end_point"), cpath),
                    None,
                )
            )
        elif kind == "Arc3D":
            segs.append(
                (
                    _xy(cj.get("start_point"), cpath),
                    _xy(cj.get("end_point"), cpath),
                    cj,
                )
            )
        else:
            raise UnsupportedFeatureError(f"curve type {kind!r}", path=cpath)

    ordered = _chain_segments(segs, path)
    start = ordered[0][0]
    curves = []
    for s, e, arc_json in ordered:
        if arc_json is None:
            curves.append(Line(Point2(*e)))
        else:
            curves.append(_arc_from_external(s, e, arc_json, path))
    return Loop(Point2(*start), tuple(curves), True)


def _xy(node, path):
    if not isinstance(node, dict):
        raise JsonFormatError("expected a point object", path=path)
    return (_number(node.get("x"), f"{path}.x"), _number(node.get("y"), f"{path}.y"))


def _close_pts(a, b) -> bool:
    return abs(a[0] - b[0]) <= _CHAIN_TOL and abs(a[1] - b[1]) <= _CHAIN_TOL


def _chain_segments(segs, path):
    """Orient raw segments head-to-tail; external data may flip endpoints."""
    if len(segs) == 1:
        s, e, meta = segs[0]
        if not _close_pts(s, e):
            raise GeometryError("single open curve cannot form a loop", path=path)
        return segs
    s0, e0, m0 = segs[0]
    s1, e1, _ = segs[1]
    if not (_close_pts(e0, s1) or _close_pts(e0, e1)):
        if _close_pts(s0, s1) or _close_pts(s0, e1):
            segs[0] = (e0, s0, _flipped(m0))
        else:
            raise GeometryError("loop curves are not connected", path=path)
    ordered = [segs[0]]
    for idx in range(1, len(segs)):
        prev_end = ordered[-1][1]
        s, e, meta = segs[idx]
        if _close_pts(s, prev_end):
            ordered.append((prev_end, e, meta))
        elif _close_pts(e, prev_end):
            ordered.append((prev_end, s, _flipped(meta)))
        else:
            raise GeometryError("loop curves are not connected", path=path)
    if not _close_pts(ordered[-1][1], ordered[0][0]):
        raise GeometryError("loop does not close", path=path)
    # Snap the final endpoint onto the exact start.
    s, _, meta = ordered[-1]
    ordered[-1] = (s, ordered[0][0], meta)
    return ordered


def _flipped(meta):
    if meta is None:
        return None
    out = dict(meta)
    out["_flipped"] = not meta.get("_flipped", False)
    return out


def _arc_from_external(start, end, cj, path) -> Arc:
    center = _xy(cj.get("center_point"), f"{path}.center_point")
    a0 = math.atan2(start[1] - center[1], start[0] - center[0])
    a1 = math.atan2(end[1] - center[1], end[0] - center[0])
    sweep_ccw = (a1 - a0) % (2.0 * math.pi)
    if sweep_ccw < 1e-12 or sweep_ccw > 2.0 * math.pi - 1e-12:
        raise GeometryError("degenerate arc", path=path)
    clockwise = False
    mid = _external_arc_midpoint(cj)
    if mid is not None:
        radius = math.hypot(start[0] - center[0], start[1] - center[1])
        m_ccw = (
            center[0] + radius * math.cos(a0 + sweep_ccw / 2.0),
            center[1] + radius * math.sin(a0 + sweep_ccw / 2.0),
        )
        d_ccw = math.hypot(m_ccw[0] - mid[0], m_ccw[1] - mid[1])
        if d_ccw > 1e-4 * max(radius, 1.0):
            clockwise = True
    sweep = math.degrees(sweep_ccw if not clockwise else 2.0 * math.pi - sweep_ccw)
    return Arc(Point2(*end), sweep, clockwise)


def _external_arc_midpoint(cj):
    if "mid_point" in cj:
        return _xy(cj["mid_point"], "mid_point")
    ref = cj.get("reference_vector")
    if ref is None or "start_angle" not in cj or "end_angle" not in cj:
        return None
    try:
        rx, ry = float(ref["x"]), float(ref["y"])
        cx, cy = float(cj["center_point"]["x"]), float(cj["center_point"]["y"])
        radius = float(cj["radius"])
        mid_angle = (float(cj["start_angle"]) + float(cj["end_angle"])) / 2.0
    except (KeyError, TypeError, ValueError):
        return None
    ca, sa = math.cos(mid_angle), math.sin(mid_angle)
    return (cx + (ca * rx - sa * ry) * radius, cy + (sa * rx + ca * ry) * radius)
