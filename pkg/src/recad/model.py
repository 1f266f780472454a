"""Core domain types for sketch-extrude CAD models.

A model is an ordered sequence of (sketch, extrude, boolean-op) pairs.
Sketches hold faces, faces hold loops, loops hold curve commands.  All
types are immutable value objects; operations on them are pure functions.

Also implements parameter quantization to the 256-level integer grid,
structural validation, face assembly from loose loops, and extraction of
the five-level primitive hierarchy (loop / face / sketch / single pair /
multi-pair model) used by the curriculum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

from .errors import GeometryError, RangeError

# Loop-closure tolerance in model units.
EPS_CLOSE = 1e-6

# Canonical sketch plane used to lift sub-model primitives into a small
# executable model (top-down orientation, thin extrusion).
CANONICAL_EXTRUDE_DEPTH = 0.1


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def as_tuple(self) -> tuple:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Line:
    """Straight segment to ``end`` (offset from the pen when ``relative``)."""

    end: Point2
    relative: bool = False


@dataclass(frozen=True)
class Arc:
    """Circular arc to ``end`` sweeping ``sweep`` degrees.

    The arc starts at the current pen position and turns clockwise or
    counter-clockwise through the given sweep, which must lie strictly
    inside (0, 360).
    """

    end: Point2
    sweep: float
    clockwise: bool = False
    relative: bool = False


@dataclass(frozen=True)
class Circle:
    """Full circle centered at the loop's pen position."""

    radius: float


CurveCmd = Union[Line, Arc, Circle]


@dataclass(frozen=True)
class Loop:
    """Closed planar path: either a single circle or a chain of curves.

    ``start`` is the pen position set before the first curve.  For chain
    loops the resolved endpoints must return to ``start`` within
    ``EPS_CLOSE`` and ``closed`` must be set.
    """

    start: Point2
    curves: tuple
    closed: bool = True

    def is_circle(self) -> bool:
        return len(self.curves) == 1 and isinstance(self.curves[0], Circle)


@dataclass(frozen=True)
class Face:
    """Region bounded by ``outer`` minus the regions of ``holes``."""

    outer: Loop
    holes: tuple = ()


@dataclass(frozen=True)
class Sketch:
    """Planar drawing: a plane frame plus one or more faces.

    ``x_axis`` and ``normal`` must be orthonormal; the in-plane y axis is
    ``normal x x_axis`` so (x_axis, y_axis, normal) is right-handed.
    """

    origin: Vec3
    x_axis: Vec3
    normal: Vec3
    faces: tuple = ()

    def y_axis(self) -> Vec3:
        return self.normal.cross(self.x_axis)


@dataclass(frozen=True)
class Extrude:
    """Extrusion distances along (+) and against (-) the sketch normal."""

    dist_pos: float
    dist_neg: float = 0.0


class BooleanOp(Enum):
    NEW_BODY = "new"
    JOIN = "join"
    CUT = "cut"
    INTERSECT = "intersect"


@dataclass(frozen=True)
class SEPair:
    sketch: Sketch
    extrude: Extrude
    op: BooleanOp = BooleanOp.NEW_BODY


@dataclass(frozen=True)
class CADModel:
    """Ordered sketch-extrude pairs combined left-to-right by boolean ops."""

    pairs: tuple

    def __iter__(self):
        return iter(self.pairs)


class PrimitiveLevel(Enum):
    """Hierarchy levels, ordered from loops up to multi-pair models."""

    L = 0
    F = 1
    S = 2
    SE = 3
    MSE = 4


@dataclass(frozen=True)
class Primitive:
    """A node of the model hierarchy tagged with its level and origin.

    ``source`` records (pair index, face index, loop index) positions,
    using -1 for levels where an index does not apply.
    """

    level: PrimitiveLevel
    payload: object
    source: tuple = (-1, -1, -1)


@dataclass(frozen=True)
class Violation:
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message} [{self.code}]"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, path: str, message: str) -> None:
        self.violations.append(Violation(code, path, message))


# ---------------------------------------------------------------------------
# Loop resolution helpers


def resolve_loop_points(loop: Loop) -> list:
    """Absolute pen positions visited by a chain loop, starting at ``start``.

    Relative commands are resolved against the running pen position.  Not
    meaningful for circle loops.
    """
    pts = [loop.start]
    pen = loop.start
    for cmd in loop.curves:
        if isinstance(cmd, Circle):
            continue
        end = cmd.end
        if cmd.relative:
            end = pen + end
        pts.append(end)
        pen = end
    return pts


def loop_gap(loop: Loop) -> float:
    """Distance between the chain's final pen position and the loop start."""
    pts = resolve_loop_points(loop)
    dx = pts[-1].x - loop.start.x
    dy = pts[-1].y - loop.start.y
    return math.hypot(dx, dy)


# ---------------------------------------------------------------------------
# Validation


def _finite(*values) -> bool:
    return all(math.isfinite(v) for v in values)


def _validate_loop(loop: Loop, path: str, report: ValidationReport) -> None:
    if not _finite(loop.start.x, loop.start.y):
        report.add("nonfinite", path, "loop start is not finite")
        return
    if len(loop.curves) == 0:
        report.add("empty-loop", path, "loop has no curves")
        return
    circles = [c for c in loop.curves if isinstance(c, Circle)]
    if circles:
        if len(loop.curves) > 1:
            report.add("mixed-circle", path, "circle mixed with other curves")
            return
        if not _finite(circles[0].radius) or circles[0].radius <= 0:
            report.add("nonpositive-radius", path, "circle radius must be > 0")
        return
    for i, cmd in enumerate(loop.curves):
        if not _finite(cmd.end.x, cmd.end.y):
            report.add("nonfinite", f"{path}.curves[{i}]", "endpoint not finite")
            return
        if isinstance(cmd, Arc):
            if not _finite(cmd.sweep) or not (0.0 < cmd.sweep < 360.0):
                report.add(
                    "arc-sweep-range",
                    f"{path}.curves[{i}]",
                    f"arc sweep {cmd.sweep!r} outside (0, 360)",
                )
    if not loop.closed:
        report.add("open-loop", path, "loop was never closed")
    elif loop_gap(loop) > EPS_CLOSE:
        report.add(
            "open-loop", path, f"loop endpoints miss start by {loop_gap(loop):.3g}"
        )


def _validate_face(face: Face, path: str, report: ValidationReport) -> None:
    _validate_loop(face.outer, f"{path}.outer", report)
    for i, hole in enumerate(face.holes):
        _validate_loop(hole, f"{path}.holes[{i}]", report)
    if not report.ok:
        return
    # Containment checks need tessellation; imported lazily to keep the
    # type layer free of geometry dependencies.
    from .planar import face_containment_violations

    for code, where, msg in face_containment_violations(face):
        report.add(code, f"{path}{where}", msg)


def _validate_sketch(sketch: Sketch, path: str, report: ValidationReport) -> None:
    if not _finite(*sketch.origin.as_tuple()):
        report.add("nonfinite", f"{path}.origin", "origin not finite")
    for name, axis in (("x_axis", sketch.x_axis), ("normal", sketch.normal)):
        if not _finite(*axis.as_tuple()):
            report.add("nonfinite", f"{path}.{name}", "axis not finite")
            return
        if abs(axis.norm() - 1.0) > 1e-9:
            report.add("nonunit-axis", f"{path}.{name}", f"|{name}| != 1")
    if abs(sketch.x_axis.dot(sketch.normal)) > 1e-9:
        report.add("nonorthogonal-axes", path, "x_axis not orthogonal to normal")
    if len(sketch.faces) == 0:
        report.add("empty-faces", path, "sketch has no faces")
    for i, face in enumerate(sketch.faces):
        _validate_face(face, f"{path}.faces[{i}]", report)


def validate_model(model: CADModel) -> ValidationReport:
    """Collect every structural invariant violation of ``model``.

    An empty report means the model is valid.  Violations are data, not
    exceptions: downstream callers decide whether to raise.
    """
    report = ValidationReport()
    if len(model.pairs) == 0:
        report.add("no-pairs", "pairs", "model has no sketch-extrude pairs")
        return report
    if model.pairs[0].op != BooleanOp.NEW_BODY:
        report.add("first-op", "pairs[0].op", "first op must be NewBody")
    for i, pair in enumerate(model.pairs):
        path = f"pairs[{i}]"
        _validate_sketch(pair.sketch, f"{path}.sketch", report)
        ext = pair.extrude
        if not _finite(ext.dist_pos, ext.dist_neg):
            report.add("nonfinite", f"{path}.extrude", "distances not finite")
        elif ext.dist_pos < 0 or ext.dist_neg < 0:
            report.add("bad-extrude", f"{path}.extrude", "distances must be >= 0")
        elif ext.dist_pos + ext.dist_neg <= 0:
            report.add("bad-extrude", f"{path}.extrude", "total extrusion depth is 0")
    return report


# ---------------------------------------------------------------------------
# Quantization

QUANT_LEVELS = 256
QUANT_MAX = QUANT_LEVELS - 1


def _q(value: float, path: str) -> int:
    if not (-1.0 <= value <= 1.0):
        raise RangeError(f"value {value!r} outside [-1, 1]", path=path)
    # Round half up so the grid is symmetric around the midpoint code.
    return int(math.floor((value + 1.0) / 2.0 * QUANT_MAX + 0.5))


def _dq(code: int) -> float:
    return 2.0 * code / QUANT_MAX - 1.0


def _q_angle(degrees: float, path: str) -> int:
    if not (0.0 <= degrees < 360.0):
        raise RangeError(f"angle {degrees!r} outside [0, 360)", path=path)
    code = int(math.floor(degrees + 0.5))
    # Keep strictly positive sweeps representable after rounding.
    return min(max(code, 1), 359)


def _q_point(p: Point2, path: str) -> Point2:
    return Point2(_q(p.x, f"{path}.x"), _q(p.y, f"{path}.y"))


def _dq_point(p: Point2) -> Point2:
    return Point2(_dq(p.x), _dq(p.y))


@dataclass(frozen=True)
class QuantizedModel:
    """A CADModel whose parameters live on the 256-level integer grid.

    Coordinates and distances are integer codes in [0, 255] decoding to
    2k/255 - 1; angles are integer degrees in [1, 359].  Reuses the
    continuous dataclasses with integer payloads.
    """

    pairs: tuple


def _map_loop(loop: Loop, fn_pt, fn_angle, fn_len, path: str) -> Loop:
    curves = []
    for i, cmd in enumerate(loop.curves):
        cpath = f"{path}.curves[{i}]"
        if isinstance(cmd, Line):
            curves.append(replace(cmd, end=fn_pt(cmd.end, cpath)))
        elif isinstance(cmd, Arc):
            curves.append(
                replace(
                    cmd,
                    end=fn_pt(cmd.end, cpath),
                    sweep=fn_angle(cmd.sweep, f"{cpath}.sweep"),
                )
            )
        else:
            curves.append(Circle(fn_len(cmd.radius, f"{cpath}.radius")))
    return Loop(fn_pt(loop.start, f"{path}.start"), tuple(curves), loop.closed)


def _map_model(pairs, fn_pt, fn_angle, fn_len, fn_vec):
    out = []
    for i, pair in enumerate(pairs):
        path = f"pairs[{i}]"
        sk = pair.sketch
        faces = []
        for j, face in enumerate(sk.faces):
            fpath = f"{path}.faces[{j}]"
            outer = _map_loop(face.outer, fn_pt, fn_angle, fn_len, f"{fpath}.outer")
            holes = tuple(
                _map_loop(h, fn_pt, fn_angle, fn_len, f"{fpath}.holes[{k}]")
                for k, h in enumerate(face.holes)
            )
            faces.append(Face(outer, holes))
        sketch = Sketch(fn_vec(sk.origin, f"{path}.origin"), sk.x_axis, sk.normal, tuple(faces))
        ext = Extrude(
            fn_len(pair.extrude.dist_pos, f"{path}.dist_pos"),
            fn_len(pair.extrude.dist_neg, f"{path}.dist_neg"),
        )
        out.append(SEPair(sketch, ext, pair.op))
    return tuple(out)


def quantize(model: CADModel) -> QuantizedModel:
    """Snap every continuous parameter to the 256-level grid.

    Coordinates, sketch origins, radii and extrusion distances share the
    [-1, 1] -> [0, 255] map (round half up); sweep angles become integer
    degrees.  Sketch axes stay continuous: they are unit vectors, not
    free parameters.  Raises ``RangeError`` naming the offending field
    when a value falls outside its range.
    """

    def fn_vec(v: Vec3, path: str) -> Vec3:
        return Vec3(_q(v.x, f"{path}.x"), _q(v.y, f"{path}.y"), _q(v.z, f"{path}.z"))

    return QuantizedModel(_map_model(model.pairs, _q_point, _q_angle, _q, fn_vec))


def dequantize(q: QuantizedModel) -> CADModel:
    """Decode integer grid codes back to continuous parameters."""

    def fn_pt(p: Point2, path: str) -> Point2:
        return _dq_point(p)

    def fn_angle(a, path: str) -> float:
        return float(a)

    def fn_len(v, path: str) -> float:
        return _dq(v)

    def fn_vec(v: Vec3, path: str) -> Vec3:
        return Vec3(_dq(v.x), _dq(v.y), _dq(v.z))

    return CADModel(_map_model(q.pairs, fn_pt, fn_angle, fn_len, fn_vec))


# ---------------------------------------------------------------------------
# Face assembly from loose loops


def merge_profiles_to_faces(profiles: Iterable[Sequence[Loop]]) -> list:
    """Group coplanar loops into faces by containment depth.

    Accepts profile groups (each an iterable of closed loops drawn in the
    same sketch plane) and flattens them.  Even-depth loops in the
    containment forest become face outers; their direct children become
    holes.  Loops whose boundaries cross raise ``GeometryError``.
    """
    from .planar import loop_contains_loop, loops_intersect, tessellate_loop

    loops = [loop for group in profiles for loop in group]
    if not loops:
        return []
    polys = [tessellate_loop(lp, 1e-3) for lp in loops]
    n = len(loops)
    for i in range(n):
        for j in range(i + 1, n):
            if loops_intersect(polys[i], polys[j]):
                raise GeometryError(f"loops {i} and {j} intersect")
    # inside[i][j]: loop i lies within loop j.
    inside = [
        [i != j and loop_contains_loop(polys[i], polys[j]) for j in range(n)]
        for i in range(n)
    ]
    depth = [sum(inside[i]) for i in range(n)]
    faces = []
    for i in range(n):
        if depth[i] % 2 == 0:
            holes = tuple(
                loops[j]
                for j in range(n)
                if depth[j] == depth[i] + 1 and inside[j][i]
            )
            faces.append(Face(loops[i], holes))
    return faces


# ---------------------------------------------------------------------------
# Primitive hierarchy


def extract_primitives(model: CADModel) -> list:
    """Enumerate the hierarchy of ``model`` in document order.

    Emits every loop, face, sketch and pair, then the whole model when it
    has more than one pair (a single-pair model is already covered by its
    SE primitive).  Raises ``ValidationError`` on invalid input.
    """
    from .errors import ValidationError

    report = validate_model(model)
    if not report.ok:
        raise ValidationError(report)
    prims = []
    for i, pair in enumerate(model.pairs):
        for j, face in enumerate(pair.sketch.faces):
            prims.append(Primitive(PrimitiveLevel.L, face.outer, (i, j, 0)))
            for k, hole in enumerate(face.holes):
                prims.append(Primitive(PrimitiveLevel.L, hole, (i, j, k + 1)))
            prims.append(Primitive(PrimitiveLevel.F, face, (i, j, -1)))
        prims.append(Primitive(PrimitiveLevel.S, pair.sketch, (i, -1, -1)))
        prims.append(Primitive(PrimitiveLevel.SE, pair, (i, -1, -1)))
    if len(model.pairs) > 1:
        prims.append(Primitive(PrimitiveLevel.MSE, model, (-1, -1, -1)))
    return prims


def count_curves(p: Primitive) -> int:
    """Total curve commands in the primitive's subtree (circle counts 1)."""
    payload = p.payload
    if isinstance(payload, Loop):
        return len(payload.curves)
    if isinstance(payload, Face):
        return len(payload.outer.curves) + sum(len(h.curves) for h in payload.holes)
    if isinstance(payload, Sketch):
        return sum(
            count_curves(Primitive(PrimitiveLevel.F, f)) for f in payload.faces
        )
    if isinstance(payload, SEPair):
        return count_curves(Primitive(PrimitiveLevel.S, payload.sketch))
    if isinstance(payload, CADModel):
        return sum(
            count_curves(Primitive(PrimitiveLevel.SE, pair)) for pair in payload.pairs
        )
    raise TypeError(f"not a primitive payload: {payload!r}")


CANONICAL_SKETCH_FRAME = (
    Vec3(0.0, 0.0, 0.0),
    Vec3(1.0, 0.0, 0.0),
    Vec3(0.0, 0.0, 1.0),
)


def wrap_primitive(p: Primitive) -> CADModel:
    """Lift any primitive into a minimal executable model.

    Loops and faces get the canonical top-down sketch plane and a thin
    one-sided extrusion; sketches keep their own plane; a pair becomes a
    single-pair model with its op forced to NewBody; a model passes
    through unchanged.
    """
    origin, x_axis, normal = CANONICAL_SKETCH_FRAME
    depth = Extrude(CANONICAL_EXTRUDE_DEPTH, 0.0)
    payload = p.payload
    if isinstance(payload, Loop):
        payload = Face(payload)
    if isinstance(payload, Face):
        sketch = Sketch(origin, x_axis, normal, (payload,))
        return CADModel((SEPair(sketch, depth, BooleanOp.NEW_BODY),))
    if isinstance(payload, Sketch):
        return CADModel((SEPair(payload, depth, BooleanOp.NEW_BODY),))
    if isinstance(payload, SEPair):
        return CADModel((replace(payload, op=BooleanOp.NEW_BODY),))
    if isinstance(payload, CADModel):
        return payload
    raise TypeError(f"not a primitive payload: {payload!r}")
