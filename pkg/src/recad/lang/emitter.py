"""Hardcoded script emission for models and primitives.

Produces scripts in the restricted grammar that rebuild the input
geometry exactly: numbers are printed with the shortest representation
that round-trips, so executing the emitted script reproduces the source
parameters bit for bit.  Sub-model primitives are first lifted into a
minimal model (see ``wrap_primitive``).
"""

from __future__ import annotations

from ..model import (
    Arc,
    CADModel,
    Circle,
    Face,
    Line,
    Loop,
    Primitive,
    PrimitiveLevel,
    Vec3,
    wrap_primitive,
)


def _num(x: float) -> str:
    return repr(float(x))


def _vec(v: Vec3) -> str:
    return f"[{_num(v.x)}, {_num(v.y)}, {_num(v.z)}]"


def _loop_chain(loop: Loop) -> str:
    parts = [f"Loop().moveTo({_num(loop.start.x)}, {_num(loop.start.y)})"]
    for cmd in loop.curves:
        if isinstance(cmd, Circle):
            parts.append(f".circle({_num(cmd.radius)})")
        elif isinstance(cmd, Line):
            rel = ", True" if cmd.relative else ""
            parts.append(f".lineTo({_num(cmd.end.x)}, {_num(cmd.end.y)}{rel})")
        elif isinstance(cmd, Arc):
            rel = ", True" if cmd.relative else ""
            parts.append(
                f".arcTo({_num(cmd.end.x)}, {_num(cmd.end.y)}, "
                f"{_num(cmd.sweep)}, {cmd.clockwise}{rel})"
            )
    if not loop.is_circle():
        parts.append(".close()")
    return "".join(parts)


def emit_model(model: CADModel) -> str:
    """Script text rebuilding ``model`` through the published interface."""
    lines = []
    loop_n = 0
    face_n = 0
    sketch_refs = []
    for i, pair in enumerate(model.pairs):
        face_refs = []
        for face in pair.sketch.faces:
            loop_refs = []
            for loop in (face.outer, *face.holes):
                name = f"loop{loop_n}"
                loop_n += 1
                lines.append(f"{name} = {_loop_chain(loop)}")
                loop_refs.append(name)
            fname = f"face{face_n}"
            face_n += 1
            lines.append(f"{fname} = Face()")
            lines.append(f"{fname}.addLoop({', '.join(loop_refs)})")
            face_refs.append(fname)
        sk = pair.sketch
        sname = f"sketch{i}"
        lines.append(
            f"{sname} = Sketch({_vec(sk.origin)}, {_vec(sk.x_axis)}, {_vec(sk.normal)})"
        )
        lines.append(f"{sname}.addFace({', '.join(face_refs)})")
        sketch_refs.append(sname)
    lines.append("cad_model = CADModel()")
    for i, pair in enumerate(model.pairs):
        ext = pair.extrude
        lines.append(
            f"cad_model.addSE({sketch_refs[i]}, "
            f"Extrude(({_num(ext.dist_pos)}, {_num(ext.dist_neg)})), "
            f'"{pair.op.value}")'
        )
    return "\n".join(lines) + "\n"


def emit_hardcoded(p) -> str:
    """Script for a primitive's minimal executable model.

    Accepts a ``Primitive`` or a bare ``CADModel``; loops, faces and
    sketches are wrapped with the canonical plane and a thin extrusion so
    the emitted script always executes to a solid.
    """
    if isinstance(p, CADModel):
        return emit_model(p)
    if not isinstance(p, Primitive):
        p = Primitive(_level_of(p), p)
    return emit_model(wrap_primitive(p))


def _level_of(payload) -> PrimitiveLevel:
    from ..model import SEPair, Sketch

    if isinstance(payload, Loop):
        return PrimitiveLevel.L
    if isinstance(payload, Face):
        return PrimitiveLevel.F
    if isinstance(payload, Sketch):
        return PrimitiveLevel.S
    if isinstance(payload, SEPair):
        return PrimitiveLevel.SE
    return PrimitiveLevel.MSE
