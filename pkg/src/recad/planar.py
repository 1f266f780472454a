"""Planar geometry: arc solving, loop tessellation, triangulation.

Loops are tessellated into closed polylines (arcs and circles replaced by
chord chains bounded by a sagitta tolerance), faces are triangulated by
ear clipping after bridging holes into the outer boundary, and point
containment uses the even-odd rule with boundary points counting inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .model import Arc, Circle, Face, Line, Loop, Point2

# Boundary classification tolerance for containment queries.
BOUNDARY_EPS = 1e-9

# Every arc or circle is split into at least this many segments.
MIN_ARC_SEGMENTS = 8


@dataclass(frozen=True)
class Polyline2:
    """Closed or open chain of 2D vertices (no repeated closing vertex)."""

    vertices: np.ndarray
    closed: bool = True

    def __len__(self) -> int:
        return len(self.vertices)


def solve_arc(start: Point2, end: Point2, sweep: float, clockwise: bool):
    """Recover the center and radius of an arc given its chord and sweep.

    The radius follows from |chord| = 2 R sin(sweep/2); the center sits on
    the chord's perpendicular bisector, on the side determined by the
    turn direction (at sweep 180 it degenerates to the chord midpoint).
    """
    if not (0.0 < sweep < 360.0):
        raise GeometryError(f"degenerate arc sweep {sweep!r}")
    dx = end.x - start.x
    dy = end.y - start.y
    chord = math.hypot(dx, dy)
    if chord < 1e-12:
        raise GeometryError("arc endpoints coincide")
    half = math.radians(sweep) / 2.0
    radius = chord / (2.0 * math.sin(half))
    # Perpendicular offset from chord midpoint; sign flips for clockwise.
    offset = (chord / 2.0) * (math.cos(half) / math.sin(half))
    if clockwise:
        offset = -offset
    mx = (start.x + end.x) / 2.0
    my = (start.y + end.y) / 2.0
    # Left normal of the chord direction.
    nx, ny = -dy / chord, dx / chord
    center = Point2(mx + nx * offset, my + ny * offset)
    return center, radius


def arc_vertices(start: Point2, end: Point2, sweep: float, clockwise: bool, n: int):
    """Vertices along the arc from ``start`` (inclusive) to ``end`` (exclusive)."""
    center, radius = solve_arc(start, end, sweep, clockwise)
    a0 = math.atan2(start.y - center.y, start.x - center.x)
    phi = math.radians(sweep) * (-1.0 if clockwise else 1.0)
    ts = np.arange(n) / n
    angles = a0 + phi * ts
    return np.column_stack(
        (center.x + radius * np.cos(angles), center.y + radius * np.sin(angles))
    )


def _arc_segments(radius: float, sweep_rad: float, chord_tol: float) -> int:
    # Sagitta bound: R (1 - cos(step/2)) <= chord_tol.
    frac = min(max(chord_tol / max(radius, 1e-300), 0.0), 2.0)
    step = 2.0 * math.acos(max(1.0 - frac, -1.0))
    if step <= 0.0:
        return MIN_ARC_SEGMENTS
    return max(MIN_ARC_SEGMENTS, int(math.ceil(sweep_rad / step)))


def tessellate_loop(loop: Loop, chord_tol: float) -> Polyline2:
    """Flatten a loop to a closed polyline with chord deviation <= tol."""
    if chord_tol <= 0:
        raise ValueError("chord_tol must be positive")
    if loop.is_circle():
        radius = loop.curves[0].radius
        if radius <= 0:
            raise GeometryError("circle radius must be > 0")
        n = _arc_segments(radius, 2.0 * math.pi, chord_tol)
        angles = 2.0 * math.pi * np.arange(n) / n
        verts = np.column_stack(
            (
                loop.start.x + radius * np.cos(angles),
                loop.start.y + radius * np.sin(angles),
            )
        )
        return Polyline2(verts, closed=True)

    chunks = []
    pen = loop.start
    for cmd in loop.curves:
        if isinstance(cmd, Circle):
            raise GeometryError("circle mixed with other curves")
        end = cmd.end
        if cmd.relative:
            end = pen + end
        if isinstance(cmd, Line):
            chunks.append(np.array([[pen.x, pen.y]]))
        else:
            n = _arc_segments(
                solve_arc(pen, end, cmd.sweep, cmd.clockwise)[1],
                math.radians(cmd.sweep),
                chord_tol,
            )
            chunks.append(arc_vertices(pen, end, cmd.sweep, cmd.clockwise, n))
        pen = end
    verts = np.vstack(chunks)
    # Drop a duplicated closing vertex and any coincident run.
    keep = np.ones(len(verts), dtype=bool)
    keep[1:] = np.any(np.abs(np.diff(verts, axis=0)) > 1e-12, axis=1)
    verts = verts[keep]
    if len(verts) >= 2 and np.all(np.abs(verts[-1] - verts[0]) <= 1e-12):
        verts = verts[:-1]
    if len(verts) < 3:
        raise GeometryError("loop tessellates to fewer than 3 vertices")
    return Polyline2(verts, closed=loop.closed)


def signed_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def points_in_polygon(pts: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Even-odd containment of ``pts`` (N,2) in one closed polygon."""
    out = np.zeros(len(pts), dtype=bool)
    cand = (
        (pts[:, 1] >= verts[:, 1].min())
        & (pts[:, 1] <= verts[:, 1].max())
        & (pts[:, 0] <= verts[:, 0].max())
    )
    if not cand.any():
        return out
    sub = pts[cand]
    x = sub[:, 0][:, None]
    y = sub[:, 1][:, None]
    x1 = verts[:, 0][None, :]
    y1 = verts[:, 1][None, :]
    x2 = np.roll(verts[:, 0], -1)[None, :]
    y2 = np.roll(verts[:, 1], -1)[None, :]
    straddle = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    hits = straddle & (xint > x)
    out[cand] = np.bitwise_xor.reduce(hits, axis=1)
    return out


def distance_to_polygon(pts: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Minimum distance from each point to the polygon boundary."""
    a = verts
    b = np.roll(verts, -1, axis=0)
    ab = b - a
    ab2 = np.maximum(np.sum(ab * ab, axis=1), 1e-300)
    d = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.sum(d * ab[None, :, :], axis=2) / ab2[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    dist = np.linalg.norm(pts[:, None, :] - proj, axis=2)
    return dist.min(axis=1)


def near_polygon(pts: np.ndarray, verts: np.ndarray, eps: float) -> np.ndarray:
    """Points within ``eps`` of the boundary, with cheap bbox rejection."""
    out = np.zeros(len(pts), dtype=bool)
    lo = verts.min(axis=0) - eps
    hi = verts.max(axis=0) + eps
    coarse = np.all((pts >= lo) & (pts <= hi), axis=1)
    if not coarse.any():
        return out
    sub = pts[coarse]
    a = verts
    b = np.roll(verts, -1, axis=0)
    elo = np.minimum(a, b) - eps
    ehi = np.maximum(a, b) + eps
    inbox = (
        (sub[:, None, 0] >= elo[None, :, 0])
        & (sub[:, None, 0] <= ehi[None, :, 0])
        & (sub[:, None, 1] >= elo[None, :, 1])
        & (sub[:, None, 1] <= ehi[None, :, 1])
    )
    ii, jj = np.nonzero(inbox)
    flags = np.zeros(len(sub), dtype=bool)
    if len(ii):
        pa = sub[ii] - a[jj]
        ab = (b - a)[jj]
        ab2 = np.maximum(np.sum(ab * ab, axis=1), 1e-300)
        t = np.clip(np.sum(pa * ab, axis=1) / ab2, 0.0, 1.0)
        diff = pa - t[:, None] * ab
        close = np.sum(diff * diff, axis=1) <= eps * eps
        flags[ii[close]] = True
    out[coarse] = flags
    return out


def face_polylines(face: Face, chord_tol: float):
    outer = tessellate_loop(face.outer, chord_tol)
    holes = [tessellate_loop(h, chord_tol) for h in face.holes]
    return outer, holes


def face_contains_points(
    outer: Polyline2, holes, pts: np.ndarray, boundary_inside: bool = True
) -> np.ndarray:
    """Even-odd membership across outer and hole boundaries.

    With ``boundary_inside`` points within ``BOUNDARY_EPS`` of any
    boundary count as contained regardless of the parity result.
    """
    inside = points_in_polygon(pts, outer.vertices)
    for hole in holes:
        inside ^= points_in_polygon(pts, hole.vertices)
    if boundary_inside:
        # Only parity-outside points can be rescued by the boundary rule.
        cand = np.nonzero(~inside)[0]
        if len(cand):
            sub = pts[cand]
            near = near_polygon(sub, outer.vertices, BOUNDARY_EPS)
            for hole in holes:
                near |= near_polygon(sub, hole.vertices, BOUNDARY_EPS)
            inside[cand[near]] = True
    return inside


def point_in_face(face: Face, p: Point2, chord_tol: float) -> bool:
    outer, holes = face_polylines(face, chord_tol)
    pts = np.array([[p.x, p.y]])
    return bool(face_contains_points(outer, holes, pts)[0])


# ---------------------------------------------------------------------------
# Loop-vs-loop relations (used by face merging and validation)


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def loops_intersect(a: Polyline2, b: Polyline2) -> bool:
    """True when the two loop boundaries properly cross."""
    av = a.vertices
    bv = b.vertices
    an = np.roll(av, -1, axis=0)
    bn = np.roll(bv, -1, axis=0)
    # Quick reject on bounding boxes.
    if (
        av[:, 0].max() < bv[:, 0].min()
        or bv[:, 0].max() < av[:, 0].min()
        or av[:, 1].max() < bv[:, 1].min()
        or bv[:, 1].max() < av[:, 1].min()
    ):
        return False
    for p1, p2 in zip(av, an):
        for q1, q2 in zip(bv, bn):
            if _segments_cross(p1, p2, q1, q2):
                return True
    return False


def loop_contains_loop(inner: Polyline2, outer: Polyline2) -> bool:
    """True when every vertex of ``inner`` lies inside ``outer``."""
    flags = points_in_polygon(inner.vertices, outer.vertices)
    return bool(np.all(flags))


def face_containment_violations(face: Face):
    """Hole placement problems for validation: (code, path, message) rows."""
    out = []
    try:
        outer, holes = face_polylines(face, 1e-3)
    except GeometryError as exc:
        return [("geometry", "", str(exc))]
    for i, hole in enumerate(holes):
        inside = points_in_polygon(hole.vertices, outer.vertices)
        near = distance_to_polygon(hole.vertices, outer.vertices) <= BOUNDARY_EPS
        if not bool(np.all(inside & ~near)):
            out.append(
                ("hole-outside-outer", f".holes[{i}]", "hole not strictly inside outer")
            )
    for i in range(len(holes)):
        for j in range(i + 1, len(holes)):
            if (
                loops_intersect(holes[i], holes[j])
                or loop_contains_loop(holes[i], holes[j])
                or loop_contains_loop(holes[j], holes[i])
            ):
                out.append(
                    ("holes-overlap", f".holes[{j}]", f"hole overlaps hole {i}")
                )
    return out


# ---------------------------------------------------------------------------
# Triangulation (ear clipping with hole bridging)


def _ensure_orientation(verts: np.ndarray, ccw: bool) -> np.ndarray:
    area = signed_area(verts)
    if (area > 0) != ccw:
        return verts[::-1].copy()
    return verts


def _bridge_hole(outer: np.ndarray, hole: np.ndarray) -> np.ndarray:
    """Join a hole ring into the outer ring through a visible bridge."""
    m = int(np.argmax(hole[:, 0]))
    hx, hy = hole[m]
    best_t = math.inf
    best_edge = -1
    n = len(outer)
    # Rightward ray from the hole's rightmost vertex.
    for i in range(n):
        x1, y1 = outer[i]
        x2, y2 = outer[(i + 1) % n]
        if (y1 > hy) == (y2 > hy):
            continue
        xint = x1 + (hy - y1) * (x2 - x1) / (y2 - y1)
        if xint >= hx - 1e-12 and xint < best_t:
            best_t = xint
            best_edge = i
    if best_edge < 0:
        raise GeometryError("hole is not inside the outer boundary")
    x1, y1 = outer[best_edge]
    x2, y2 = outer[(best_edge + 1) % n]
    cand = best_edge if x1 > x2 else (best_edge + 1) % n
    # The candidate must be visible from the hole vertex: reject if any
    # reflex outer vertex falls inside the sight triangle, bridging to the
    # nearest-by-angle such vertex instead.
    corner = outer[cand]
    tri = np.array([[hx, hy], [best_t, hy], corner])
    if signed_area(tri) < 0:
        tri = tri[::-1]
    best_alt = -1
    best_metric = math.inf
    for i in range(n):
        if i == cand:
            continue
        px, py = outer[i]
        if px < hx:
            continue
        s1 = _orient(tri[0], tri[1], (px, py))
        s2 = _orient(tri[1], tri[2], (px, py))
        s3 = _orient(tri[2], tri[0], (px, py))
        if s1 >= -1e-12 and s2 >= -1e-12 and s3 >= -1e-12:
            prev = outer[i - 1]
            nxt = outer[(i + 1) % n]
            if _orient(prev, outer[i], nxt) < 0:  # reflex in CCW ring
                metric = abs(py - hy) / max(px - hx, 1e-12)
                if metric < best_metric:
                    best_metric = metric
                    best_alt = i
    if best_alt >= 0:
        cand = best_alt
    rolled = np.roll(hole, -m, axis=0)
    return np.vstack(
        (
            outer[: cand + 1],
            rolled,
            rolled[:1],
            outer[cand : cand + 1],
            outer[cand + 1 :],
        )
    )


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _ear_clip(verts: np.ndarray) -> list:
    n = len(verts)
    if n < 3:
        raise GeometryError("polygon has fewer than 3 vertices")
    nxt = list(range(1, n)) + [0]
    prv = [n - 1] + list(range(n - 1))
    alive = n
    tris = []
    v = 0
    stuck = 0
    scale = max(np.ptp(verts[:, 0]), np.ptp(verts[:, 1]), 1e-12)
    eps = 1e-12 * scale * scale
    while alive > 3:
        a, b, c = prv[v], v, nxt[v]
        pa, pb, pc = verts[a], verts[b], verts[c]
        is_ear = False
        if _orient(pa, pb, pc) > eps:
            is_ear = True
            w = nxt[c]
            while w != a:
                pw = verts[w]
                if (
                    not _same_point(pw, pa)
                    and not _same_point(pw, pb)
                    and not _same_point(pw, pc)
                ):
                    if (
                        _orient(pa, pb, pw) >= -eps
                        and _orient(pb, pc, pw) >= -eps
                        and _orient(pc, pa, pw) >= -eps
                    ):
                        is_ear = False
                        break
                w = nxt[w]
        if is_ear:
            tris.append((a, b, c))
            nxt[a] = c
            prv[c] = a
            alive -= 1
            v = a
            stuck = 0
        else:
            v = nxt[v]
            stuck += 1
            if stuck > alive + 1:
                raise GeometryError("ear clipping failed (self-intersecting input?)")
    tris.append((prv[v], v, nxt[v]))
    return tris


def triangulate_face(face: Face, chord_tol: float) -> np.ndarray:
    """Triangles (T,3,2) covering outer-minus-holes of the tessellated face.

    Holes are slit into the outer ring through bridge edges, then the
    resulting simple ring is ear-clipped.  The summed triangle area is
    checked against the exact polygon area as a self-test.
    """
    outer, holes = face_polylines(face, chord_tol)
    ring = _ensure_orientation(outer.vertices, ccw=True)
    target = abs(signed_area(ring))
    if target < 1e-12:
        raise GeometryError("face has zero area")
    hole_rings = [_ensure_orientation(h.vertices, ccw=False) for h in holes]
    for h in hole_rings:
        target -= abs(signed_area(h))
    for h in sorted(hole_rings, key=lambda r: -r[:, 0].max()):
        ring = _bridge_hole(ring, h)
    tris = _ear_clip(ring)
    coords = np.array([[ring[a], ring[b], ring[c]] for a, b, c in tris])
    total = float(
        np.abs(
            0.5
            * (
                (coords[:, 1, 0] - coords[:, 0, 0])
                * (coords[:, 2, 1] - coords[:, 0, 1])
                - (coords[:, 1, 1] - coords[:, 0, 1])
                * (coords[:, 2, 0] - coords[:, 0, 0])
            )
        ).sum()
    )
    if target > 1e-12 and abs(total - target) > 1e-6 * max(target, 1.0):
        raise GeometryError(
            f"triangulation area {total:.9g} does not match face area {target:.9g}"
        )
    return coords


def _same_point(p, q) -> bool:
    return abs(p[0] - q[0]) <= 1e-12 and abs(p[1] - q[1]) <= 1e-12
