"""Solid evaluation of CAD models.

Solids are never represented by boundary meshes for boolean purposes;
instead membership of a point is evaluated analytically per sketch-extrude
pair and folded left-to-right through the boolean ops.  Voxel grids
discretize that membership on a cubic lattice, prism meshes provide
surfaces for sampling and export, and unit-density mass properties drive
the similarity normalization (centroid plus radius of gyration).

Voxel-cell centers are computed as ``(i + 0.5 - n/2) * cell + center`` so
that grids of axis-aligned-rotated models are exact array rotations of
each other; several reductions below sum in value order rather than index
order for the same reason.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySolidError, GeometryError
from .model import BooleanOp, CADModel, Circle, Extrude, Sketch, Vec3, resolve_loop_points
from .planar import (
    Polyline2,
    face_contains_points,
    face_polylines,
    signed_area,
    triangulate_face,
)

# Default sagitta tolerance as a fraction of the model diagonal.
CHORD_TOL_FRACTION = 1e-3
# Fractional padding added per side to automatic voxel bounds.
BOUNDS_PADDING = 0.05
# Height-slab tolerance: points on a cap surface count as inside.
HEIGHT_EPS = 1e-9

_MEMBERSHIP_CHUNK = 1 << 17


@dataclass(frozen=True)
class TriMesh:
    """Indexed triangle mesh with per-triangle (pair index, kind) tags."""

    vertices: np.ndarray
    triangles: np.ndarray
    tags: tuple

    def triangle_points(self) -> np.ndarray:
        return self.vertices[self.triangles]


@dataclass(frozen=True)
class VoxelGrid:
    """Cubic-cell occupancy lattice.

    ``origin`` is the minimum corner; ``center`` is the box center kept
    separately because cell centers are derived from it exactly.
    """

    origin: Vec3
    cell: float
    dims: tuple
    occupancy: np.ndarray
    center: Vec3 = Vec3(0.0, 0.0, 0.0)

    @property
    def empty(self) -> bool:
        return not bool(self.occupancy.any())

    @property
    def count(self) -> int:
        return int(self.occupancy.sum(dtype=np.int64))

    def axis_centers(self, axis: int) -> np.ndarray:
        n = self.dims[axis]
        c = (self.center.x, self.center.y, self.center.z)[axis]
        return (np.arange(n) + 0.5 - n / 2.0) * self.cell + c

    def same_frame(self, other: "VoxelGrid") -> bool:
        return (
            self.dims == other.dims
            and self.cell == other.cell
            and self.center == other.center
        )


@dataclass(frozen=True)
class MassProperties:
    volume: float
    centroid: Vec3
    inertia_trace: float

    @property
    def gyration_radius(self) -> float:
        return math.sqrt(self.inertia_trace / (2.0 * self.volume))


@dataclass(frozen=True)
class SimilarityTransform:
    """Maps x to (x + translation) * scale."""

    translation: Vec3
    scale: float


# ---------------------------------------------------------------------------
# Sketch frames and compiled membership


class _CompiledPair:
    """One SE pair flattened for batch point-membership queries."""

    def __init__(self, pair, chord_tol: float):
        sk = pair.sketch
        self.origin = np.array(sk.origin.as_tuple())
        self.x_axis = np.array(sk.x_axis.as_tuple())
        self.normal = np.array(sk.normal.as_tuple())
        self.y_axis = np.array(sk.y_axis().as_tuple())
        self.dist_pos = pair.extrude.dist_pos
        self.dist_neg = pair.extrude.dist_neg
        self.op = pair.op
        self.faces = [face_polylines(f, chord_tol) for f in sk.faces]

    def contains(self, pts: np.ndarray) -> np.ndarray:
        d = pts - self.origin
        h = d @ self.normal
        mask = (h >= -self.dist_neg - HEIGHT_EPS) & (h <= self.dist_pos + HEIGHT_EPS)
        result = np.zeros(len(pts), dtype=bool)
        if not mask.any():
            return result
        uv = np.column_stack((d[mask] @ self.x_axis, d[mask] @ self.y_axis))
        hit = np.zeros(len(uv), dtype=bool)
        for outer, holes in self.faces:
            hit |= face_contains_points(outer, holes, uv)
        result[mask] = hit
        return result


def compile_model(model: CADModel, chord_tol: float = None) -> list:
    if chord_tol is None:
        chord_tol = default_chord_tol(model)
    return [_CompiledPair(pair, chord_tol) for pair in model.pairs]


def membership_batch(compiled: list, pts: np.ndarray) -> np.ndarray:
    """Boolean fold of per-pair membership over point rows."""
    acc = np.zeros(len(pts), dtype=bool)
    for cp in compiled:
        inside = cp.contains(pts)
        if cp.op in (BooleanOp.NEW_BODY, BooleanOp.JOIN):
            acc |= inside
        elif cp.op == BooleanOp.CUT:
            acc &= ~inside
        else:
            acc &= inside
    return acc


def membership(model: CADModel, p: Vec3, chord_tol: float = None) -> bool:
    pts = np.array([p.as_tuple()])
    return bool(membership_batch(compile_model(model, chord_tol), pts)[0])


def point_in_se(pair, p: Vec3, chord_tol: float = None) -> bool:
    """Membership in a single extruded sketch, ignoring its boolean op."""
    if chord_tol is None:
        chord_tol = default_chord_tol(CADModel((pair,)))
    cp = _CompiledPair(pair, chord_tol)
    return bool(cp.contains(np.array([p.as_tuple()]))[0])


# ---------------------------------------------------------------------------
# Extents


def _loop_control_points(loop) -> np.ndarray:
    if loop.is_circle():
        r = loop.curves[0].radius
        cx, cy = loop.start.x, loop.start.y
        return np.array([[cx - r, cy - r], [cx + r, cy + r]])
    pts = resolve_loop_points(loop)
    return np.array([[p.x, p.y] for p in pts])


def _pair_corner_points(pair, pts2: np.ndarray) -> np.ndarray:
    sk = pair.sketch
    o = np.array(sk.origin.as_tuple())
    xa = np.array(sk.x_axis.as_tuple())
    ya = np.array(sk.y_axis().as_tuple())
    na = np.array(sk.normal.as_tuple())
    plane = o + pts2[:, :1] * xa + pts2[:, 1:] * ya
    top = plane + pair.extrude.dist_pos * na
    bot = plane - pair.extrude.dist_neg * na
    return np.vstack((top, bot))


def _control_bbox(model: CADModel):
    pts = []
    for pair in model.pairs:
        for face in pair.sketch.faces:
            for loop in (face.outer, *face.holes):
                pts.append(_pair_corner_points(pair, _loop_control_points(loop)))
    allpts = np.vstack(pts)
    return allpts.min(axis=0), allpts.max(axis=0)


def default_chord_tol(model: CADModel) -> float:
    lo, hi = _control_bbox(model)
    ext = hi - lo
    # Sorted before summing so the diagonal is identical for axis-permuted
    # copies of the same model.
    diag = math.sqrt(float(np.sum(np.sort(ext * ext))))
    return max(CHORD_TOL_FRACTION * diag, 1e-9)


def model_bbox(model: CADModel, chord_tol: float = None):
    """Axis-aligned bounds of the tessellated prism surfaces."""
    if chord_tol is None:
        chord_tol = default_chord_tol(model)
    pts = []
    for pair in model.pairs:
        for face in pair.sketch.faces:
            outer, holes = face_polylines(face, chord_tol)
            for poly in (outer, *holes):
                pts.append(_pair_corner_points(pair, poly.vertices))
    allpts = np.vstack(pts)
    return allpts.min(axis=0), allpts.max(axis=0)


# ---------------------------------------------------------------------------
# Meshing


def extrude_mesh(sketch: Sketch, extrude: Extrude, chord_tol: float, pair_index: int = 0) -> TriMesh:
    """Watertight prism mesh: two triangulated caps plus quad-split walls.

    Cap triangles wind so normals point along +normal on the top cap and
    -normal on the bottom; wall quads follow ring orientation (outers
    counter-clockwise, holes clockwise) so every normal faces outward.
    """
    o = np.array(sketch.origin.as_tuple())
    xa = np.array(sketch.x_axis.as_tuple())
    ya = np.array(sketch.y_axis().as_tuple())
    na = np.array(sketch.normal.as_tuple())

    verts = []
    index_of = {}

    def vid(pt2, top: bool) -> int:
        key = (float(pt2[0]), float(pt2[1]), top)
        if key not in index_of:
            h = extrude.dist_pos if top else -extrude.dist_neg
            index_of[key] = len(verts)
            verts.append(o + pt2[0] * xa + pt2[1] * ya + h * na)
        return index_of[key]

    tris = []
    tags = []
    for face in sketch.faces:
        outer, holes = face_polylines(face, chord_tol)
        rings = [_oriented(outer.vertices, ccw=True)]
        rings += [_oriented(h.vertices, ccw=False) for h in holes]
        cap = triangulate_face(face, chord_tol)
        for tri in cap:
            a, b, c = (vid(p, True) for p in tri)
            tris.append((a, b, c))
            tags.append((pair_index, "cap-top"))
            a, b, c = (vid(p, False) for p in tri)
            tris.append((a, c, b))
            tags.append((pair_index, "cap-bottom"))
        for ring in rings:
            nv = len(ring)
            for i in range(nv):
                p, q = ring[i], ring[(i + 1) % nv]
                bp, bq = vid(p, False), vid(q, False)
                tp, tq = vid(p, True), vid(q, True)
                tris.append((bp, bq, tq))
                tris.append((bp, tq, tp))
                tags.append((pair_index, "wall"))
                tags.append((pair_index, "wall"))
    return TriMesh(np.array(verts), np.array(tris, dtype=np.int64), tuple(tags))


def _oriented(verts: np.ndarray, ccw: bool) -> np.ndarray:
    if (signed_area(verts) > 0) != ccw:
        return verts[::-1].copy()
    return verts


def model_mesh(model: CADModel, chord_tol: float = None) -> TriMesh:
    """Concatenated per-pair prism meshes (booleans are not resolved)."""
    if chord_tol is None:
        chord_tol = default_chord_tol(model)
    meshes = [
        extrude_mesh(p.sketch, p.extrude, chord_tol, pair_index=i)
        for i, p in enumerate(model.pairs)
    ]
    offsets = np.cumsum([0] + [len(m.vertices) for m in meshes[:-1]])
    verts = np.vstack([m.vertices for m in meshes])
    tris = np.vstack([m.triangles + off for m, off in zip(meshes, offsets)])
    tags = tuple(t for m in meshes for t in m.tags)
    return TriMesh(verts, tris, tags)


def mesh_volume(mesh: TriMesh) -> float:
    """Signed volume by the divergence theorem (valid per watertight part)."""
    p = mesh.triangle_points()
    return float(np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2])).sum() / 6.0)


# ---------------------------------------------------------------------------
# Voxelization


def voxelize(model: CADModel, resolution: int, bounds=None, chord_tol: float = None) -> VoxelGrid:
    """Sample membership at the centers of a cubic-cell lattice.

    Automatic bounds take the tessellated bounding box, pad each side by
    5%, and expand the box to a cube so every axis shares one cell size
    (axis-aligned rotation searches then permute cells exactly).  Explicit
    ``bounds`` are a (min, max) corner pair, also cubified.  An empty
    result is flagged on the grid, not raised.
    """
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    compiled = compile_model(model, chord_tol)
    if bounds is None:
        lo, hi = model_bbox(model, chord_tol)
        ext = hi - lo
        lo = lo - BOUNDS_PADDING * ext
        hi = hi + BOUNDS_PADDING * ext
    else:
        lo = np.asarray(bounds[0], dtype=float)
        hi = np.asarray(bounds[1], dtype=float)
    center = (lo + hi) / 2.0
    side = float(np.max(hi - lo))
    if side <= 0:
        raise GeometryError("degenerate voxel bounds")
    cell = side / resolution
    dims = (resolution, resolution, resolution)
    axes = [
        (np.arange(resolution) + 0.5 - resolution / 2.0) * cell + center[k]
        for k in range(3)
    ]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack((gx.ravel(), gy.ravel(), gz.ravel()))
    occ = np.empty(len(pts), dtype=bool)
    for s in range(0, len(pts), _MEMBERSHIP_CHUNK):
        occ[s : s + _MEMBERSHIP_CHUNK] = membership_batch(
            compiled, pts[s : s + _MEMBERSHIP_CHUNK]
        )
    origin = Vec3(*(center - side / 2.0))
    return VoxelGrid(origin, cell, dims, occ.reshape(dims), Vec3(*center))


def symmetric_bounds(half_extent: float):
    h = float(half_extent)
    return (np.array([-h, -h, -h]), np.array([h, h, h]))


# ---------------------------------------------------------------------------
# Mass properties and normalization


def _axis_index_counts(occ: np.ndarray):
    other = {0: (1, 2), 1: (0, 2), 2: (0, 1)}
    return [occ.sum(axis=other[m], dtype=np.int64) for m in range(3)]


def mass_properties(grid: VoxelGrid) -> MassProperties:
    """Riemann sums over occupied cell centers at unit density.

    Centroid and inertia reduce over per-axis integer index counts in a
    sign-canonical form, which keeps the results exactly equivariant
    under axis-aligned rotations of the grid.
    """
    if grid.empty:
        raise EmptySolidError("voxel grid is empty")
    count = grid.count
    cell = grid.cell
    vol = count * cell**3
    counts = _axis_index_counts(grid.occupancy)
    cvals = (grid.center.x, grid.center.y, grid.center.z)
    centroid = []
    axis_sq = []
    for m in range(3):
        n = grid.dims[m]
        idx = np.arange(n, dtype=np.int64)
        s = int(np.sum(counts[m] * idx))
        num = 2 * s - count * (n - 1)
        mu = num / (2 * count)
        centroid.append(float(mu * cell + cvals[m]))
        dev = (idx + 0.5 - n / 2.0 - mu) * cell
        terms = np.sort(counts[m] * dev * dev)
        axis_sq.append(float(np.sum(terms)))
    second_moment = float(np.sum(np.sort(np.array(axis_sq)))) * cell**3
    return MassProperties(vol, Vec3(*centroid), 2.0 * second_moment)


def normalize_transform(props: MassProperties) -> SimilarityTransform:
    """Center on the centroid and scale by 1 / radius-of-gyration."""
    if props.volume <= 0:
        raise EmptySolidError("cannot normalize a zero-volume solid")
    rg = props.gyration_radius
    if rg <= 0:
        raise EmptySolidError("zero radius of gyration")
    t = props.centroid
    return SimilarityTransform(Vec3(-t.x, -t.y, -t.z), 1.0 / rg)


def apply_transform(model: CADModel, tf: SimilarityTransform) -> CADModel:
    """Exact uniform scale + translation of a model's parameters."""
    from .model import _map_model  # shared structural mapper

    s = tf.scale
    t = tf.translation

    def fn_pt(p, path):
        from .model import Point2

        return Point2(p.x * s, p.y * s)

    def fn_angle(a, path):
        return a

    def fn_len(v, path):
        return v * s

    def fn_vec(v, path):
        return Vec3((v.x + t.x) * s, (v.y + t.y) * s, (v.z + t.z) * s)

    return CADModel(_map_model(model.pairs, fn_pt, fn_angle, fn_len, fn_vec))


def normalize_model(model: CADModel, resolution: int = 64) -> CADModel:
    """Apply the centroid / gyration-radius normalization to a model."""
    props = mass_properties(voxelize(model, resolution))
    return apply_transform(model, normalize_transform(props))


# ---------------------------------------------------------------------------
# Axis-aligned rotations


def rotations_24() -> list:
    """The 24 proper axis-aligned rotation matrices, identity first."""
    mats = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            m = np.zeros((3, 3), dtype=np.int64)
            for row, (col, s) in enumerate(zip(perm, signs)):
                m[row, col] = s
            if int(round(np.linalg.det(m))) == 1:
                mats.append(m)
    return mats


ROTATIONS_24 = rotations_24()


def rotate_model(model: CADModel, rot: np.ndarray) -> CADModel:
    """Rotate a model about the world origin (exact for axis-aligned rots)."""
    r = np.asarray(rot, dtype=float)

    def rv(v: Vec3) -> Vec3:
        a = r @ np.array(v.as_tuple())
        return Vec3(float(a[0]), float(a[1]), float(a[2]))

    pairs = []
    for pair in model.pairs:
        sk = pair.sketch
        pairs.append(
            type(pair)(
                Sketch(rv(sk.origin), rv(sk.x_axis), rv(sk.normal), sk.faces),
                pair.extrude,
                pair.op,
            )
        )
    return CADModel(tuple(pairs))


def rotate_occupancy(occ: np.ndarray, rot: np.ndarray) -> np.ndarray:
    """Occupancy of the rotated solid on the same origin-centered grid.

    Requires a cubic grid whose box is symmetric about the rotation
    center; the result is then exactly ``voxelize(rotate_model(...))``.
    """
    r = np.asarray(rot, dtype=np.int64)
    rows = [int(np.nonzero(r[:, m])[0][0]) for m in range(3)]
    signs = [int(r[rows[m], m]) for m in range(3)]
    out = occ
    for m in range(3):
        if signs[m] < 0:
            out = np.flip(out, axis=m)
    axes = [0, 0, 0]
    for m in range(3):
        axes[rows[m]] = m
    return np.ascontiguousarray(np.transpose(out, axes))


# ---------------------------------------------------------------------------
# Surface sampling


def sample_surface(model: CADModel, n: int, seed: int, chord_tol: float = None) -> np.ndarray:
    """Deterministic area-weighted samples of the composed solid boundary.

    Candidate points are drawn on the prism surfaces of every pair and
    kept only where membership flips across the surface along the local
    normal, which discards faces swallowed by later boolean ops.
    """
    if n < 1:
        raise ValueError("need n >= 1 samples")
    if chord_tol is None:
        chord_tol = default_chord_tol(model)
    compiled = compile_model(model, chord_tol)
    mesh = model_mesh(model, chord_tol)
    tri = mesh.triangle_points()
    edge1 = tri[:, 1] - tri[:, 0]
    edge2 = tri[:, 2] - tri[:, 0]
    cross = np.cross(edge1, edge2)
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    total = areas.sum()
    if total <= 0:
        raise EmptySolidError("model has no surface area")
    normals = cross / np.maximum(np.linalg.norm(cross, axis=1), 1e-300)[:, None]
    prob = areas / total
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    eps = 1e-4 * float(np.linalg.norm(hi - lo))

    rng = np.random.default_rng(seed)
    kept = []
    kept_count = 0
    batch = max(2 * n, 1024)
    for round_no in range(1000):
        idx = rng.choice(len(areas), size=batch, p=prob)
        u = rng.random(batch)
        v = rng.random(batch)
        flip = u + v > 1.0
        u[flip] = 1.0 - u[flip]
        v[flip] = 1.0 - v[flip]
        pts = tri[idx, 0] + u[:, None] * edge1[idx] + v[:, None] * edge2[idx]
        d = normals[idx]
        inside_pos = membership_batch(compiled, pts + eps * d)
        inside_neg = membership_batch(compiled, pts - eps * d)
        keep = inside_pos != inside_neg
        if keep.any():
            kept.append(pts[keep])
            kept_count += int(keep.sum())
        if kept_count >= n:
            return np.vstack(kept)[:n]
        if round_no >= 50 and kept_count == 0:
            break
    raise EmptySolidError("surface sampling found no retained boundary points")
