"""Mesh and voxel file formats.

OBJ export writes deduplicated vertices (``v x y z``) in first-use order
followed by 1-based triangle faces (``f a b c``), grouped per sketch-
extrude pair.  Voxel grids serialize to a little-endian binary: magic
``RCVX``, version byte, uint32 dims, float64 origin and cell size, then
run-length-encoded occupancy (uint32 run lengths, starting with an empty
run, flattened in C order).
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import JsonFormatError
from .model import Vec3
from .solid import TriMesh, VoxelGrid

VOXEL_MAGIC = b"RCVX"
VOXEL_VERSION = 1


def mesh_to_obj(mesh: TriMesh) -> str:
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}")
    current_group = None
    for tri, tag in zip(mesh.triangles, mesh.tags):
        group = f"pair{tag[0]}"
        if group != current_group:
            lines.append(f"g {group}")
            current_group = group
        lines.append(f"f {tri[0] + 1} {tri[1] + 1} {tri[2] + 1}")
    return "\n".join(lines) + "\n"


def grid_to_bytes(grid: VoxelGrid) -> bytes:
    flat = grid.occupancy.ravel(order="C")
    change = np.nonzero(np.diff(flat))[0] + 1
    bounds = np.concatenate(([0], change, [len(flat)]))
    lengths = np.diff(bounds).tolist()
    runs = ([0] if flat[0] else []) + lengths
    header = struct.pack(
        "<4sB3I8d",
        VOXEL_MAGIC,
        VOXEL_VERSION,
        *grid.dims,
        grid.origin.x,
        grid.origin.y,
        grid.origin.z,
        grid.cell,
        grid.center.x,
        grid.center.y,
        grid.center.z,
        0.0,
    )
    return header + struct.pack(f"<{len(runs)}I", *runs)


def grid_from_bytes(blob: bytes) -> VoxelGrid:
    head_size = struct.calcsize("<4sB3I8d")
    if len(blob) < head_size:
        raise JsonFormatError("voxel blob too short")
    magic, version, nx, ny, nz, ox, oy, oz, cell, cx, cy, cz, _pad = struct.unpack(
        "<4sB3I8d", blob[:head_size]
    )
    if magic != VOXEL_MAGIC or version != VOXEL_VERSION:
        raise JsonFormatError("bad voxel magic or version")
    runs = np.frombuffer(blob[head_size:], dtype="<u4")
    total = int(runs.sum())
    if total != nx * ny * nz:
        raise JsonFormatError("voxel run lengths do not match dims")
    flat = np.zeros(total, dtype=bool)
    pos = 0
    value = False
    for run in runs:
        if value:
            flat[pos : pos + run] = True
        pos += int(run)
        value = not value
    return VoxelGrid(
        Vec3(ox, oy, oz), cell, (int(nx), int(ny), int(nz)),
        flat.reshape((int(nx), int(ny), int(nz))), Vec3(cx, cy, cz),
    )
