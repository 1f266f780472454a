"""Hierarchical primitive curriculum and candidate code filtering.

Primitives extracted from a model corpus are ordered by hierarchy level
(loops before faces before sketches before pairs before models) and,
within a level, by curve count; near-duplicates under the encoder are
dropped.  The rewrite filter keeps candidate scripts whose executed
geometry stays close to a reference primitive, falling back to the
reference's own hardcoded script when nothing survives.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import RecadError
from .lang import ExecLimits, emit_hardcoded, execute
from .metrics import (
    EncoderInterface,
    OccupancyEncoder,
    _half_extent,
    canonical_rotation_index,
    geometric_similarity,
)
from .model import CADModel, Primitive, count_curves, extract_primitives, wrap_primitive
from .solid import ROTATIONS_24, normalize_model, rotate_occupancy, symmetric_bounds, voxelize

logger = logging.getLogger("recad.curriculum")

LEVEL_NAMES = ("L", "F", "S", "SE", "MSE")

# Dedup embeds at a coarser default grid than the metric encoder: the
# 0.95 duplicate test is insensitive to resolution and corpus scans pay
# for thousands of voxelizations.
DEDUP_RESOLUTION = 32


@dataclass(frozen=True)
class CurriculumEntry:
    id: str
    level: str
    curve_count: int
    source: str
    primitive: Primitive
    hardness: Optional[bool] = None
    guidance: tuple = ()

    def to_json(self) -> dict:
        from .jsonio import model_to_json

        out = {
            "id": self.id,
            "level": self.level,
            "curve_count": self.curve_count,
            "source": self.source,
            "model": model_to_json(wrap_primitive(self.primitive)),
        }
        if self.hardness is not None:
            out["hardness"] = self.hardness
        if self.guidance:
            out["guidance"] = list(self.guidance)
        return out


@dataclass(frozen=True)
class CurriculumManifest:
    entries: tuple

    def level_counts(self) -> dict:
        counts = {name: 0 for name in LEVEL_NAMES}
        for e in self.entries:
            counts[e.level] += 1
        return counts


def _sort_key(entry: CurriculumEntry):
    return (LEVEL_NAMES.index(entry.level), entry.curve_count, entry.source, entry.id)


def _canonical_occupancy(prim: Primitive, resolution: int) -> np.ndarray:
    """Occupancy of the normalized solid in its canonical rotation.

    Canonicalizing the rotation makes plain embedding cosine invariant to
    axis-aligned rotations of the primitive, so rotated duplicates score
    exactly 1.
    """
    wrapped = wrap_primitive(prim)
    norm = normalize_model(wrapped, resolution)
    grid = voxelize(norm, resolution, bounds=symmetric_bounds(_half_extent(norm)))
    idx = canonical_rotation_index(grid.occupancy)
    return rotate_occupancy(grid.occupancy, ROTATIONS_24[idx])


def _as_grid(occ: np.ndarray):
    from .model import Vec3
    from .solid import VoxelGrid

    return VoxelGrid(Vec3(0, 0, 0), 1.0, occ.shape, occ)


def dedup_primitives(
    prims: Sequence[Primitive],
    encoder: EncoderInterface = None,
    threshold: float = 0.95,
    resolution: int = DEDUP_RESOLUTION,
) -> list:
    """Greedy scan keeping the first representative of each near-duplicate
    class: a primitive is dropped when its similarity to a kept primitive
    of the same hierarchy level exceeds ``threshold`` (levels are
    separate curriculum stages, so a face never counts as a duplicate of
    its own loop even though their wrapped solids coincide).  Primitives
    whose solids cannot be embedded (degenerate geometry) are kept
    verbatim.

    With the default occupancy encoder, similarity is computed from
    packed bit counts (bit-identical to embedding cosine) so corpus-scale
    scans avoid materializing float embeddings.  A custom encoder embeds
    the same canonically rotated grids.
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError("threshold must be in (0, 1]")
    packed_path = encoder is None or type(encoder) is OccupancyEncoder
    if encoder is not None:
        resolution = encoder.resolution
    kept = []
    kept_embeds = {}  # level -> list of embeddings
    for prim in prims:
        try:
            occ = _canonical_occupancy(prim, resolution)
        except RecadError:
            logger.warning("could not embed primitive for dedup; keeping it")
            kept.append(prim)
            continue
        if packed_path:
            embed = OccupancyEncoder.pack(occ)
        else:
            embed = encoder.embed(_as_grid(occ))
        duplicate = False
        for other in kept_embeds.setdefault(prim.level, []):
            if packed_path:
                sim = OccupancyEncoder.packed_similarity(
                    other[0], other[1], embed[0], embed[1], embed[2]
                )
            else:
                sim = EncoderInterface.vector_similarity(other, embed)
            if sim > threshold:
                duplicate = True
                break
        if not duplicate:
            kept.append(prim)
            kept_embeds[prim.level].append(embed)
    return kept


def build_curriculum(
    models: Sequence[CADModel],
    model_ids: Sequence[str] = None,
    threshold: float = 0.95,
    resolution: int = DEDUP_RESOLUTION,
) -> CurriculumManifest:
    """Extract, order, and deduplicate the primitive hierarchy of a corpus."""
    if model_ids is None:
        model_ids = [f"model{i:04d}" for i in range(len(models))]
    entries = []
    for mid, model in zip(model_ids, models):
        for prim in extract_primitives(model):
            i, j, k = prim.source
            entry = CurriculumEntry(
                id=f"{mid}:{prim.level.name}:{i}.{j}.{k}",
                level=prim.level.name,
                curve_count=count_curves(prim),
                source=mid,
                primitive=prim,
            )
            entries.append(entry)
    entries.sort(key=_sort_key)
    kept_prims = dedup_primitives(
        [e.primitive for e in entries], threshold=threshold, resolution=resolution
    )
    kept_ids = set(id(p) for p in kept_prims)
    return CurriculumManifest(tuple(e for e in entries if id(e.primitive) in kept_ids))


def rewrite_filter(
    reference: Primitive,
    candidates: Sequence[str],
    encoder: EncoderInterface = None,
    tau_s: float = 0.95,
    limits: ExecLimits = ExecLimits(),
) -> list:
    """Keep candidate scripts geometrically faithful to the reference.

    Each candidate is executed in the sandbox and scored against the
    reference's canonical solid; failures are silently filtered.  When no
    candidate survives, the reference's own hardcoded script is returned
    as the sole guidance code.
    """
    if not (0.0 < tau_s < 1.0):
        raise ValueError("tau_s must be in (0, 1)")
    if encoder is None:
        encoder = OccupancyEncoder()
    ref_model = wrap_primitive(reference)
    kept = []
    for text in candidates:
        try:
            model = execute(text, limits)
            sim = geometric_similarity(model, ref_model, encoder)
        except RecadError:
            continue
        if sim > tau_s:
            kept.append(text)
    if not kept:
        return [emit_hardcoded(reference)]
    return kept
