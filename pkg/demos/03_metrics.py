"""Geometric metrics between predicted and reference models.

Chamfer distance over boundary samples, IoU under the best axis-aligned
alignment, and the curve-type F1.
"""

from recad import (
    Extrude,
    Face,
    SEPair,
    CADModel,
    chamfer,
    eval_pair,
    geometric_similarity,
    iou_best,
    primitive_f1,
    sample_surface,
)
from recad.solid import ROTATIONS_24, rotate_model

import sys

sys.path.insert(0, "tests")
from conftest import box_model, circle_loop, cylinder_model, square_loop, z_sketch

gt = box_model(0.8, 0.5)
good = box_model(0.78, 0.52)       # nearly right
rotated = rotate_model(gt, ROTATIONS_24[9])
wrong = cylinder_model(0.4, 0.5)   # wrong topology

for name, pred in [("near copy", good), ("rotated copy", rotated), ("cylinder", wrong)]:
    cd = chamfer(sample_surface(pred, 2000, seed=0), sample_surface(gt, 2000, seed=0))
    best = iou_best(pred, gt, resolution=64)
    f1 = primitive_f1(pred, gt)
    sim = geometric_similarity(pred, gt)
    print(
        f"{name:12s} CDx1e3 {cd * 1e3:8.3f}  IoU_best {best.score:.3f} "
        f"(rot {best.alignment.index:2d})  P-F1 {f1:.3f}  sim {sim:.3f}"
    )

# The one-call report used by the eval CLI:
row = eval_pair(good, gt, resolution=64, samples=2000, seed=0)
print("report:", row.to_json())
