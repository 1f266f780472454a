"""The verifiable reward on raw solution texts.

Geometric term: min(best-aligned IoU, thresholded encoder similarity).
Format term: a well-formed think block. Failures never raise; they zero
the geometric term and record a category.
"""

import sys

from recad import RewardConfig, compute_reward, emit_model

sys.path.insert(0, "tests")
from conftest import box_model, cylinder_model

gt = box_model(0.8, 0.5)
cfg = RewardConfig()  # lambda1 0.1, lambda2 0.9, tau 0.55, normalized

solutions = {
    "perfect": "<think>square plate, one-sided extrude</think>\n```python\n"
    + emit_model(gt)
    + "```\n",
    "wrong shape": "<think>maybe a cylinder?</think>\n```python\n"
    + emit_model(cylinder_model(0.4, 0.5))
    + "```\n",
    "broken code": "<think>plan</think>\n```python\nthis is ( not a script\n```\n",
    "no think": emit_model(gt),
    "empty": "<think>only thoughts</think>",
}

for name, text in solutions.items():
    r = compute_reward(text, gt, cfg)
    print(
        f"{name:12s} total {r.total:.3f}  geometric {r.geometric:.3f} "
        f"format {r.format}  failure {r.failure_category}"
    )
