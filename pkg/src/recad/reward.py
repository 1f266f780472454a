"""Verifiable reward for generated CAD solutions.

A solution text holds an optional think block followed by a script
payload.  The geometric term is min(best-alignment IoU, thresholded
encoder similarity); the format term pays for a well-formed think block.
The reward is total on all inputs: failures zero the geometric term and
record a category instead of raising.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import ExtractionError, RecadError
from .lang import ExecLimits, execute
from .metrics import (
    EncoderInterface,
    OccupancyEncoder,
    _centered,
    _common_grids,
    geometric_similarity,
    iou_best,
    rotation_scores,
)
from .model import CADModel

_FENCE_RE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)
_THINK_OPEN = "<think>"
_THINK_CLOSE = "</think>"


@dataclass(frozen=True)
class RewardConfig:
    lambda1: float = 0.1
    lambda2: float = 0.9
    tau: float = 0.55
    normalize_before: bool = True
    resolution: int = 64
    strict_zero_on_failure: bool = False

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("reward weights must be non-negative")
        if not (0.0 <= self.tau < 1.0):
            raise ValueError("tau must lie in [0, 1)")


@dataclass(frozen=True)
class RewardBreakdown:
    geometric: float
    format: int
    total: float
    failure_category: Optional[str] = None
    iou_best: Optional[float] = None
    similarity: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "geometric": self.geometric,
            "format": self.format,
            "failure_category": self.failure_category,
            "iou_best": self.iou_best,
            "similarity": self.similarity,
        }


def phi(s: float, tau: float) -> float:
    """Thresholded linear scaling: 0 at or below tau, 1 at s = 1."""
    return max(0.0, (s - tau) / (1.0 - tau))


def format_reward(text: str) -> int:
    """1 iff the text opens with a think block that is properly closed."""
    stripped = text.lstrip()
    if not stripped.startswith(_THINK_OPEN):
        return 0
    if _THINK_CLOSE not in stripped[len(_THINK_OPEN):]:
        return 0
    return 1


def extract_script(text: str) -> str:
    """Script payload: the last fenced code block, else the text after the
    think block.  Raises ``ExtractionError`` when nothing remains."""
    blocks = _FENCE_RE.findall(text)
    if blocks:
        payload = blocks[-1]
    else:
        payload = text
        idx = text.find(_THINK_CLOSE)
        if idx >= 0:
            payload = text[idx + len(_THINK_CLOSE):]
    if not payload.strip():
        raise ExtractionError("solution contains no script payload")
    return payload


def compute_reward(
    text: str,
    gt: CADModel,
    cfg: RewardConfig = RewardConfig(),
    encoder: EncoderInterface = None,
    limits: ExecLimits = ExecLimits(),
) -> RewardBreakdown:
    """Score a solution text against a ground-truth model.

    With ``normalize_before`` both solids are normalized (centroid +
    radius of gyration) before the IoU; the similarity term always
    compares normalized grids, mirroring scale-free image features.
    """
    if encoder is None:
        encoder = OccupancyEncoder(cfg.resolution)
    fmt = format_reward(text)
    geometric = 0.0
    failure = None
    iou_score = None
    similarity = None
    try:
        script = extract_script(text)
        model = execute(script, limits)
        if cfg.normalize_before:
            iou_score, similarity = _aligned_scores(model, gt, cfg.resolution, encoder)
        else:
            iou_score = iou_best(
                model, gt, resolution=cfg.resolution, normalize=False
            ).score
            similarity = geometric_similarity(model, gt, encoder)
        geometric = min(iou_score, phi(similarity, cfg.tau))
    except RecadError as exc:
        failure = exc.category
    if failure is not None and cfg.strict_zero_on_failure:
        total = 0.0
    else:
        total = cfg.lambda1 * geometric + cfg.lambda2 * fmt
    return RewardBreakdown(
        geometric=geometric,
        format=fmt,
        total=total,
        failure_category=failure,
        iou_best=iou_score,
        similarity=similarity,
    )


def _aligned_scores(a: CADModel, b: CADModel, resolution: int, encoder):
    """(best IoU, similarity-at-best-alignment) on one shared grid pass."""
    a2 = _centered(a, resolution, normalize=True)
    b2 = _centered(b, resolution, normalize=True)
    ga, gb = _common_grids(a2, b2, resolution)
    rows = rotation_scores(ga.occupancy, gb.occupancy, encoder)
    best_iou = max(r[0] for r in rows)
    best = max(range(len(rows)), key=lambda i: (rows[i][0], rows[i][1], -i))
    sim = min(max(rows[best][1], 0.0), 1.0)
    return best_iou, sim
