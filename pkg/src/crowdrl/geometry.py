"""Box arithmetic, IoU, greedy one-to-one matching and set precision/recall."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence


class InvalidBoxError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledBox:
    """Axis-aligned rectangle ``[x1, y1, x2, y2]`` in canvas pixels plus a class label."""

    x1: float
    y1: float
    x2: float
    y2: float
    label: str = "person"

    def __post_init__(self):
        coords = (self.x1, self.y1, self.x2, self.y2)
        for c in coords:
            if isinstance(c, bool) or not isinstance(c, (int, float)):
                raise InvalidBoxError(f"non-numeric coordinate {c!r}")
            if not math.isfinite(c):
                raise InvalidBoxError(f"non-finite coordinate {c!r}")
            if c < 0:
                raise InvalidBoxError(f"negative coordinate {c!r}")
        if not self.x1 < self.x2 or not self.y1 < self.y2:
            raise InvalidBoxError(f"degenerate box {list(coords)}")
        if not isinstance(self.label, str):
            raise InvalidBoxError(f"label must be a string, got {self.label!r}")

    @classmethod
    def from_list(cls, coords: Sequence[float], label: str = "person") -> "LabeledBox":
        if len(coords) != 4:
            raise InvalidBoxError(f"expected 4 coordinates, got {len(coords)}")
        return cls(*coords, label=label)

    @property
    def coords(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def translated(self, dx: float, dy: float) -> "LabeledBox":
        return LabeledBox(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy, self.label)

    def scaled(self, s: float) -> "LabeledBox":
        return LabeledBox(self.x1 * s, self.y1 * s, self.x2 * s, self.y2 * s, self.label)

    def to_dict(self) -> dict:
        return {"bbox_2d": list(self.coords), "label": self.label}


@dataclass(frozen=True)
class MatchResult:
    pairs: list[tuple[int, int, float]] = field(default_factory=list)
    unmatched_predictions: list[int] = field(default_factory=list)
    unmatched_ground_truth: list[int] = field(default_factory=list)

    @property
    def num_matches(self) -> int:
        return len(self.pairs)


def iou(a: LabeledBox, b: LabeledBox) -> float:
    """Intersection over union of two boxes. Labels are ignored."""
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    return min(1.0, inter / union)


def match_boxes(
    predictions: Sequence[LabeledBox],
    ground_truth: Sequence[LabeledBox],
    iou_threshold: float = 0.5,
    require_label_match: bool = True,
) -> MatchResult:
    """Greedy one-to-one matching by descending IoU.

    Candidate pairs need ``IoU >= iou_threshold`` (and equal labels when
    ``require_label_match``). Ties are broken by lower prediction index, then
    lower ground-truth index.
    """
    if not 0 < iou_threshold <= 1:
        raise ValueError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    candidates = []
    for i, p in enumerate(predictions):
        for j, g in enumerate(ground_truth):
            if require_label_match and p.label != g.label:
                continue
            v = iou(p, g)
            if v >= iou_threshold:
                candidates.append((-v, i, j))
    candidates.sort()

    used_p: set[int] = set()
    used_g: set[int] = set()
    pairs = []
    for neg_v, i, j in candidates:
        if i in used_p or j in used_g:
            continue
        used_p.add(i)
        used_g.add(j)
        pairs.append((i, j, -neg_v))
    return MatchResult(
        pairs=pairs,
        unmatched_predictions=[i for i in range(len(predictions)) if i not in used_p],
        unmatched_ground_truth=[j for j in range(len(ground_truth)) if j not in used_g],
    )


def precision_recall_from_counts(num_matches: int, num_pred: int, num_gt: int) -> tuple[float, float]:
    # Empty-set conventions: nothing predicted and nothing present is a perfect answer.
    if num_pred == 0:
        precision = 1.0 if num_gt == 0 else 0.0
    else:
        precision = num_matches / num_pred
    recall = 1.0 if num_gt == 0 else num_matches / num_gt
    return precision, recall


def precision_recall(
    predictions: Sequence[LabeledBox],
    ground_truth: Sequence[LabeledBox],
    iou_threshold: float = 0.5,
    require_label_match: bool = True,
) -> tuple[float, float]:
    m = match_boxes(predictions, ground_truth, iou_threshold, require_label_match)
    return precision_recall_from_counts(m.num_matches, len(predictions), len(ground_truth))
