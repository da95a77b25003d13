"""Format, variance-guided look, and weighted precision-recall accuracy rewards."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .geometry import LabeledBox, iou, match_boxes, precision_recall_from_counts
from .response import StructuredResponse, format_reward


@dataclass
class ResponseGroup:
    scene_id: str
    ground_truth: list[LabeledBox]
    responses: list[StructuredResponse]

    def __post_init__(self):
        if len(self.responses) < 2:
            raise ValueError(f"a response group needs G >= 2 responses, got {len(self.responses)}")

    @property
    def size(self) -> int:
        return len(self.responses)


def normalization_factor(group_size: int) -> float:
    """Smallest alpha with alpha * f(1 - f) <= 1 over achievable frequencies k/G."""
    if group_size < 2:
        raise ValueError("group_size must be >= 2")
    g = group_size
    best = max((k / g) * (1 - k / g) for k in range(1, g))
    return 1.0 / best


@dataclass(frozen=True)
class LookRewardConfig:
    group_size: int = 8
    iou_threshold: float = 0.5

    def __post_init__(self):
        if not 0 < self.iou_threshold <= 1:
            raise ValueError("iou_threshold must be in (0, 1]")
        if self.group_size < 2:
            raise ValueError("group_size must be >= 2")

    @property
    def alpha(self) -> float:
        return normalization_factor(self.group_size)

    @property
    def penalty(self) -> float:
        return -1.0 / self.alpha


@dataclass(frozen=True)
class RewardConfig:
    """Settings shared by all three rewards.

    ``bin_mode`` selects how recall is discretized in the accuracy weight:
    ``"unit"`` floors to hundredths in [0, 1], ``"percent"`` yields the integer
    bucket index 0..100.
    """

    look_iou_threshold: float = 0.5
    accuracy_iou_threshold: float = 0.5
    require_label_match: bool = True
    bin_mode: str = "unit"

    def __post_init__(self):
        if self.bin_mode not in ("unit", "percent"):
            raise ValueError(f"unknown bin_mode {self.bin_mode!r}")

    def look_config(self, group_size: int) -> LookRewardConfig:
        return LookRewardConfig(group_size=group_size, iou_threshold=self.look_iou_threshold)


@dataclass(frozen=True)
class RewardBreakdown:
    format: int
    look: float
    accuracy: float
    total: float
    advantage: float = 0.0

    def to_dict(self) -> dict:
        return {
            "format": self.format,
            "look": self.look,
            "accuracy": self.accuracy,
            "total": self.total,
            "advantage": self.advantage,
        }


def box_frequency(box: LabeledBox, answer_sets: Sequence[Sequence[LabeledBox]], iou_threshold: float = 0.5) -> float:
    """Fraction of answer sets holding at least one box with IoU >= threshold to ``box``."""
    hits = 0
    for boxes in answer_sets:
        if any(iou(box, other) >= iou_threshold for other in boxes):
            hits += 1
    return hits / len(answer_sets)


def box_variance(freq: float) -> float:
    if not 0.0 <= freq <= 1.0:
        raise ValueError(f"frequency must lie in [0, 1], got {freq}")
    return freq * (1.0 - freq)


def _canonical_key(b: LabeledBox):
    return (b.x1, b.y1, b.x2, b.y2, b.label)


def cluster_boxes(answer_sets: Sequence[Sequence[LabeledBox]], iou_threshold: float) -> list[LabeledBox]:
    """Greedy union of all answer boxes.

    Boxes are visited in canonical (x1, y1, x2, y2, label) order so the result
    does not depend on how the responses are ordered. A box joins the first
    representative it overlaps with IoU >= threshold, otherwise it becomes a
    new representative.
    """
    pooled = sorted((b for boxes in answer_sets for b in boxes), key=_canonical_key)
    reps: list[LabeledBox] = []
    for b in pooled:
        if not any(iou(b, r) >= iou_threshold for r in reps):
            reps.append(b)
    return reps


@dataclass
class LookTrace:
    """Intermediate quantities of one look-reward computation, for inspection."""

    representatives: list[LabeledBox] = field(default_factory=list)
    frequencies: list[float] = field(default_factory=list)
    box_rewards: list[float] = field(default_factory=list)


def _answer_sets(responses: Sequence[StructuredResponse]) -> list[list[LabeledBox]]:
    return [r.answer_list() if r.format_valid else [] for r in responses]


def look_reward(
    group: ResponseGroup,
    config: Optional[LookRewardConfig] = None,
    trace: Optional[LookTrace] = None,
) -> list[float]:
    if config is None:
        config = LookRewardConfig(group_size=group.size)
    if config.group_size != group.size:
        raise ValueError(f"config is for G={config.group_size}, group has {group.size} responses")
    tau = config.iou_threshold
    alpha = config.alpha
    penalty = config.penalty

    answer_sets = _answer_sets(group.responses)
    reps = cluster_boxes(answer_sets, tau)
    freqs = [box_frequency(b, answer_sets, tau) for b in reps]
    rep_rewards = []
    for f in freqs:
        var = box_variance(f)
        rep_rewards.append(alpha * var if var > 0 else penalty)
    if trace is not None:
        trace.representatives = reps
        trace.frequencies = freqs
        trace.box_rewards = rep_rewards

    out = []
    for resp in group.responses:
        looks = resp.look_list() if resp.format_valid else []
        if not looks:
            out.append(0.0)
            continue
        total = 0.0
        for b in looks:
            best_k, best_v = -1, -1.0
            for k, r in enumerate(reps):
                v = iou(b, r)
                if v >= tau and v > best_v:
                    best_k, best_v = k, v
            # a looked-at region no answer produced counts as certain
            total += rep_rewards[best_k] if best_k >= 0 else penalty
        # clamp away rounding in the mean; the exact value already lies in range
        out.append(min(1.0, max(penalty, total / len(looks))))
    return out


def recall_bin(num_matches: int, num_gt: int, bin_mode: str = "unit") -> float:
    """Discretize recall into 100 equal buckets using exact integer arithmetic."""
    if num_gt == 0:
        bucket = 100
    else:
        bucket = (100 * num_matches) // num_gt
    if bin_mode == "percent":
        return float(bucket)
    return bucket / 100


def accuracy_reward(
    answer_boxes: Sequence[LabeledBox],
    ground_truth: Sequence[LabeledBox],
    iou_threshold: float = 0.5,
    require_label_match: bool = True,
    bin_mode: str = "unit",
) -> float:
    """Precision weighted by ``1 + bin(recall)``."""
    m = match_boxes(answer_boxes, ground_truth, iou_threshold, require_label_match)
    n_pred, n_gt, tp = len(answer_boxes), len(ground_truth), m.num_matches
    precision, _ = precision_recall_from_counts(tp, n_pred, n_gt)
    weight = 1.0 + recall_bin(tp, n_gt, bin_mode)
    return weight * precision


def response_accuracy(response: StructuredResponse, ground_truth: Sequence[LabeledBox], config: RewardConfig) -> float:
    if not response.format_valid:
        return 0.0
    return accuracy_reward(
        response.answer_list(),
        ground_truth,
        config.accuracy_iou_threshold,
        config.require_label_match,
        config.bin_mode,
    )


def score_group(group: ResponseGroup, config: Optional[RewardConfig] = None) -> list[RewardBreakdown]:
    """All three rewards for every response, plus their unweighted sum."""
    if config is None:
        config = RewardConfig()
    looks = look_reward(group, config.look_config(group.size))
    out = []
    for resp, look in zip(group.responses, looks):
        fmt = format_reward(resp)
        acc = response_accuracy(resp, group.ground_truth, config)
        out.append(RewardBreakdown(format=fmt, look=look, accuracy=acc, total=fmt + look + acc))
    return out
