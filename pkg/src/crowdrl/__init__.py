"""Reward shaping and GRPO for box-emitting policies on crowded scenes."""

from .geometry import LabeledBox, MatchResult, iou, match_boxes, precision_recall
from .response import NONE_ANSWER, StructuredResponse, format_reward, parse_response, serialize_boxes
from .rewards import (
    LookRewardConfig,
    RewardBreakdown,
    RewardConfig,
    ResponseGroup,
    accuracy_reward,
    box_frequency,
    box_variance,
    look_reward,
    score_group,
)
from .grpo import GrpoConfig, TokenTrajectory, group_advantages, grpo_loss, train_step

__all__ = [
    "LabeledBox",
    "MatchResult",
    "iou",
    "match_boxes",
    "precision_recall",
    "NONE_ANSWER",
    "StructuredResponse",
    "format_reward",
    "parse_response",
    "serialize_boxes",
    "LookRewardConfig",
    "RewardBreakdown",
    "RewardConfig",
    "ResponseGroup",
    "accuracy_reward",
    "box_frequency",
    "box_variance",
    "look_reward",
    "score_group",
    "GrpoConfig",
    "TokenTrajectory",
    "group_advantages",
    "grpo_loss",
    "train_step",
]
