"""Group-relative advantages and the clipped, KL-regularized policy objective.

The loss is written in terms of per-token log-probabilities so it works for
any policy that can score its own samples. :func:`train_step` drives one
sample-score-update cycle for a policy object exposing ``params``,
``rollout(scene, rng)`` and ``log_prob_jacobian(scene, tokens)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Protocol, Sequence

import numpy as np

from .rewards import RewardBreakdown, RewardConfig, ResponseGroup, score_group

logger = logging.getLogger(__name__)


class TrajectoryError(ValueError):
    pass


@dataclass
class TokenTrajectory:
    tokens: list[int]
    logp_current: np.ndarray
    logp_old: np.ndarray
    logp_reference: np.ndarray
    reward: float = 0.0

    def __post_init__(self):
        self.logp_current = np.asarray(self.logp_current, dtype=np.float64)
        self.logp_old = np.asarray(self.logp_old, dtype=np.float64)
        self.logp_reference = np.asarray(self.logp_reference, dtype=np.float64)

    def __len__(self):
        return len(self.tokens)

    def validate(self) -> None:
        n = len(self.tokens)
        for name in ("logp_current", "logp_old", "logp_reference"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise TrajectoryError(f"{name} has shape {arr.shape}, expected ({n},)")
            if not np.all(np.isfinite(arr)):
                raise TrajectoryError(f"{name} contains non-finite values")
            if np.any(arr > 0):
                raise TrajectoryError(f"{name} contains positive log-probabilities")


@dataclass(frozen=True)
class GrpoConfig:
    group_size: int = 8
    clip_epsilon: float = 0.2
    kl_coefficient: float = 0.04
    advantage_std_floor: float = 1e-8

    def __post_init__(self):
        if self.group_size < 2:
            raise ValueError("group_size must be >= 2")
        if not 0 < self.clip_epsilon < 1:
            raise ValueError("clip_epsilon must be in (0, 1)")
        if self.kl_coefficient < 0:
            raise ValueError("kl_coefficient must be >= 0")
        if self.advantage_std_floor <= 0:
            raise ValueError("advantage_std_floor must be positive")


def group_advantages(rewards: Sequence[float], std_floor: float = 1e-8) -> list[float]:
    """(r - mean) / std with the population std; all zeros when std < floor."""
    r = np.asarray(rewards, dtype=np.float64)
    if r.size < 2:
        raise ValueError("need at least two rewards per group")
    mean = r.mean()
    std = r.std()
    if std < std_floor:
        return [0.0] * r.size
    return ((r - mean) / std).tolist()


def with_advantages(breakdowns: Sequence[RewardBreakdown], std_floor: float = 1e-8) -> list[RewardBreakdown]:
    adv = group_advantages([b.total for b in breakdowns], std_floor)
    return [replace(b, advantage=a) for b, a in zip(breakdowns, adv)]


def kl_estimate(logp_reference: np.ndarray, logp_current: np.ndarray) -> np.ndarray:
    """Per-token estimator exp(d) - d - 1 with d = logp_ref - logp_cur; never negative."""
    d = np.asarray(logp_reference) - np.asarray(logp_current)
    return np.expm1(d) - d


def _loss_and_grad(trajectories, advantages, config):
    if len(trajectories) != len(advantages):
        raise TrajectoryError(f"{len(trajectories)} trajectories but {len(advantages)} advantages")
    for t in trajectories:
        t.validate()
    n_tokens = sum(len(t) for t in trajectories)
    if n_tokens == 0:
        raise TrajectoryError("all trajectories are empty")
    eps = config.clip_epsilon
    beta = config.kl_coefficient

    total = 0.0
    grads = []
    ratio_sum = 0.0
    clipped = 0
    kl_sum = 0.0
    for traj, adv in zip(trajectories, advantages):
        ratio = np.exp(traj.logp_current - traj.logp_old)
        clipped_ratio = np.clip(ratio, 1 - eps, 1 + eps)
        unclipped_term = ratio * adv
        clipped_term = clipped_ratio * adv
        surrogate = np.minimum(unclipped_term, clipped_term)
        kl = kl_estimate(traj.logp_reference, traj.logp_current)
        total += float(np.sum(surrogate - beta * kl))

        # gradient of the surrogate flows only through the unclipped branch
        active = unclipped_term <= clipped_term
        d_surrogate = np.where(active, unclipped_term, 0.0)
        d_kl = 1.0 - np.exp(traj.logp_reference - traj.logp_current)
        grads.append(-(d_surrogate - beta * d_kl) / n_tokens)

        ratio_sum += float(ratio.sum())
        clipped += int(np.count_nonzero((ratio < 1 - eps) | (ratio > 1 + eps)))
        kl_sum += float(kl.sum())

    loss = -total / n_tokens
    diagnostics = {
        "mean_ratio": ratio_sum / n_tokens,
        "clip_fraction": clipped / n_tokens,
        "mean_kl": kl_sum / n_tokens,
    }
    return loss, diagnostics, grads


def grpo_loss(
    trajectories: Sequence[TokenTrajectory],
    advantages: Sequence[float],
    config: GrpoConfig,
) -> tuple[float, dict]:
    loss, diagnostics, _ = _loss_and_grad(trajectories, advantages, config)
    return loss, diagnostics


def grpo_loss_grad(
    trajectories: Sequence[TokenTrajectory],
    advantages: Sequence[float],
    config: GrpoConfig,
) -> tuple[float, dict, list[np.ndarray]]:
    """Loss, diagnostics and d loss / d logp_current for every trajectory."""
    return _loss_and_grad(trajectories, advantages, config)


class Adam:
    def __init__(self, lr: float = 0.05, betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8):
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.m: Optional[np.ndarray] = None
        self.v: Optional[np.ndarray] = None
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class Policy(Protocol):
    params: np.ndarray

    def rollout(self, scene, rng: np.random.Generator): ...

    def log_prob_jacobian(self, scene, tokens: Sequence[int]) -> tuple[np.ndarray, np.ndarray]: ...

    def log_probs(self, scene, tokens: Sequence[int]) -> np.ndarray: ...


@dataclass
class StepResult:
    loss: float
    mean_reward: float
    mean_format: float
    mean_look: float
    mean_accuracy: float
    mean_advantage: float
    mean_kl: float
    clip_fraction: float
    mean_ratio: float
    mean_length: float
    grad_norm: float
    errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def train_step(
    policy: Policy,
    reference_policy: Policy,
    scenes: Sequence,
    config: GrpoConfig,
    optimizer: Adam,
    rng: np.random.Generator,
    reward_config: Optional[RewardConfig] = None,
) -> StepResult:
    """Sample G rollouts per scene, score them, and apply one gradient step in place.

    The sampling policy doubles as the old policy, so ratios start at 1. A scene
    whose scoring fails is skipped and reported in ``errors``.
    """
    reward_config = reward_config or RewardConfig()
    grad = np.zeros_like(policy.params)
    errors = []
    rewards, fmts, looks, accs, advs = [], [], [], [], []
    losses, kls, clips, ratios, lengths = [], [], [], [], []
    groups_used = 0

    for scene in scenes:
        try:
            samples = [policy.rollout(scene, rng) for _ in range(config.group_size)]
            group = ResponseGroup(scene.scene_id, scene.ground_truth, [s[0] for s in samples])
            breakdowns = with_advantages(score_group(group, reward_config), config.advantage_std_floor)
        except Exception as exc:
            logger.warning("scene %s failed: %s", getattr(scene, "scene_id", "?"), exc)
            errors.append(f"{getattr(scene, 'scene_id', '?')}: {exc}")
            continue

        trajs, jacobians = [], []
        for (_, traj), b in zip(samples, breakdowns):
            logp, jac = policy.log_prob_jacobian(scene, traj.tokens)
            traj.logp_current = logp
            traj.logp_reference = reference_policy.log_probs(scene, traj.tokens)
            traj.reward = b.total
            trajs.append(traj)
            jacobians.append(jac)
        adv = [b.advantage for b in breakdowns]
        loss, diag, dlogp = grpo_loss_grad(trajs, adv, config)
        for d, jac in zip(dlogp, jacobians):
            grad += d @ jac
        groups_used += 1

        losses.append(loss)
        kls.append(diag["mean_kl"])
        clips.append(diag["clip_fraction"])
        ratios.append(diag["mean_ratio"])
        lengths.extend(len(t) for t in trajs)
        for b in breakdowns:
            rewards.append(b.total)
            fmts.append(b.format)
            looks.append(b.look)
            accs.append(b.accuracy)
            advs.append(b.advantage)

    if groups_used:
        grad /= groups_used
        optimizer.step(policy.params, grad)

    def mean(xs):
        return float(np.mean(xs)) if xs else math.nan

    return StepResult(
        loss=mean(losses),
        mean_reward=mean(rewards),
        mean_format=mean(fmts),
        mean_look=mean(looks),
        mean_accuracy=mean(accs),
        mean_advantage=mean(advs),
        mean_kl=mean(kls),
        clip_fraction=mean(clips),
        mean_ratio=mean(ratios),
        mean_length=mean(lengths),
        grad_norm=float(np.linalg.norm(grad)),
        errors=errors,
    )
