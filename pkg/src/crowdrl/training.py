"""Training loop around :func:`crowdrl.grpo.train_step` on synthetic scenes."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from .env import EnvConfig, Scene, ToyPolicy, generate_scenes, substream
from .eval import MetricsReport, evaluate
from .grpo import Adam, GrpoConfig, train_step
from .rewards import RewardConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    steps: int = 200
    scenes_per_step: int = 8
    num_train_scenes: int = 64
    num_eval_scenes: int = 32
    learning_rate: float = 0.05
    grpo: GrpoConfig = field(default_factory=GrpoConfig)
    env: EnvConfig = field(default_factory=EnvConfig)
    rewards: RewardConfig = field(default_factory=RewardConfig)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["env"] = self.env.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        grpo = GrpoConfig(**d.pop("grpo", {}))
        env = EnvConfig.from_dict(d.pop("env", {}))
        rewards = RewardConfig(**d.pop("rewards", {}))
        return cls(grpo=grpo, env=env, rewards=rewards, **d)


def make_datasets(config: TrainConfig) -> tuple[list[Scene], list[Scene]]:
    train = generate_scenes(config.seed, config.num_train_scenes, config.env, prefix="train")
    held_out = generate_scenes(config.seed + 1_000_003, config.num_eval_scenes, config.env, prefix="eval")
    return train, held_out


def greedy_predictions(policy: ToyPolicy, scenes: list[Scene]) -> dict:
    return {s.scene_id: policy.predict(s) for s in scenes}


def evaluate_policy(policy: ToyPolicy, scenes: list[Scene]) -> MetricsReport:
    return evaluate(greedy_predictions(policy, scenes), {s.scene_id: s.ground_truth for s in scenes})


def train(
    config: TrainConfig,
    scenes: Optional[list[Scene]] = None,
    policy: Optional[ToyPolicy] = None,
    on_step: Optional[Callable[[int, dict, ToyPolicy], None]] = None,
) -> tuple[ToyPolicy, list[dict]]:
    """Run ``config.steps`` GRPO steps; returns the trained policy and the per-step log."""
    if scenes is None:
        scenes, _ = make_datasets(config)
    if not scenes:
        raise ValueError("no training scenes")
    policy = policy.copy() if policy is not None else ToyPolicy(config.env)
    reference = policy.copy()
    optimizer = Adam(lr=config.learning_rate)
    order_rng = substream(config.seed, "batch-order")
    rollout_rng = substream(config.seed, "rollouts")

    log = []
    order: list[int] = []
    for step in range(config.steps):
        batch = []
        while len(batch) < config.scenes_per_step:
            if not order:
                order = order_rng.permutation(len(scenes)).tolist()
            batch.append(scenes[order.pop()])
        result = train_step(policy, reference, batch, config.grpo, optimizer, rollout_rng, config.rewards)
        row = {"step": step, **result.to_dict()}
        log.append(row)
        if on_step is not None:
            on_step(step, row, policy)
        logger.debug("step %d reward %.4f kl %.5f", step, result.mean_reward, result.mean_kl)
    return policy, log
