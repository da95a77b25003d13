"""Finite-difference check of the GRPO loss gradient on the toy policy."""

import numpy as np

from crowdrl.env import ToyPolicy
from crowdrl.grpo import GrpoConfig, TokenTrajectory, grpo_loss, grpo_loss_grad


def make_problem(scene, config, rng, group_size=4, drift=0.15):
    """Rollouts from a random old policy, scored at a nearby current point.

    Returns (policy at the current point, tokens, logp_old, logp_ref, advantages).
    """
    base = ToyPolicy(config)
    old = ToyPolicy(config, base.params + rng.normal(0.0, 0.5, base.params.shape))
    tokens, logp_old = [], []
    for _ in range(group_size):
        _, traj = old.rollout(scene, rng)
        tokens.append(traj.tokens)
        logp_old.append(traj.logp_old)
    logp_ref = [base.log_probs(scene, t) for t in tokens]
    current = ToyPolicy(config, old.params + rng.normal(0.0, drift, base.params.shape))
    advantages = rng.normal(size=group_size).tolist()
    return current, tokens, logp_old, logp_ref, advantages


def _trajectories(policy, scene, tokens, logp_old, logp_ref):
    return [
        TokenTrajectory(t, policy.log_probs(scene, t), o, r) for t, o, r in zip(tokens, logp_old, logp_ref)
    ]


def loss_at(params, config, scene, tokens, logp_old, logp_ref, advantages, grpo):
    policy = ToyPolicy(config, params)
    return grpo_loss(_trajectories(policy, scene, tokens, logp_old, logp_ref), advantages, grpo)[0]


def analytic_grad(policy, scene, tokens, logp_old, logp_ref, advantages, grpo):
    trajs, jacs = [], []
    for t, o, r in zip(tokens, logp_old, logp_ref):
        logp, jac = policy.log_prob_jacobian(scene, t)
        trajs.append(TokenTrajectory(t, logp, o, r))
        jacs.append(jac)
    _, _, dlogp = grpo_loss_grad(trajs, advantages, grpo)
    return sum(d @ j for d, j in zip(dlogp, jacs))


def min_clip_distance(policy, scene, tokens, logp_old, grpo):
    eps = grpo.clip_epsilon
    dist = np.inf
    for t, o in zip(tokens, logp_old):
        ratio = np.exp(policy.log_probs(scene, t) - o)
        dist = min(dist, float(np.min(np.abs(ratio - (1 - eps)))), float(np.min(np.abs(ratio - (1 + eps)))))
    return dist


def relative_error(scene, config, rng, grpo=GrpoConfig(), h=1e-5, margin=1e-6):
    """Relative error of one random point, or None if it sits too close to a clip boundary."""
    policy, tokens, logp_old, logp_ref, adv = make_problem(scene, config, rng, grpo.group_size)
    if min_clip_distance(policy, scene, tokens, logp_old, grpo) < margin:
        return None
    g = analytic_grad(policy, scene, tokens, logp_old, logp_ref, adv, grpo)
    fd = np.zeros_like(g)
    for i in range(len(g)):
        p = policy.params.copy()
        p[i] += h
        up = loss_at(p, config, scene, tokens, logp_old, logp_ref, adv, grpo)
        p[i] -= 2 * h
        down = loss_at(p, config, scene, tokens, logp_old, logp_ref, adv, grpo)
        fd[i] = (up - down) / (2 * h)
    scale = max(np.linalg.norm(g), np.linalg.norm(fd), 1e-12)
    return float(np.linalg.norm(g - fd) / scale)
