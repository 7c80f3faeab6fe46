"""PPO building blocks: truncated GAE, the clipped surrogate, hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels


class NonFiniteLossError(FloatingPointError):
    """A loss or gradient became NaN/Inf; training is aborted."""


@dataclass(frozen=True)
class Hyperparams:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_epsilon: float = 0.2
    epochs: int = 10
    batch_size: int = 64
    entropy_coef: float = 1e-3
    lr_ul: float = 1e-4
    lr_dl: float = 1e-4
    lr_critic: float = 5e-5
    w_u: float = 1.0
    w_d: float = 1.0
    w_g: float = 1.0
    trajectory_length: int = 2048
    target_sync_steps: int = 0          # 0: sync once per update phase
    total_steps: int = 200_000
    hidden: tuple[int, ...] = (64, 64)
    policy_out_scale: float = 0.01
    init_log_std: float = 0.0
    normalize_advantages: bool = True
    critic_target: str = "paper"        # "paper": A + gamma*V'(s); "conventional": A + V'(s)

    def __post_init__(self):
        if not (0 < self.gamma <= 1 and 0 < self.gae_lambda <= 1):
            raise ValueError("gamma and gae_lambda must lie in (0, 1]")
        if not 0 < self.clip_epsilon < 1:
            raise ValueError("clip_epsilon must lie in (0, 1)")
        if not 1 <= self.batch_size <= self.trajectory_length:
            raise ValueError("batch_size must be in [1, trajectory_length]")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.critic_target not in ("paper", "conventional"):
            raise ValueError("critic_target must be 'paper' or 'conventional'")

    @property
    def sync_steps(self) -> int:
        return self.target_sync_steps or self.trajectory_length


def compute_gae(rewards, values, next_values, dones, gamma: float, lam: float) -> np.ndarray:
    """Truncated GAE: ``A_t = delta_t + gamma*lam*(1-done_t)*A_{t+1}``.

    ``next_values[t]`` is the bootstrap value of the state after step ``t``;
    it is ignored where ``dones[t]`` is set.
    """
    r = np.asarray(rewards, dtype=np.float64)
    if not (len(r) == len(values) == len(next_values) == len(dones)):
        raise ValueError("GAE inputs must have equal length")
    return kernels.gae(r, np.asarray(values, dtype=np.float64),
                       np.asarray(next_values, dtype=np.float64),
                       np.asarray(dones, dtype=np.uint8), float(gamma), float(lam))


def clip_surrogate(logp_new, logp_old, advantage, eps: float):
    """Per-sample ``min(r*A, clip(r, 1-eps, 1+eps)*A)`` and its derivative w.r.t. ``logp_new``."""
    ratio = np.exp(np.asarray(logp_new) - np.asarray(logp_old))
    adv = np.asarray(advantage, dtype=np.float64)
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps) * adv
    f = np.minimum(unclipped, clipped)
    # the clipped arm is flat wherever it is the active (smaller) one and differs
    active = unclipped <= clipped
    d_logp = np.where(active, unclipped, 0.0)
    return f, d_logp, ratio


def normalize(adv: np.ndarray) -> np.ndarray:
    if len(adv) < 2:
        return adv - adv.mean()
    return (adv - adv.mean()) / (adv.std() + 1e-8)


def check_finite(name: str, *values) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise NonFiniteLossError(f"non-finite value in {name}: {np.asarray(v).ravel()[:8]}")
