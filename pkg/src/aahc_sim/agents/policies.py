"""Uplink (categorical) and downlink (Gaussian) actors, and the random baseline."""

from __future__ import annotations

import numpy as np

from ..env import ScenarioConfig, action_table
from ..nn import (LOG_STD_MAX, LOG_STD_MIN, Mlp, categorical_grads, categorical_logprob_entropy,
                  categorical_sample, gaussian_entropy, gaussian_logprob, gaussian_sample,
                  squash_mean)


class UplinkActor:
    """Categorical policy over the ``(M+1)^N`` joint channel assignments."""

    def __init__(self, config: ScenarioConfig, hidden, rng, out_scale=0.01):
        self.config = config
        self.net = Mlp([config.ul_state_dim, *hidden, config.num_actions], rng, out_scale)
        self.table = action_table(config.num_users, config.num_channels)

    @property
    def params(self):
        return self.net.params

    def sample(self, s_u, rng):
        return categorical_sample(self.net.predict(s_u), rng)

    def greedy(self, s_u) -> int:
        return int(np.argmax(self.net.predict(s_u)))

    def gamma_of(self, action: int) -> np.ndarray:
        return self.table[action]

    def loss_and_grads(self, states, actions, logp_old, adv, eps, entropy_coef, surrogate):
        """Negated clipped objective (minus entropy bonus) and its parameter gradients."""
        logits = self.net.forward(states)
        logp, ent, p, logp_all = categorical_logprob_entropy(logits, actions)
        f, d_f, ratio = surrogate(logp, logp_old, adv, eps)
        b = len(actions)
        loss = -f.mean() - entropy_coef * ent.mean()
        g_logits = categorical_grads(p, logp_all, actions, -d_f / b, np.full(b, -entropy_coef / b))
        grads, _ = self.net.backward(g_logits)
        return loss, grads, {"ratio": ratio, "entropy": float(ent.mean())}


class DownlinkActor:
    """Diagonal Gaussian over per-user downlink powers with a learnable log-std."""

    def __init__(self, config: ScenarioConfig, hidden, rng, out_scale=0.01, init_log_std=0.0):
        self.config = config
        self.low, self.high = config.dl_power_min, config.dl_power_max
        self.net = Mlp([config.dl_state_dim, *hidden, config.num_users], rng, out_scale)
        self.log_std = np.full(config.num_users, float(init_log_std))

    @property
    def params(self):
        return self.net.params + [self.log_std]

    def clamp(self) -> None:
        np.clip(self.log_std, LOG_STD_MIN, LOG_STD_MAX, out=self.log_std)

    def mean(self, s_d):
        return squash_mean(self.net.predict(s_d), self.low, self.high)

    def sample(self, s_d, rng):
        """Returns (clipped power, raw draw, log-prob of raw draw, entropy)."""
        return gaussian_sample(self.mean(s_d), self.log_std, rng, self.low, self.high)

    def greedy(self, s_d) -> np.ndarray:
        return np.clip(self.mean(s_d), self.low, self.high)

    def loss_and_grads(self, states, raw_actions, logp_old, adv, eps, entropy_coef, surrogate):
        raw_mean = self.net.forward(states)
        t = np.tanh(raw_mean)
        half_span = 0.5 * (self.high - self.low)
        mean = self.low + (t + 1.0) * half_span
        log_std = self.log_std
        logp = gaussian_logprob(raw_actions, mean, log_std)
        f, d_f, ratio = surrogate(logp, logp_old, adv, eps)
        b = len(logp)
        ent = gaussian_entropy(log_std)
        loss = -f.mean() - entropy_coef * ent

        d_logp = -d_f / b                              # dloss/dlogp per sample
        inv_var = np.exp(-2.0 * log_std)
        diff = raw_actions - mean
        g_mean = d_logp[:, None] * diff * inv_var
        g_raw = g_mean * half_span * (1.0 - t * t)
        g_log_std = (d_logp[:, None] * (diff * diff * inv_var - 1.0)).sum(axis=0) - entropy_coef
        grads, _ = self.net.backward(g_raw)
        return loss, grads + [g_log_std], {"ratio": ratio, "entropy": ent}


class RandomPolicy:
    """Uniform channel choice per user and uniform downlink power."""

    def __init__(self, config: ScenarioConfig, rng: np.random.Generator):
        self.config = config
        self.rng = rng

    def uplink(self, s_u=None) -> np.ndarray:
        cfg = self.config
        return self.rng.integers(0, cfg.num_channels + 1, size=cfg.num_users)

    def downlink(self, s_d=None) -> np.ndarray:
        cfg = self.config
        return self.rng.uniform(cfg.dl_power_min, cfg.dl_power_max, size=cfg.num_users)

    def __call__(self):
        return self.uplink(), self.downlink()


class GreedyPolicy:
    """Deterministic evaluation wrapper: argmax assignment, mean power."""

    def __init__(self, ul: UplinkActor, dl: DownlinkActor):
        self.ul, self.dl = ul, dl

    def uplink(self, s_u) -> np.ndarray:
        return self.ul.gamma_of(self.ul.greedy(s_u))

    def downlink(self, s_d) -> np.ndarray:
        return self.dl.greedy(s_d)
