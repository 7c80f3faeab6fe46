"""Deterministic policy evaluation over fresh episodes."""

from __future__ import annotations

import numpy as np

from ..env import MetaverseEnv, ScenarioConfig
from ..harness.rng import derive_streams, stream
from .policies import RandomPolicy

KPI_KEYS = ("iterations", "total_delay_ms", "retrans_pct", "max_ul_rate_gbps", "energy_j")


def eval_streams(seed: int) -> dict:
    """Environment streams disjoint from the training ones for the same seed."""
    s = derive_streams(seed, ("eval_env_init", "eval_fading", "eval_augment"))
    return {"env_init": s["eval_env_init"], "fading": s["eval_fading"], "augment": s["eval_augment"]}


def run_episode(env: MetaverseEnv, policy) -> dict:
    """One episode with ``policy.uplink(s_u)`` / ``policy.downlink(s_d)``; returns KPIs and rewards."""
    s_u = env.reset()
    r_u = r_d = r_g = 0.0
    steps = 0
    while not env.done:
        up = env.uplink_step(policy.uplink(s_u))
        down = env.downlink_step(policy.downlink(up.s_d))
        r_u += up.r_u
        r_d += down.r_d
        r_g += down.r_g
        steps += 1
        s_u = down.s_u
    out = env.kpi_summary()
    out.update(mean_ru=r_u / steps, mean_rd=r_d / steps, mean_rg=r_g / steps)
    return out


def evaluate(policy, config: ScenarioConfig, episodes: int, seed: int) -> dict:
    """Mean KPIs of ``policy`` over ``episodes`` episodes drawn from the evaluation streams."""
    if episodes < 1:
        raise ValueError("evaluation needs at least one episode")
    env = MetaverseEnv(config, eval_streams(seed))
    rows = [run_episode(env, policy) for _ in range(episodes)]
    return {k: float(np.mean([r[k] for r in rows])) for k in rows[0]} | {"episodes": episodes}


def random_policy(config: ScenarioConfig, seed: int) -> RandomPolicy:
    rng = stream(seed, "policy_random")
    pol = RandomPolicy(config, rng)
    return pol
