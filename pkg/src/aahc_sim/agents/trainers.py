"""On-policy trainers: AAHC (hybrid three-branch critic) and the iteRL / CTRL baselines.

All three share the rollout loop and the PPO actor updates; they differ only
in which value heads exist, which rewards those heads learn, and how head
advantages are combined for each actor.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..env import MetaverseEnv, ScenarioConfig
from ..harness.rng import derive_streams, stream
from ..nn import Adam, Mlp
from .buffer import StepRecord, TrajectoryBuffer
from .policies import DownlinkActor, GreedyPolicy, UplinkActor
from .ppo import Hyperparams, check_finite, clip_surrogate, compute_gae, normalize


@dataclass
class Head:
    """One value head: which inputs it reads, which reward it learns, its loss weight."""

    inputs: np.ndarray
    next_inputs: np.ndarray
    rewards: np.ndarray
    weight: float = 1.0
    advantages: np.ndarray | None = None
    targets: np.ndarray | None = None


@dataclass
class CycleStats:
    env_step: int
    episodes: int
    mean_ru: float
    mean_rd: float
    mean_rg: float
    kpis: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    wall_clock_ms: float = 0.0


class Trainer:
    algo = "base"

    def __init__(self, config: ScenarioConfig, hp: Hyperparams, seed: int):
        self.config, self.hp, self.seed = config, hp, seed
        self.streams = derive_streams(seed)
        init = stream(seed, "init_params")
        self.env = MetaverseEnv(config, self.streams)
        self.ul = UplinkActor(config, hp.hidden, init, hp.policy_out_scale)
        self.dl = DownlinkActor(config, hp.hidden, init, hp.policy_out_scale, hp.init_log_std)
        self.opt_ul = Adam(self.ul.params, hp.lr_ul)
        self.opt_dl = Adam(self.dl.params, hp.lr_dl)
        dims = {"u": config.ul_state_dim, "d": config.dl_state_dim,
                "g": config.ul_state_dim + config.dl_state_dim}
        self.critics = {name: Mlp([dims[name], *hp.hidden, 1], init) for name in self.head_names}
        self.targets = {name: net.copy() for name, net in self.critics.items()}
        self.critic_opts = [
            (group, Adam([p for name in group for p in self.critics[name].params], hp.lr_critic))
            for group in self.critic_groups
        ]
        self.buffer = TrajectoryBuffer(hp.trajectory_length, config.ul_state_dim,
                                       config.dl_state_dim, config.num_users)
        self.env_steps = 0
        self.episodes = 0
        self.updates = 0
        self._since_sync = 0
        self._s_u = None
        self._pending: StepRecord | None = None

    # ------------------------------------------------------------------ variant hooks
    head_names: tuple[str, ...] = ()
    critic_groups: tuple[tuple[str, ...], ...] = ()

    def heads(self, buf: TrajectoryBuffer) -> dict[str, Head]:
        raise NotImplementedError

    def actor_advantages(self, heads: dict[str, Head]) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    # ------------------------------------------------------------------ rollout
    def collect(self, n: int) -> list[dict]:
        """Run ``n`` environment iterations into the buffer; returns KPIs of finished episodes."""
        env, buf = self.env, self.buffer
        rng_ul, rng_dl = self.streams["policy_ul"], self.streams["policy_dl"]
        finished = []
        for _ in range(n):
            if env.done:
                self._s_u = env.reset()
            s_u = self._s_u
            a_u, logp_u, _ = self.ul.sample(s_u, rng_ul)
            up = env.uplink_step(self.ul.table[a_u])
            if self._pending is not None:
                # previous transition completes once its next DL state is observed
                self._pending.s_d_next = up.s_d
                buf.add(self._pending)
                self._pending = None
            power, raw, logp_d, _ = self.dl.sample(up.s_d, rng_dl)
            down = env.downlink_step(power)
            rec = StepRecord(s_u, a_u, logp_u, up.r_u, up.s_d, raw, logp_d,
                             down.r_d, down.r_g, down.s_u, None, down.done)
            self.env_steps += 1
            if down.done:
                buf.add(rec)
                finished.append(env.kpi_summary())
                self.episodes += 1
            else:
                self._pending = rec
            self._s_u = down.s_u
        if self._pending is not None:
            # cycle boundary: the next DL state does not exist yet
            self._pending.s_d_next = env.idle_downlink_state()
            buf.add(self._pending)
            self._pending = None
        return finished

    # ------------------------------------------------------------------ update
    def prepare(self) -> dict[str, Head]:
        """Advantages and frozen value targets from the target critic."""
        hp, buf = self.hp, self.buffer
        heads = self.heads(buf)
        done = buf.done[: buf.size]
        for name, head in heads.items():
            target_net = self.targets[name]
            v = target_net.predict(head.inputs)[:, 0]
            v_next = target_net.predict(head.next_inputs)[:, 0]
            head.advantages = compute_gae(head.rewards, v, v_next, done, hp.gamma, hp.gae_lambda)
            scale = hp.gamma if hp.critic_target == "paper" else 1.0
            head.targets = head.advantages + scale * v
            check_finite(f"{name} advantages", head.advantages, head.targets)
        return heads

    def critic_step(self, heads: dict[str, Head], idx: np.ndarray) -> dict[str, float]:
        losses = {}
        for group, opt in self.critic_opts:
            grads = []
            for name in group:
                head, net = heads[name], self.critics[name]
                v = net.forward(head.inputs[idx])[:, 0]
                err = v - head.targets[idx]
                loss = float(np.mean(err * err))
                check_finite(f"critic {name} loss", loss)
                losses[name] = loss
                g_out = (2.0 * head.weight / len(idx)) * err[:, None]
                grads += net.backward(g_out)[0]
            opt.step(grads)
        return losses

    def actor_step(self, idx, adv_ul, adv_dl) -> dict[str, float]:
        hp, buf = self.hp, self.buffer
        a_ul, a_dl = adv_ul[idx], adv_dl[idx]
        if hp.normalize_advantages:
            a_ul, a_dl = normalize(a_ul), normalize(a_dl)
        loss_u, g_u, info_u = self.ul.loss_and_grads(
            buf.s_u[idx], buf.a_u[idx], buf.logp_u[idx], a_ul,
            hp.clip_epsilon, hp.entropy_coef, clip_surrogate)
        check_finite("uplink actor loss", loss_u)
        self.opt_ul.step(g_u)
        loss_d, g_d, info_d = self.dl.loss_and_grads(
            buf.s_d[idx], buf.a_d[idx], buf.logp_d[idx], a_dl,
            hp.clip_epsilon, hp.entropy_coef, clip_surrogate)
        check_finite("downlink actor loss", loss_d)
        self.opt_dl.step(g_d)
        self.dl.clamp()
        return {"loss_ul": loss_u, "loss_dl": loss_d,
                "ratio_ul": info_u["ratio"], "ratio_dl": info_d["ratio"]}

    def update(self) -> dict:
        hp, buf = self.hp, self.buffer
        if not buf.full:
            raise RuntimeError("update requires a full trajectory buffer")
        heads = self.prepare()
        adv_ul, adv_dl = self.actor_advantages(heads)
        shuffle = self.streams["shuffle"]
        n_batches = buf.size // hp.batch_size
        sums: dict[str, float] = {}
        count = 0
        for _ in range(hp.epochs):
            order = shuffle.permutation(buf.size)
            for j in range(n_batches):
                idx = order[j * hp.batch_size:(j + 1) * hp.batch_size]
                info = self.actor_step(idx, adv_ul, adv_dl)
                closs = self.critic_step(heads, idx)
                sums["loss_ul"] = sums.get("loss_ul", 0.0) + info["loss_ul"]
                sums["loss_dl"] = sums.get("loss_dl", 0.0) + info["loss_dl"]
                for k, v in closs.items():
                    sums[f"critic_{k}"] = sums.get(f"critic_{k}", 0.0) + v
                count += 1
        self._since_sync += buf.size
        if self._since_sync >= hp.sync_steps:
            self.sync_targets()
        self.updates += 1
        buf.clear()
        return {k: v / max(count, 1) for k, v in sums.items()}

    def sync_targets(self) -> None:
        for name, net in self.critics.items():
            self.targets[name].load_from(net)
        self._since_sync = 0

    # ------------------------------------------------------------------ driver
    def train(self, total_steps: int | None = None, on_cycle=None) -> list[CycleStats]:
        hp = self.hp
        total = hp.total_steps if total_steps is None else total_steps
        log = []
        while self.env_steps < total:
            t0 = time.perf_counter()
            n = min(hp.trajectory_length - self.buffer.size, total - self.env_steps)
            finished = self.collect(n)
            buf = self.buffer
            stats = CycleStats(self.env_steps, self.episodes,
                               float(buf.r_u[: buf.size].mean()), float(buf.r_d[: buf.size].mean()),
                               float(buf.r_g[: buf.size].mean()), finished)
            if not finished:
                stats.kpis = [self.env.kpi_summary()]
            if buf.full:
                stats.diagnostics = self.update()
            else:
                buf.clear()
            stats.wall_clock_ms = (time.perf_counter() - t0) * 1e3
            log.append(stats)
            if on_cycle is not None:
                on_cycle(stats)
        return log

    def policy(self) -> GreedyPolicy:
        return GreedyPolicy(self.ul, self.dl)

    # ------------------------------------------------------------------ parameters
    def param_sets(self) -> dict[str, dict]:
        sets = {
            "actor_ul": {"sizes": self.ul.net.sizes, "arrays": self.ul.params},
            "actor_dl": {"sizes": self.dl.net.sizes, "arrays": self.dl.params},
        }
        for name, net in self.critics.items():
            sets[f"critic_{name}"] = {"sizes": net.sizes, "arrays": net.params}
            sets[f"target_{name}"] = {"sizes": net.sizes, "arrays": self.targets[name].params}
        return sets

    def load_param_sets(self, sets: dict[str, dict]) -> None:
        mine = self.param_sets()
        if set(mine) != set(sets):
            raise ValueError(f"parameter sets {sorted(sets)} do not match {sorted(mine)}")
        for name, entry in mine.items():
            if list(entry["sizes"]) != list(sets[name]["sizes"]):
                raise ValueError(f"layer sizes for {name} differ: {sets[name]['sizes']} vs {entry['sizes']}")
            for dst, src in zip(entry["arrays"], sets[name]["arrays"]):
                if dst.shape != np.shape(src):
                    raise ValueError(f"shape mismatch in {name}")
                dst[...] = src


class AahcTrainer(Trainer):
    """Two asynchronous actors guided by one three-branch hybrid critic."""

    algo = "aahc"
    head_names = ("u", "d", "g")
    critic_groups = (("u", "d", "g"),)   # one backward pass on the weighted sum

    def heads(self, buf):
        n = buf.size
        hp = self.hp
        return {
            "u": Head(buf.s_u[:n], buf.s_u_next[:n], buf.r_u[:n], hp.w_u),
            "d": Head(buf.s_d[:n], buf.s_d_next[:n], buf.r_d[:n], hp.w_d),
            "g": Head(buf.joint, buf.joint_next, buf.r_g[:n], hp.w_g),
        }

    def actor_advantages(self, heads):
        a_g = heads["g"].advantages
        return heads["u"].advantages + a_g, heads["d"].advantages + a_g


class IteRlTrainer(Trainer):
    """Two independent actor-critic agents tied only by the shared global reward."""

    algo = "iterl"
    head_names = ("u", "d")
    critic_groups = (("u",), ("d",))

    def heads(self, buf):
        n = buf.size
        r_g = buf.r_g[:n]
        return {
            "u": Head(buf.s_u[:n], buf.s_u_next[:n], buf.r_u[:n] + r_g),
            "d": Head(buf.s_d[:n], buf.s_d_next[:n], buf.r_d[:n] + r_g),
        }

    def actor_advantages(self, heads):
        return heads["u"].advantages, heads["d"].advantages


class CtrlTrainer(Trainer):
    """Centralised single-head critic on the joint state, trained on the summed reward."""

    algo = "ctrl"
    head_names = ("g",)
    critic_groups = (("g",),)

    def heads(self, buf):
        n = buf.size
        return {"g": Head(buf.joint, buf.joint_next, buf.r_u[:n] + buf.r_d[:n] + buf.r_g[:n])}

    def actor_advantages(self, heads):
        a = heads["g"].advantages
        return a, a


TRAINERS = {cls.algo: cls for cls in (AahcTrainer, IteRlTrainer, CtrlTrainer)}
