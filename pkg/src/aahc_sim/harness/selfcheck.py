"""Fast built-in oracle checks, runnable without the test suite."""

from __future__ import annotations

import math

import numpy as np

from .. import _purepy, kernels
from ..agents.policies import RandomPolicy
from ..env import MetaverseEnv, ScenarioConfig, action_table, decode_uplink_action, encode_uplink_action
from ..nn import Mlp
from .rng import derive_streams, stream


def direct_ul(gamma, p, g2, w, noise):
    """Uplink rates by pairwise comparison, no sorting."""
    n_users = len(gamma)
    out = np.zeros(n_users)
    for n in range(n_users):
        m = gamma[n]
        if m == 0:
            continue
        mine = p[n] * g2[n, m - 1]
        interf = 0.0
        for k in range(n_users):
            if k == n or gamma[k] != m:
                continue
            other = p[k] * g2[k, m - 1]
            if other < mine or (other == mine and k > n):
                interf += other
        out[n] = w[m - 1] * math.log2(1.0 + mine / (interf + w[m - 1] * noise))
    return out


def direct_dl(gamma, p, g2, w, noise_xu):
    n_users = len(gamma)
    out = np.zeros(n_users)
    for n in range(n_users):
        m = gamma[n]
        if m == 0:
            continue
        key = g2[n, m - 1] / noise_xu[n, m - 1]
        stronger = 0.0
        for k in range(n_users):
            if k == n or gamma[k] != m:
                continue
            other = g2[k, m - 1] / noise_xu[k, m - 1]
            if other > key or (other == key and k < n):
                stronger += p[k]
        sinr = p[n] * g2[n, m - 1] / (stronger * g2[n, m - 1] + w[m - 1] * noise_xu[n, m - 1])
        out[n] = w[m - 1] * math.log2(1.0 + sinr)
    return out


def direct_gae(r, v, v_next, done, gamma, lam):
    """Explicit double sum over TD residuals, truncated at episode ends."""
    t_len = len(r)
    delta = [r[t] + gamma * v_next[t] * (1 - done[t]) - v[t] for t in range(t_len)]
    out = np.zeros(t_len)
    for t in range(t_len):
        acc, coef = 0.0, 1.0
        for l in range(t, t_len):
            acc += coef * delta[l]
            if done[l]:
                break
            coef *= gamma * lam
        out[t] = acc
    return out


def _backends():
    out = [("python", _purepy)]
    if kernels.BACKEND == "compiled":
        out.append(("compiled", kernels._impl))
    return out


def check_rates(rng, instances=200) -> float:
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(1, 9))
        gamma = rng.integers(0, 4, size=n)
        p = rng.uniform(0.1, 20, size=n)
        g2 = 10 ** rng.uniform(-10, -3, size=(n, 3))
        w = np.full(3, 10e9)
        nz = np.full((n, 3), 3.98e-21)
        ul_ref, dl_ref = direct_ul(gamma, p, g2, w, 3.98e-21), direct_dl(gamma, p, g2, w, nz)
        for _, mod in _backends():
            for got, ref in ((mod.ul_rates(gamma, p, g2, w, 3.98e-21), ul_ref),
                             (mod.dl_rates(gamma, p, g2, w, nz), dl_ref)):
                rel = np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300)
                worst = max(worst, float(np.max(np.where(ref == 0, np.abs(got), rel))))
    return worst


def check_gae(rng, instances=200) -> float:
    worst = 0.0
    for _ in range(instances):
        t = int(rng.integers(1, 65))
        r, v, vn = rng.normal(size=t), rng.normal(size=t), rng.normal(size=t)
        done = (rng.random(t) < 0.1).astype(np.uint8)
        ref = direct_gae(r, v, vn, done, 0.99, 0.95)
        for _, mod in _backends():
            worst = max(worst, float(np.max(np.abs(mod.gae(r, v, vn, done, 0.99, 0.95) - ref))))
    return worst


def check_encoding() -> int:
    mismatches = 0
    for n in (4, 5):
        table = action_table(n, 3)
        for idx in range(len(table)):
            g = decode_uplink_action(idx, n, 3)
            mismatches += int(encode_uplink_action(g, 3) != idx or not np.array_equal(g, table[idx]))
    return mismatches


def check_gradients(rng) -> float:
    net = Mlp([5, 7, 3], rng)
    x = rng.normal(size=(4, 5))
    c = rng.normal(size=(4, 3))
    net.forward(x)
    grads, _ = net.backward(c)
    worst, h = 0.0, 1e-6
    for p, g in zip(net.params, grads):
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            up = float(np.sum(net.predict(x) * c))
            flat[i] = old - h
            down = float(np.sum(net.predict(x) * c))
            flat[i] = old
            num = (up - down) / (2 * h)
            worst = max(worst, abs(num - gflat[i]) / max(abs(num), abs(gflat[i]), 1e-8))
    return worst


def check_rewards(steps=2000) -> int:
    cfg = ScenarioConfig()
    env = MetaverseEnv(cfg, derive_streams(7))
    pol = RandomPolicy(cfg, stream(7, "selfcheck"))
    bad = 0
    for _ in range(steps):
        if env.done:
            env.reset()
        up = env.uplink_step(pol.uplink())
        down = env.downlink_step(pol.downlink())
        bad += int(not -1 <= up.r_u <= 0) + int(not -1 <= down.r_dr <= 0) + int(not -0.5 <= down.r_ene <= 0)
        bad += int(down.r_g != -1.0 - 0.5 * down.failures.sum())
    return bad


def run(verbose: bool = True) -> int:
    rng = np.random.default_rng(12345)
    s1, s2 = stream(3, "x"), stream(3, "x")
    results = [
        ("rate kernels vs direct summation", check_rates(rng), 1e-10),
        ("GAE recursion vs double sum", check_gae(rng), 1e-10),
        ("action encoding round trip", check_encoding(), 0),
        ("MLP gradient vs central difference", check_gradients(rng), 1e-5),
        ("reward ranges and global reward", check_rewards(), 0),
        ("named stream replay", float(np.any(s1.random(8) != s2.random(8))), 0),
    ]
    failed = 0
    for name, value, tol in results:
        ok = value <= tol
        failed += not ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {value:.3g} (tolerance {tol:g})")
    if verbose:
        print(f"kernel backend: {kernels.BACKEND}")
    return 1 if failed else 0
