"""Independent reference implementations used only by the tests.

Written from the formulas directly, without sharing code with the package:
rates by pairwise comparison (no sort), GAE by explicit double sum, rewards
by scalar re-evaluation, gradients by central differences.
"""

import math

import numpy as np


def ul_rate_oracle(gamma, p, g2, w, noise):
    n_users = len(gamma)
    out = [0.0] * n_users
    for n in range(n_users):
        m = int(gamma[n])
        if m == 0:
            continue
        own = p[n] * g2[n][m - 1]
        tail = 0.0
        for k in range(n_users):
            if k != n and int(gamma[k]) == m:
                rx = p[k] * g2[k][m - 1]
                # k is decoded after n when its received power is lower (ties: higher index later)
                if rx < own or (rx == own and k > n):
                    tail += rx
        out[n] = w[m - 1] * math.log(1.0 + own / (tail + w[m - 1] * noise)) / math.log(2.0)
    return np.array(out)


def dl_rate_oracle(gamma, p, g2, w, noise_xu):
    n_users = len(gamma)
    out = [0.0] * n_users
    for n in range(n_users):
        m = int(gamma[n])
        if m == 0:
            continue
        mine = g2[n][m - 1] / noise_xu[n][m - 1]
        head = 0.0
        for k in range(n_users):
            if k != n and int(gamma[k]) == m:
                theirs = g2[k][m - 1] / noise_xu[k][m - 1]
                if theirs > mine or (theirs == mine and k < n):
                    head += p[k]
        sinr = p[n] * g2[n][m - 1] / (head * g2[n][m - 1] + w[m - 1] * noise_xu[n][m - 1])
        out[n] = w[m - 1] * math.log(1.0 + sinr) / math.log(2.0)
    return np.array(out)


def gae_oracle(r, v, v_next, done, gamma, lam):
    """A_t = sum_l (gamma*lam)^l delta_{t+l}, stopping after the first terminal step."""
    t_len = len(r)
    out = []
    for t in range(t_len):
        total = 0.0
        for l in range(t, t_len):
            boot = 0.0 if done[l] else gamma * v_next[l]
            delta = r[l] + boot - v[l]
            total += (gamma * lam) ** (l - t) * delta
            if done[l]:
                break
        out.append(total)
    return np.array(out)


def reward_oracle(cfg, gamma, data, b0, delays, dl_power):
    """All six reward components re-evaluated from their scalar definitions."""
    n = len(gamma)
    r_ur = -sum(1.0 - data[i] / b0[i] for i in range(n)) / n
    r_dr = -min(sum(delays) / (cfg.dtti_limit * n), 1.0)
    span = cfg.dl_power_max - cfg.dl_power_min
    r_ene = -sum((dl_power[i] - cfg.dl_power_min) / (span * n) for i in range(n)) * 0.5
    r_gu = sum(-0.2 for i in range(n) if gamma[i] == 0 and dl_power[i] > cfg.power_epsilon)
    fails = sum(1 for d in delays if d > cfg.dtti_limit)
    r_g = -1.0 - 0.5 * fails
    return {"r_ur": r_ur, "r_dr": r_dr, "r_ene": r_ene, "r_gu": r_gu, "r_g": r_g,
            "r_d": r_dr + r_ene + r_gu}


def central_difference(f, params, h=1e-6, stencil=2):
    """Numerical gradient of scalar ``f()`` w.r.t. each array in ``params`` (perturbed in place).

    ``stencil=4`` uses the fourth-order five-point formula, which keeps
    round-off small when the loss is large relative to its gradient.
    """
    grads = []
    for p in params:
        g = np.zeros_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            old = flat[i]

            def at(delta):
                flat[i] = old + delta
                return f()

            if stencil == 4:
                gflat[i] = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h)
            else:
                gflat[i] = (at(h) - at(-h)) / (2 * h)
            flat[i] = old
        grads.append(g)
    return grads


def max_rel_error(a_list, b_list, floor=1e-8):
    worst = 0.0
    for a, b in zip(a_list, b_list):
        diff = np.abs(a - b)
        scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
        worst = max(worst, float(np.max(diff / scale)) if diff.size else 0.0)
    return worst


def dense_forward(weights, biases, x):
    """Plain-loop MLP forward (tanh hidden, identity out)."""
    h = [list(map(float, row)) for row in np.atleast_2d(x)]
    for li, (w, b) in enumerate(zip(weights, biases)):
        nxt = []
        for row in h:
            out = []
            for j in range(w.shape[1]):
                s = b[j] + sum(row[i] * w[i, j] for i in range(w.shape[0]))
                out.append(math.tanh(s) if li < len(weights) - 1 else s)
            nxt.append(out)
        h = nxt
    return np.array(h)
