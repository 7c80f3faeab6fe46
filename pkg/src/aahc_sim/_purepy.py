"""Pure-Python kernels; reference behaviour for the compiled ``_kernels`` module.

Both implementations perform the floating-point operations in the same
order so that they agree bit for bit.
"""

import math

import numpy as np

_LN2 = math.log(2.0)


def _members_sorted(gamma, key_of, channel):
    members = [n for n in range(len(gamma)) if gamma[n] == channel]
    # descending key, ties by ascending user index
    members.sort(key=lambda n: (-key_of(n), n))
    return members


def ul_rates(gamma, ul_power, power_gain, bandwidth, noise_mc):
    gamma = np.asarray(gamma, dtype=np.int64)
    n_users, n_ch = power_gain.shape
    out = np.zeros(n_users)
    for m in range(1, n_ch + 1):
        col = m - 1
        received = [float(ul_power[n]) * float(power_gain[n, col]) for n in range(n_users)]
        order = _members_sorted(gamma, lambda n: received[n], m)
        if not order:
            continue
        w = float(bandwidth[col])
        floor = w * noise_mc
        interf = 0.0
        for pos in range(len(order) - 1, -1, -1):
            n = order[pos]
            sinr = received[n] / (interf + floor)
            out[n] = w * (math.log1p(sinr) / _LN2)
            interf = interf + received[n]
    return out


def dl_rates(gamma, dl_power, power_gain, bandwidth, noise_xu):
    gamma = np.asarray(gamma, dtype=np.int64)
    n_users, n_ch = power_gain.shape
    out = np.zeros(n_users)
    for m in range(1, n_ch + 1):
        col = m - 1
        cnr = [float(power_gain[n, col]) / float(noise_xu[n, col]) for n in range(n_users)]
        order = _members_sorted(gamma, lambda n: cnr[n], m)
        if not order:
            continue
        w = float(bandwidth[col])
        stronger = 0.0
        for n in order:
            g2 = float(power_gain[n, col])
            p = float(dl_power[n])
            sinr = p * g2 / (stronger * g2 + w * float(noise_xu[n, col]))
            out[n] = w * (math.log1p(sinr) / _LN2)
            stronger = stronger + p
    return out


def gae(rewards, values, next_values, dones, gamma, lam):
    T = len(rewards)
    adv = np.zeros(T)
    last = 0.0
    for t in range(T - 1, -1, -1):
        notdone = 0.0 if dones[t] else 1.0
        delta = float(rewards[t]) + gamma * float(next_values[t]) * notdone - float(values[t])
        last = delta + gamma * lam * notdone * last
        adv[t] = last
    return adv
