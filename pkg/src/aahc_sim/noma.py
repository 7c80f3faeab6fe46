"""NOMA successive-interference-cancellation orders and achievable rates.

Uplink: the console decodes users on a channel in descending order of
received power ``p_n |h_n|^2``; a user is interfered with only by the users
decoded after it.

Downlink: users on a channel are ranked by descending channel-to-noise
ratio ``|h_n|^2 / sigma_n^2``; a user is interfered with by the powers of
the users ranked ahead of it, seen through its own channel gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class ChannelAssignment:
    """Per-user channel index, 0 meaning the user idles this TTI."""

    gamma: np.ndarray
    num_channels: int

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=np.int64)
        if g.ndim != 1 or np.any(g < 0) or np.any(g > self.num_channels):
            raise ValueError(f"channel indices must lie in [0, {self.num_channels}]")
        object.__setattr__(self, "gamma", g)

    @property
    def scheduled(self) -> np.ndarray:
        return self.gamma != 0

    def members(self, channel: int) -> list[int]:
        return [int(n) for n in np.flatnonzero(self.gamma == channel)]

    def member_sets(self) -> dict[int, list[int]]:
        return {m: self.members(m) for m in range(1, self.num_channels + 1)}


@dataclass(frozen=True)
class LinkBudget:
    bandwidth: np.ndarray      # Hz, one entry per channel
    noise_psd_mc: float        # W/Hz at the console
    noise_psd_xu: np.ndarray   # W/Hz, shape (N, M)
    ul_power: np.ndarray       # W per user
    dl_power: np.ndarray | None = None

    @classmethod
    def uniform(cls, num_users: int, num_channels: int, bandwidth: float, noise_psd: float,
                ul_power, dl_power=None) -> "LinkBudget":
        return cls(
            bandwidth=np.full(num_channels, float(bandwidth)),
            noise_psd_mc=float(noise_psd),
            noise_psd_xu=np.full((num_users, num_channels), float(noise_psd)),
            ul_power=np.asarray(ul_power, dtype=np.float64),
            dl_power=None if dl_power is None else np.asarray(dl_power, dtype=np.float64),
        )


def _order(members, keys) -> list[int]:
    if len(members) == 0:
        raise ValueError("ordering needs at least one member")
    return sorted((int(n) for n in members), key=lambda n: (-keys[n], n))


def uplink_order(members, ul_power, power_gain) -> list[int]:
    """SIC order of ``members`` by received power; ``power_gain[n]`` is the gain on this channel."""
    keys = {int(n): float(ul_power[n]) * float(power_gain[n]) for n in members}
    return _order(members, keys)


def downlink_order(members, power_gain, noise_psd) -> list[int]:
    keys = {int(n): float(power_gain[n]) / float(noise_psd[n]) for n in members}
    return _order(members, keys)


def uplink_rates(assignment: ChannelAssignment, budget: LinkBudget,
                 power_gain: np.ndarray) -> np.ndarray:
    """Achievable uplink rate (bit/s) per user; idle users get 0.

    ``power_gain`` is ``|h[n, m]|^2`` with shape ``(N, M)``.
    """
    return kernels.ul_rates(assignment.gamma, budget.ul_power, power_gain,
                            budget.bandwidth, budget.noise_psd_mc)


def downlink_rates(assignment: ChannelAssignment, budget: LinkBudget,
                   power_gain: np.ndarray, dl_power=None) -> np.ndarray:
    p = budget.dl_power if dl_power is None else dl_power
    if p is None:
        raise ValueError("downlink power not supplied")
    return kernels.dl_rates(assignment.gamma, p, power_gain,
                            budget.bandwidth, budget.noise_psd_xu)
