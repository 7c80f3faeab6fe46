"""Indoor geometry, path loss and Rician small-scale fading."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class FadingParams:
    beta0: float = 1e-3
    alpha: float = 2.0
    rice_k: float = 3.0
    height: float = 3.0
    los_component: complex = 1 + 0j

    def __post_init__(self):
        if not self.beta0 > 0:
            raise ValueError(f"beta0 must be positive, got {self.beta0}")
        if self.alpha < 0 or self.rice_k < 0 or self.height < 0:
            raise ValueError("alpha, rice_k and height must be non-negative")
        if abs(abs(self.los_component) - 1.0) > 1e-12:
            raise ValueError("LOS component must have unit modulus")


@dataclass(frozen=True)
class Topology:
    """User and console positions on a floor plan centred at the origin.

    Positions are stored as an ``(N, 2)`` array of metres; the console
    position is a length-2 array.
    """

    xu_positions: np.ndarray
    mc_position: np.ndarray
    area_x: float
    area_y: float

    def in_bounds(self) -> bool:
        hx, hy = self.area_x / 2, self.area_y / 2
        pts = np.vstack([self.xu_positions, self.mc_position[None, :]])
        return bool(np.all(np.abs(pts[:, 0]) <= hx) and np.all(np.abs(pts[:, 1]) <= hy))


def distance(xu_pos, mc_pos, height: float) -> float:
    dx = float(xu_pos[0]) - float(mc_pos[0])
    dy = float(xu_pos[1]) - float(mc_pos[1])
    return math.sqrt(dx * dx + dy * dy + height * height)


def distances(topology: Topology, height: float) -> np.ndarray:
    """Vectorised :func:`distance` for every user of ``topology``."""
    d = topology.xu_positions - topology.mc_position[None, :]
    return np.sqrt(np.sum(d * d, axis=1) + height * height)


def path_gain(dist, params: FadingParams):
    """Large-scale gain ``beta0 * dist**-alpha``; accepts scalars or arrays."""
    d = np.asarray(dist, dtype=np.float64)
    if np.any(d <= 0):
        raise ValueError("path gain undefined at zero distance")
    out = params.beta0 * d ** (-params.alpha)
    return float(out) if out.ndim == 0 else out


def sample_small_scale(rng: np.random.Generator, rice_k: float,
                       los_component: complex = 1 + 0j, size=None):
    """Draw Rician small-scale coefficients with unit mean power.

    The NLOS part is CN(0, 1): real and imaginary parts each N(0, 1/2).
    """
    if rice_k < 0:
        raise ValueError("rice_k must be non-negative")
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    nlos = (re + 1j * im) * math.sqrt(0.5)
    if rice_k == 0:
        return nlos
    w_los = math.sqrt(rice_k / (rice_k + 1.0))
    w_nlos = math.sqrt(1.0 / (rice_k + 1.0))
    return w_los * los_component + w_nlos * nlos


def channel_gain(beta, g):
    """Return ``(h, |h|^2)`` with ``h = sqrt(beta) * g``."""
    beta = np.asarray(beta, dtype=np.float64)
    if np.any(beta <= 0):
        raise ValueError("beta must be positive")
    h = np.sqrt(beta) * g
    power = beta * np.abs(g) ** 2
    if np.ndim(h) == 0:
        return complex(h), float(power)
    return h, power


def sample_gains(rng: np.random.Generator, topology: Topology,
                 params: FadingParams, num_channels: int) -> np.ndarray:
    """Complex gains ``h[n, m]`` for one TTI, i.i.d. fading per user-channel."""
    beta = path_gain(distances(topology, params.height), params)
    beta = np.atleast_1d(beta)
    g = sample_small_scale(rng, params.rice_k, params.los_component,
                           size=(len(beta), num_channels))
    return np.sqrt(beta)[:, None] * g


def random_topology(rng: np.random.Generator, num_users: int,
                    area_x: float, area_y: float) -> Topology:
    hx, hy = area_x / 2, area_y / 2
    xu = np.column_stack([rng.uniform(-hx, hx, num_users), rng.uniform(-hy, hy, num_users)])
    mc = np.array([rng.uniform(-hx, hx), rng.uniform(-hy, hy)])
    return Topology(xu, mc, area_x, area_y)


def step_topology(rng: np.random.Generator, topology: Topology, walk_step: float) -> Topology:
    """Random-walk every user by at most ``walk_step`` per axis; the console stays put."""
    if walk_step < 0:
        raise ValueError("walk_step must be non-negative")
    if walk_step == 0:
        return topology
    n = topology.xu_positions.shape[0]
    moved = topology.xu_positions + rng.uniform(-walk_step, walk_step, size=(n, 2))
    hx, hy = topology.area_x / 2, topology.area_y / 2
    moved[:, 0] = np.clip(moved[:, 0], -hx, hx)
    moved[:, 1] = np.clip(moved[:, 1], -hy, hy)
    return replace(topology, xu_positions=moved)
