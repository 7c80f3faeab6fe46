"""Fixed-capacity on-policy storage for asynchronous UL/DL transitions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class StepRecord:
    s_u: np.ndarray
    a_u: int
    logp_u: float
    r_u: float
    s_d: np.ndarray
    a_d: np.ndarray          # raw (pre-clip) Gaussian draw
    logp_d: float
    r_d: float
    r_g: float
    s_u_next: np.ndarray
    s_d_next: np.ndarray | None
    done: bool


class TrajectoryBuffer:
    def __init__(self, capacity: int, ul_dim: int, dl_dim: int, num_users: int):
        self.capacity = capacity
        self.s_u = np.zeros((capacity, ul_dim))
        self.s_u_next = np.zeros((capacity, ul_dim))
        self.s_d = np.zeros((capacity, dl_dim))
        self.s_d_next = np.zeros((capacity, dl_dim))
        self.a_u = np.zeros(capacity, dtype=np.int64)
        self.a_d = np.zeros((capacity, num_users))
        self.logp_u = np.zeros(capacity)
        self.logp_d = np.zeros(capacity)
        self.r_u = np.zeros(capacity)
        self.r_d = np.zeros(capacity)
        self.r_g = np.zeros(capacity)
        self.done = np.zeros(capacity, dtype=bool)
        self.size = 0

    @property
    def full(self) -> bool:
        return self.size == self.capacity

    def add(self, rec: StepRecord) -> None:
        if self.full:
            raise OverflowError("trajectory buffer is full")
        i = self.size
        self.s_u[i] = rec.s_u
        self.s_u_next[i] = rec.s_u_next
        self.s_d[i] = rec.s_d
        if rec.s_d_next is not None:
            self.s_d_next[i] = rec.s_d_next
        else:
            self.s_d_next[i] = 0.0
        self.a_u[i] = rec.a_u
        self.a_d[i] = rec.a_d
        self.logp_u[i] = rec.logp_u
        self.logp_d[i] = rec.logp_d
        self.r_u[i] = rec.r_u
        self.r_d[i] = rec.r_d
        self.r_g[i] = rec.r_g
        self.done[i] = rec.done
        self.size += 1

    def clear(self) -> None:
        self.size = 0

    @property
    def joint(self) -> np.ndarray:
        return np.concatenate([self.s_u[: self.size], self.s_d[: self.size]], axis=1)

    @property
    def joint_next(self) -> np.ndarray:
        return np.concatenate([self.s_u_next[: self.size], self.s_d_next[: self.size]], axis=1)
