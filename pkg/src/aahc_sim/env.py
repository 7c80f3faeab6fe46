"""Two-stage asynchronous uplink/downlink environment.

Each iteration is one TTI: the uplink agent picks a channel (or idle) for
every user, the users upload part of their buffers, the console renders the
uploads into larger 3D payloads, and the downlink agent picks the power used
to send each payload back. A downlink that overruns the DTTI limit fails and
the corresponding uplink data stays in the user's buffer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .channel import FadingParams, Topology, random_topology, sample_gains, step_topology

MBIT = 1e6


class SequencingError(RuntimeError):
    """Raised when uplink and downlink steps are not called alternately."""


def dbm_per_hz_to_w(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


@dataclass(frozen=True)
class ScenarioConfig:
    num_channels: int = 3
    num_users: int = 4
    bandwidth: float = 10e9
    noise_psd_dbm: float = -174.0
    utti: float = 0.5e-3
    dtti_limit: float = 1.5e-3
    dl_power_min: float = 0.0
    dl_power_max: float = 20.0
    buffer_range: tuple[float, float] = (10.0, 20.0)      # Mbit
    ul_power_range: tuple[float, float] = (3.0, 10.0)     # W
    augment_range: tuple[float, float] = (5.0, 15.0)
    max_iterations: int = 100
    fading: FadingParams = field(default_factory=FadingParams)
    area_x: float = 100.0
    area_y: float = 100.0
    walk_step: float = 1.0
    power_epsilon: float = 1e-6
    # state features: log10|h|^2 mapped linearly from [floor, floor + span] onto [0, 1]
    gain_log_floor: float = -12.0
    gain_log_span: float = 8.0

    def __post_init__(self):
        if self.num_channels < 1 or self.num_users < 1:
            raise ValueError("need at least one channel and one user")
        if not (self.utti > 0 and self.dtti_limit > 0):
            raise ValueError("UTTI and DTTI limit must be positive")
        if not self.dl_power_min < self.dl_power_max:
            raise ValueError("dl_power_min must be below dl_power_max")
        for name in ("buffer_range", "ul_power_range", "augment_range"):
            lo, hi = getattr(self, name)
            if not 0 <= lo <= hi:
                raise ValueError(f"{name} must satisfy 0 <= low <= high")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.gain_log_span <= 0:
            raise ValueError("gain_log_span must be positive")

    @property
    def noise_psd(self) -> float:
        return dbm_per_hz_to_w(self.noise_psd_dbm)

    @property
    def num_actions(self) -> int:
        return (self.num_channels + 1) ** self.num_users

    @property
    def ul_state_dim(self) -> int:
        return self.num_users * (self.num_channels + 2)

    @property
    def dl_state_dim(self) -> int:
        return self.num_users * (self.num_channels + 3)

    @classmethod
    def from_name(cls, name: str, **overrides) -> "ScenarioConfig":
        """Build the ``"m-n"`` preset: ``m`` channels shared by ``n`` users."""
        match = re.fullmatch(r"\s*(\d+)\s*-\s*(\d+)\s*", name)
        if not match:
            raise ValueError(f"scenario name must look like 'm-n', got {name!r}")
        m, n = int(match.group(1)), int(match.group(2))
        return cls(num_channels=m, num_users=n, **overrides)


@dataclass
class KpiAccumulator:
    iterations: int = 0
    retrans_count: int = 0
    transmission_count: int = 0
    energy_j: float = 0.0
    max_ul_rate_sum: float = 0.0
    total_delay_s: float = 0.0


@dataclass
class PendingUplink:
    gamma: np.ndarray
    active: np.ndarray       # scheduled users that still hold data
    rates: np.ndarray        # bit/s
    data: np.ndarray         # bits uploaded, D
    rendered: np.ndarray     # bits to send back, D'


@dataclass
class EpisodeState:
    buffers: np.ndarray            # bits
    initial_buffers: np.ndarray    # bits
    ul_power: np.ndarray           # W
    topology: Topology
    gains: np.ndarray              # complex h[n, m]
    t: int = 0
    pending: PendingUplink | None = None
    kpi: KpiAccumulator = field(default_factory=KpiAccumulator)
    delivered: np.ndarray | None = None   # running sum of (1 - I) D per user
    power_gain: np.ndarray | None = None  # |h|^2, refreshed with the gains
    gain_features: np.ndarray | None = None


@dataclass
class UplinkOutcome:
    r_u: float
    s_d: np.ndarray
    rates: np.ndarray
    data: np.ndarray
    rendered: np.ndarray


@dataclass
class DownlinkOutcome:
    r_d: float
    r_g: float
    s_u: np.ndarray
    done: bool
    r_dr: float
    r_ene: float
    r_gu: float
    rates: np.ndarray
    delays: np.ndarray       # seconds; 0 for users with nothing to receive
    failures: np.ndarray     # I_n
    energy: float


def encode_uplink_action(gamma, num_channels: int) -> int:
    """Positional base-(M+1) index with user 1 as the least significant digit."""
    base = num_channels + 1
    index = 0
    for g in reversed([int(x) for x in gamma]):
        if not 0 <= g <= num_channels:
            raise ValueError(f"channel index {g} outside [0, {num_channels}]")
        index = index * base + g
    return index


def decode_uplink_action(index: int, num_users: int, num_channels: int) -> np.ndarray:
    base = num_channels + 1
    index = int(index)
    if not 0 <= index < base ** num_users:
        raise ValueError(f"action index {index} outside [0, {base ** num_users})")
    gamma = np.empty(num_users, dtype=np.int64)
    for n in range(num_users):
        index, gamma[n] = divmod(index, base)
    return gamma


def action_table(num_users: int, num_channels: int) -> np.ndarray:
    """All decoded actions as an ``((M+1)^N, N)`` array, row ``a`` = decode(a)."""
    base = num_channels + 1
    idx = np.arange(base ** num_users, dtype=np.int64)
    digits = (idx[:, None] // base ** np.arange(num_users, dtype=np.int64)[None, :]) % base
    return digits.astype(np.int64)


class MetaverseEnv:
    """Episode driver; owns its random streams and a single :class:`EpisodeState`.

    ``streams`` maps ``"env_init"``, ``"fading"`` and ``"augment"`` to
    :class:`numpy.random.Generator` instances.
    """

    def __init__(self, config: ScenarioConfig, streams: dict):
        self.config = config
        self.rng_init = streams["env_init"]
        self.rng_fading = streams["fading"]
        self.rng_augment = streams["augment"]
        self.state: EpisodeState | None = None
        self._bandwidth = np.full(config.num_channels, float(config.bandwidth))
        self._noise = config.noise_psd
        self._noise_xu = np.full((config.num_users, config.num_channels), self._noise)
        self._done = True

    # ------------------------------------------------------------------ lifecycle
    def reset(self) -> np.ndarray:
        cfg = self.config
        n = cfg.num_users
        rng = self.rng_init
        b0 = rng.uniform(*cfg.buffer_range, size=n) * MBIT
        p = rng.uniform(*cfg.ul_power_range, size=n)
        topo = random_topology(rng, n, cfg.area_x, cfg.area_y)
        gains = sample_gains(self.rng_fading, topo, cfg.fading, cfg.num_channels)
        self.state = EpisodeState(buffers=b0.copy(), initial_buffers=b0, ul_power=p,
                                  topology=topo, gains=gains, delivered=np.zeros(n))
        self.set_gains(gains)
        self._done = False
        return self.uplink_state()

    def set_gains(self, gains) -> None:
        """Install this TTI's complex gains (also used to script channel conditions)."""
        cfg = self.config
        st = self.state
        st.gains = np.asarray(gains, dtype=np.complex128)
        st.power_gain = st.gains.real ** 2 + st.gains.imag ** 2
        with np.errstate(divide="ignore"):
            lg = np.log10(st.power_gain)
        st.gain_features = np.clip((lg - cfg.gain_log_floor) / cfg.gain_log_span, 0.0, 1.0).ravel()

    @property
    def done(self) -> bool:
        return self._done

    # ------------------------------------------------------------------ states
    def uplink_state(self) -> np.ndarray:
        st = self.state
        return np.concatenate([st.buffers / (20 * MBIT), st.ul_power / 10.0, st.gain_features])

    def downlink_state(self, pending: PendingUplink | None = None) -> np.ndarray:
        """DL observation; with ``pending=None`` the current pending uplink is used."""
        st = self.state
        pend = st.pending if pending is None else pending
        if pend is None:
            raise SequencingError("no uplink outcome to build a downlink state from")
        return np.concatenate([pend.gamma / self.config.num_channels,
                               st.buffers / (20 * MBIT),
                               pend.rendered / (300 * MBIT),
                               st.gain_features])

    def idle_downlink_state(self) -> np.ndarray:
        """DL observation as if every user idled this TTI (used for bootstrapping)."""
        n = self.config.num_users
        zeros = np.zeros(n)
        idle = PendingUplink(np.zeros(n, dtype=np.int64), zeros.astype(bool), zeros, zeros, zeros)
        return self.downlink_state(idle)

    # ------------------------------------------------------------------ steps
    def uplink_step(self, gamma) -> UplinkOutcome:
        if self.state is None or self._done:
            raise SequencingError("reset() the environment before stepping")
        st = self.state
        if st.pending is not None:
            raise SequencingError("uplink_step called twice without a downlink_step")
        cfg = self.config
        gamma = np.asarray(gamma, dtype=np.int64)
        if gamma.shape != (cfg.num_users,) or gamma.min() < 0 or gamma.max() > cfg.num_channels:
            raise ValueError("invalid channel assignment")

        # users with empty buffers do not transmit and cause no interference
        active = (gamma != 0) & (st.buffers > 0)
        eff = np.where(active, gamma, 0)
        rates = kernels.ul_rates(eff, st.ul_power, st.power_gain, self._bandwidth, self._noise)
        data = np.minimum(st.buffers, rates * cfg.utti)
        c = self.rng_augment.uniform(*cfg.augment_range, size=cfg.num_users)
        rendered = c * data
        st.pending = PendingUplink(gamma, active, rates, data, rendered)

        r_u = -float(np.sum(1.0 - data / st.initial_buffers)) / cfg.num_users
        st.kpi.max_ul_rate_sum += float(rates.max())
        return UplinkOutcome(r_u, self.downlink_state(), rates, data, rendered)

    def downlink_step(self, dl_power) -> DownlinkOutcome:
        st = self.state
        if st is None or st.pending is None:
            raise SequencingError("downlink_step requires a preceding uplink_step")
        cfg = self.config
        p = np.asarray(dl_power, dtype=np.float64)
        if p.shape != (cfg.num_users,):
            raise ValueError("downlink power vector has the wrong length")
        if not (p.min() >= cfg.dl_power_min and p.max() <= cfg.dl_power_max):   # NaN fails too
            raise ValueError("downlink power outside [p_min, p_max]")
        pend = st.pending
        eff = np.where(pend.active, pend.gamma, 0)
        rates = kernels.dl_rates(eff, p, st.power_gain, self._bandwidth, self._noise_xu)

        sending = pend.active & (pend.rendered > 0)
        # zero rate never finishes: infinite delay, counted as a failure
        delays = np.divide(pend.rendered, rates, out=np.full(cfg.num_users, np.inf), where=rates > 0)
        delays[~sending] = 0.0
        failures = (delays > cfg.dtti_limit).astype(np.int64)
        delivered = (1 - failures) * pend.data
        st.buffers = st.buffers - delivered
        st.delivered = st.delivered + delivered
        capped = np.minimum(delays, cfg.dtti_limit)
        energy = float((p * capped)[pend.active].sum())

        n = cfg.num_users
        r_dr = -min(float(delays.sum()) / (cfg.dtti_limit * n), 1.0)
        span = cfg.dl_power_max - cfg.dl_power_min
        r_ene = -float(((p - cfg.dl_power_min) / (span * n)).sum()) * 0.5
        r_gu = -0.2 * int(np.count_nonzero((pend.gamma == 0) & (p > cfg.power_epsilon)))
        n_fail = int(failures.sum())
        r_g = -1.0 - 0.5 * n_fail

        kpi = st.kpi
        kpi.iterations += 1
        kpi.retrans_count += n_fail
        kpi.transmission_count += int(np.count_nonzero(sending))
        kpi.energy_j += energy
        kpi.total_delay_s += cfg.utti + float(capped.max())

        st.pending = None
        st.t += 1
        st.topology = step_topology(self.rng_fading, st.topology, cfg.walk_step)
        self.set_gains(sample_gains(self.rng_fading, st.topology, cfg.fading, cfg.num_channels))
        self._done = bool(np.all(st.buffers <= 0) or st.t >= cfg.max_iterations)
        return DownlinkOutcome(r_dr + r_ene + r_gu, r_g, self.uplink_state(), self._done,
                               r_dr, r_ene, r_gu, rates, delays, failures, energy)

    def kpi_summary(self) -> dict:
        return kpi_summary(self.state.kpi) if self.state is not None else kpi_summary(KpiAccumulator())


def kpi_summary(kpi: KpiAccumulator) -> dict:
    it = kpi.iterations
    return {
        "iterations": it,
        "total_delay_ms": kpi.total_delay_s * 1e3,
        "retrans_pct": 100.0 * kpi.retrans_count / kpi.transmission_count if kpi.transmission_count else 0.0,
        "max_ul_rate_gbps": kpi.max_ul_rate_sum / it / 1e9 if it else 0.0,
        "energy_j": kpi.energy_j,
    }
