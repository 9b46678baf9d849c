"""
Plant, leader and reference dynamics plus the composed tracking controllers.

The controllers stay silent until the observers have converged (t < T_c) and
then run the sliding-mode law on the observer output, with the h1 clock
restarted at T_c.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .generator import StagedGain, staged_gain, staged_gain_dot
from .observers import ObserverState
from .signals import ZERO, Signal
from .smc import sliding_control
from .topology import TrackingMode
from .validation import CheckEntry, DimensionError

logger = logging.getLogger(__name__)

DEFAULT_INIT_LOW = -10.0
DEFAULT_INIT_HIGH = 10.0


@dataclass(frozen=True)
class PlantSpec:
    """Single double integrator driven by the sliding-mode controller."""
    z1: float
    z2: float
    disturbance: Signal = ZERO
    disturbance_bound: float = 0.0


@dataclass(frozen=True)
class LeaderSpec:
    x0: float = 0.0
    v0: float = 0.0
    u0: Signal = ZERO
    u_max: float = 0.0


@dataclass(frozen=True, eq=False)
class FollowerSpec:
    """Initial follower states, per-agent disturbances and their declared bound."""
    x: np.ndarray
    v: np.ndarray
    disturbances: Tuple[Signal, ...] = ()
    d_max: float = 0.0
    seed: Optional[int] = None  # set when x, v were drawn at random
    init_range: Tuple[float, float] = (DEFAULT_INIT_LOW, DEFAULT_INIT_HIGH)

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        v = np.array(self.v, dtype=float).reshape(-1)
        if x.shape != v.shape:
            raise DimensionError(f"Follower x has {x.size} entries but v has {v.size}")
        disturbances = tuple(self.disturbances) or tuple(ZERO for _ in range(x.size))
        if len(disturbances) != x.size:
            raise DimensionError(f"Expected {x.size} disturbance signals, got {len(disturbances)}")
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'v', v)
        object.__setattr__(self, 'disturbances', disturbances)

    @property
    def n(self) -> int:
        return self.x.size

    @classmethod
    def random(
        cls,
        n: int,
        seed: int,
        low: float = DEFAULT_INIT_LOW,
        high: float = DEFAULT_INIT_HIGH,
        disturbances: Sequence[Signal] = (),
        d_max: float = 0.0,
    ) -> 'FollowerSpec':
        """Draw x(0) then v(0) uniformly from [low, high] with a seeded generator."""
        rng = np.random.default_rng(seed)
        x = rng.uniform(low, high, n)
        v = rng.uniform(low, high, n)
        return cls(x, v, tuple(disturbances), d_max, seed, (low, high))

    def reseeded(self, seed: int) -> 'FollowerSpec':
        """Redraw random initial states with a new seed; explicit states are kept."""
        if self.seed is None:
            return self
        low, high = self.init_range
        return FollowerSpec.random(self.n, seed, low, high, self.disturbances, self.d_max)

    def disturbance(self, t: float) -> np.ndarray:
        return np.array([d(t) for d in self.disturbances])


@dataclass(frozen=True, eq=False)
class ReferenceSpec:
    """Per-agent reference signals r_i with r_i' = f_i, f_i' = a_i^r."""
    r: np.ndarray
    f: np.ndarray
    accelerations: Tuple[Signal, ...] = field(default_factory=tuple)
    a_max: float = 0.0

    def __post_init__(self):
        r = np.array(self.r, dtype=float).reshape(-1)
        f = np.array(self.f, dtype=float).reshape(-1)
        if r.shape != f.shape or len(self.accelerations) != r.size:
            raise DimensionError(
                f"Reference sizes disagree: r={r.size}, f={f.size}, a={len(self.accelerations)}"
            )
        object.__setattr__(self, 'r', r)
        object.__setattr__(self, 'f', f)
        object.__setattr__(self, 'accelerations', tuple(self.accelerations))

    @property
    def n(self) -> int:
        return self.r.size

    def acceleration(self, t: float) -> np.ndarray:
        return np.array([a(t) for a in self.accelerations])

    def average_acceleration(self, t: float) -> float:
        """a_bar(t)"""
        return float(self.acceleration(t).mean())


def averages(r: np.ndarray, f: np.ndarray) -> Tuple[float, float]:
    """(r_bar, f_bar) of a reference bank."""
    return float(np.mean(r)), float(np.mean(f))


def leader_rhs(spec: LeaderSpec, state: Tuple[float, float], t: float) -> Tuple[float, float]:
    """(x0', v0') = (v0, u0(t))."""
    _, v0 = state
    return v0, spec.u0(t)


def follower_rhs(spec: FollowerSpec, state: Tuple[np.ndarray, np.ndarray], u, t: float):
    """(x', v') = (v, u + d(t))."""
    _, v = state
    return v, np.asarray(u, dtype=float) + spec.disturbance(t)


def reference_rhs(spec: ReferenceSpec, state: Tuple[np.ndarray, np.ndarray], t: float):
    """(r', f') = (f, a^r(t))."""
    _, f = state
    return f, spec.acceleration(t)


@dataclass(frozen=True)
class TrackingController:
    """Sliding-mode stage of the composed controllers, switched on at t_c."""
    schedule: StagedGain
    rho: float
    t_c: float
    boundary_layer: Optional[float] = None

    @property
    def deadline(self) -> float:
        """T_c + T_a"""
        return self.t_c + self.schedule.total

    def gains_at(self, t: float) -> Tuple[float, float]:
        """(h1, h1') on the clock restarted at t_c; zero before t_c."""
        if t < self.t_c:
            return 0.0, 0.0
        tau = t - self.t_c
        return staged_gain(self.schedule, tau), staged_gain_dot(self.schedule, tau)


def required_rho(mode: TrackingMode, d_max: float, u_max: float = 0.0, a_max: float = 0.0) -> float:
    """Switching-gain threshold: disturbance bound + 1 for smc, d_max + u_max (or a_max) + 1 otherwise."""
    mode = TrackingMode(mode)
    if mode == TrackingMode.SMC:
        return abs(d_max) + 1.0
    if mode == TrackingMode.DAT:
        return d_max + a_max + 1.0
    return d_max + u_max + 1.0


def check_rho(rho: float, mode: TrackingMode, d_max: float, u_max: float = 0.0, a_max: float = 0.0) -> CheckEntry:
    """Report entry for the switching gain; logs a warning when it is too small."""
    threshold = required_rho(mode, d_max, u_max, a_max)
    passed = rho >= threshold
    if not passed:
        logger.warning(
            "Switching gain rho=%g is below %g for %s; convergence by the deadline is not guaranteed",
            rho, threshold, TrackingMode(mode).value,
        )
    return CheckEntry("rho >= bound + 1", passed, value=float(rho), threshold=float(threshold))


def ct_controls(c: TrackingController, obs: ObserverState, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Network-wide consensus-tracking control.

    Returns:
        Tuple of (s, u); u is exactly zero before t_c
    """
    h, h_dot = c.gains_at(t)
    s, u = sliding_control(h, h_dot, c.rho, obs.alpha, obs.beta, c.boundary_layer)
    if t < c.t_c:
        u = np.zeros_like(obs.alpha)
    return s, u


def ct_control(c: TrackingController, obs: ObserverState, i: int, t: float) -> float:
    """Control of agent i (0-based) from its own observer state."""
    if t < c.t_c:
        return 0.0
    h, h_dot = c.gains_at(t)
    _, u = sliding_control(h, h_dot, c.rho, obs.alpha[i], obs.beta[i], c.boundary_layer)
    return float(u)


def dat_controls(c: TrackingController, obs: ObserverState, x, v, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """Network-wide average-tracking control on the errors (x - alpha, v - beta)."""
    h, h_dot = c.gains_at(t)
    s, u = sliding_control(h, h_dot, c.rho, np.asarray(x) - obs.alpha, np.asarray(v) - obs.beta, c.boundary_layer)
    if t < c.t_c:
        u = np.zeros_like(obs.alpha)
    return s, u


def dat_control(c: TrackingController, obs: ObserverState, x, v, i: int, t: float) -> float:
    if t < c.t_c:
        return 0.0
    h, h_dot = c.gains_at(t)
    _, u = sliding_control(h, h_dot, c.rho, x[i] - obs.alpha[i], v[i] - obs.beta[i], c.boundary_layer)
    return float(u)


@dataclass(frozen=True, eq=False)
class TrackingMetric:
    """Per-agent |position error| + |velocity error| on the log grid."""
    t: np.ndarray
    values: np.ndarray  # (samples, agents)

    @property
    def worst(self) -> np.ndarray:
        return self.values.max(axis=1)

    def at(self, time: float) -> np.ndarray:
        k = int(np.argmin(np.abs(self.t - time)))
        return self.values[k]

    def crossing_time(self, threshold: float) -> Optional[float]:
        """First time the worst agent drops to threshold, linearly interpolated."""
        return first_crossing(self.t, self.worst, threshold)


def first_crossing(t: np.ndarray, series: np.ndarray, threshold: float) -> Optional[float]:
    below = np.nonzero(series <= threshold)[0]
    if below.size == 0:
        return None
    k = int(below[0])
    if k == 0:
        return float(t[0])
    t0, t1 = t[k - 1], t[k]
    y0, y1 = series[k - 1], series[k]
    return float(t0 + (y0 - threshold) * (t1 - t0) / (y0 - y1))


def _columns(series: np.ndarray) -> np.ndarray:
    return series.reshape(series.shape[0], -1)


def tracking_metric(log, mode: TrackingMode) -> TrackingMetric:
    """
    Tracking error series from a trajectory log.

    Consensus tracking compares followers with the leader (x0, v0); average
    tracking compares them with (r_bar, f_bar); smc uses |z1| + |z2|.
    """
    mode = TrackingMode(mode)
    x = _columns(log.channel("x"))
    v = _columns(log.channel("v"))
    if mode == TrackingMode.SMC:
        target_x = target_v = np.zeros((x.shape[0], 1))
    elif mode == TrackingMode.DAT:
        target_x = log.channel("r_bar")[:, None]
        target_v = log.channel("f_bar")[:, None]
    else:
        target_x = log.channel("x0")[:, None]
        target_v = log.channel("v0")[:, None]
    return TrackingMetric(log.t, np.abs(x - target_x) + np.abs(v - target_v))
