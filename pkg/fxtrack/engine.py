"""
Fixed-step integration, trajectory logging and convergence diagnostics.

The right-hand sides contain sgn switching, so forward Euler is the default;
rk4 is available for smooth sub-problems. Time is always t_k = k * dt so
stage boundaries land exactly on the grid.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional

import numpy as np

from .validation import SimulationDivergedError

logger = logging.getLogger(__name__)

GRID_TOL = 1e-9

Rhs = Callable[[float, np.ndarray], np.ndarray]
Sampler = Callable[[float, np.ndarray], Dict[str, np.ndarray]]


class Integrator(str, Enum):
    EULER = "euler"
    RK4 = "rk4"


class LyapunovKind(str, Enum):
    """Lyapunov candidates recorded as diagnostics."""
    V1 = "V1"  # 1/2 sum s_i^2
    V2 = "V2"  # 1/2 z1^2
    V3 = "V3"  # 1/2 beta_err' Q beta_err
    V4 = "V4"  # 1/2 alpha_err' Q alpha_err
    V5 = "V5"  # sum p_i (c1 z_i^2 + c2 |z_i|), z = H beta_err
    V6 = "V6"  # 1/2 beta' L beta
    V7 = "V7"  # 1/2 alpha' L alpha


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-4
    horizon: float = 10.0
    integrator: Integrator = Integrator.EULER
    seed: int = 0
    decimation: int = 100

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if int(self.decimation) != self.decimation or self.decimation < 1:
            raise ValueError(f"decimation must be a positive integer, got {self.decimation}")
        object.__setattr__(self, 'integrator', Integrator(self.integrator))
        object.__setattr__(self, 'decimation', int(self.decimation))

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def on_grid(self, duration: float) -> bool:
        ratio = duration / self.dt
        return abs(ratio - round(ratio)) <= GRID_TOL * max(1.0, ratio)

    def check_events(self, **durations: float) -> None:
        """
        Require dt to divide every stage duration and the horizon.

        Raises:
            ValueError: Naming the first duration off the grid
        """
        for name, duration in dict(durations, horizon=self.horizon).items():
            if not self.on_grid(duration):
                raise ValueError(f"dt={self.dt:g} does not divide {name}={duration:g}")


@dataclass(eq=False)
class TrajectoryLog:
    """Decimated time grid, raw states and named sampler channels."""
    t: np.ndarray
    states: np.ndarray
    channels: Dict[str, np.ndarray] = field(default_factory=dict)

    def channel(self, name: str) -> np.ndarray:
        try:
            return self.channels[name]
        except KeyError:
            raise ValueError(f"Trajectory log has no channel '{name}'") from None

    def index_at(self, time: float) -> int:
        """Grid index nearest to time."""
        return int(np.argmin(np.abs(self.t - time)))

    def value_at(self, name: str, time: float) -> np.ndarray:
        return self.channel(name)[self.index_at(time)]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self) -> int:
        return self.t.size


def _euler_step(rhs: Rhs, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    return y + dt * rhs(t, y)


def _rk4_step(rhs: Rhs, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


_STEPPERS = {Integrator.EULER: _euler_step, Integrator.RK4: _rk4_step}


def integrate(rhs: Rhs, y0, config: SimConfig, sampler: Optional[Sampler] = None) -> TrajectoryLog:
    """
    Advance y' = rhs(t, y) from t = 0 to the horizon with a fixed step.

    Args:
        rhs: Right-hand side returning an array shaped like y
        y0: Initial state
        config: Step, horizon, integrator and decimation
        sampler: Optional callable returning named channels at logged points

    Returns:
        TrajectoryLog sampled every `decimation` steps plus the final step

    Raises:
        ValueError: If the initial state is not finite
        SimulationDivergedError: If the state becomes non-finite
    """
    step = _STEPPERS[config.integrator]
    y = np.array(y0, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError(f"Initial state must be finite, got {y}")
    dt = config.dt
    steps = config.steps

    times: List[float] = []
    states: List[np.ndarray] = []
    samples: Dict[str, List[np.ndarray]] = {}

    def record(t: float, state: np.ndarray) -> None:
        times.append(t)
        states.append(state.copy())
        if sampler is not None:
            for name, value in sampler(t, state).items():
                samples.setdefault(name, []).append(np.asarray(value, dtype=float))

    logger.debug("Integrating %d steps of %g s with %s", steps, dt, config.integrator.value)
    record(0.0, y)
    for k in range(steps):
        # overflow surfaces as SimulationDivergedError below
        with np.errstate(over='ignore', invalid='ignore'):
            y = step(rhs, k * dt, y, dt)
        if not np.all(np.isfinite(y)):
            bad = int(np.nonzero(~np.isfinite(y))[0][0])
            raise SimulationDivergedError((k + 1) * dt, bad)
        if (k + 1) % config.decimation == 0 or k + 1 == steps:
            record((k + 1) * dt, y)

    return TrajectoryLog(
        t=np.array(times),
        states=np.array(states),
        channels={name: np.array(values) for name, values in samples.items()},
    )


def settling_time(t: np.ndarray, series: np.ndarray, threshold: float) -> Optional[float]:
    """
    First grid time after which the series stays at or below threshold.

    Multi-column series are reduced to their worst column.

    Returns:
        Settling time, or None if the series ends above threshold

    Raises:
        ValueError: If the series is empty
    """
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("Cannot compute a settling time of an empty series")
    if series.ndim > 1:
        series = series.reshape(series.shape[0], -1).max(axis=1)
    above = np.nonzero(series > threshold)[0]
    if above.size == 0:
        return float(t[0])
    last = int(above[-1])
    if last == series.size - 1:
        return None
    return float(t[last + 1])


def finite_time_bound(mu: float, nu: float, V0: float) -> float:
    """Settling bound V0^(1-nu) / (mu (1-nu)) for V' <= -mu V^nu."""
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if not 0 < nu < 1:
        raise ValueError(f"nu must lie in (0, 1), got {nu}")
    if V0 < 0:
        raise ValueError(f"V0 must be nonnegative, got {V0}")
    return V0 ** (1.0 - nu) / (mu * (1.0 - nu))


def _quadratic(errors: np.ndarray, M: np.ndarray) -> np.ndarray:
    errors = errors.reshape(errors.shape[0], -1)
    return 0.5 * np.einsum('ki,ij,kj->k', errors, M, errors)


def lyapunov_series(
    log: TrajectoryLog,
    kind: LyapunovKind,
    Q: Optional[np.ndarray] = None,
    L: Optional[np.ndarray] = None,
    H: Optional[np.ndarray] = None,
    p: Optional[np.ndarray] = None,
    c1: Optional[float] = None,
    c2: Optional[float] = None,
) -> np.ndarray:
    """
    Sample a Lyapunov candidate along a logged trajectory.

    V1 needs channel s; V2 needs z1. V3/V4 need Q and beta_err/alpha_err;
    V5 needs H, p, c1, c2 and beta_err; V6/V7 need L and beta/alpha.

    Raises:
        ValueError: If a channel or matrix the kind needs is missing
    """
    kind = LyapunovKind(kind)

    def need(name, value):
        if value is None:
            raise ValueError(f"{kind.value} needs {name}")
        return np.asarray(value, dtype=float)

    if kind == LyapunovKind.V1:
        s = log.channel("s")
        return 0.5 * (s.reshape(s.shape[0], -1) ** 2).sum(axis=1)
    if kind == LyapunovKind.V2:
        return 0.5 * log.channel("z1").reshape(-1) ** 2
    if kind == LyapunovKind.V3:
        return _quadratic(log.channel("beta_err"), need("Q", Q))
    if kind == LyapunovKind.V4:
        return _quadratic(log.channel("alpha_err"), need("Q", Q))
    if kind == LyapunovKind.V5:
        H, p = need("H", H), need("p", p)
        c1, c2 = float(need("c1", c1)), float(need("c2", c2))
        z = log.channel("beta_err") @ H.T
        return (p * (c1 * z ** 2 + c2 * np.abs(z))).sum(axis=1)
    if kind == LyapunovKind.V6:
        return _quadratic(log.channel("beta"), need("L", L))
    return _quadratic(log.channel("alpha"), need("L", L))


def max_increase(series: np.ndarray) -> float:
    """Largest rise between consecutive samples (0 for a nonincreasing series)."""
    series = np.asarray(series, dtype=float)
    if series.size < 2:
        return 0.0
    return float(max(0.0, np.diff(series).max()))


def is_nonincreasing(series: np.ndarray, tol: float = 0.0) -> bool:
    return max_increase(series) <= tol
