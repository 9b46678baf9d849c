"""
Time-based generators and the gains built from them.

A generator xi(t) rises smoothly from 0 to 1 over a prescribed duration t_s
with vanishing derivative at both ends. The gain h(t) = k*xi'/(1 - xi + delta)
makes z' = -h(t) z shrink z by (delta/(1+delta))^k by t_s, whatever z(0) is.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np


def _check_time(t: float) -> None:
    if t < 0:
        raise ValueError(f"Time must be nonnegative, got {t}")


@dataclass(frozen=True)
class TimeBasedGenerator(ABC):
    """Nondecreasing profile with xi(0)=0, xi(t)=1 for t >= t_s."""
    t_s: float

    def __post_init__(self):
        if not self.t_s > 0:
            raise ValueError(f"Generator duration must be positive, got {self.t_s}")

    @abstractmethod
    def value(self, t: float) -> float:
        """xi(t)"""

    @abstractmethod
    def rate(self, t: float) -> float:
        """d xi / dt"""

    @abstractmethod
    def curvature(self, t: float) -> float:
        """d^2 xi / dt^2"""


@dataclass(frozen=True)
class PolynomialGenerator(TimeBasedGenerator):
    """xi = 10(t/t_s)^6 - 24(t/t_s)^5 + 15(t/t_s)^4 on [0, t_s]."""

    def value(self, t: float) -> float:
        if t >= self.t_s:
            return 1.0
        r = t / self.t_s
        return r ** 4 * (15.0 - 24.0 * r + 10.0 * r * r)

    def rate(self, t: float) -> float:
        if t >= self.t_s:
            return 0.0
        ts = self.t_s
        return 60.0 * t ** 3 * (t - ts) ** 2 / ts ** 6

    def curvature(self, t: float) -> float:
        if t >= self.t_s:
            return 0.0
        ts = self.t_s
        # d/dt [60 t^3 (t - ts)^2] = 60 t^2 (t - ts)(5t - 3ts)
        return 60.0 * t ** 2 * (t - ts) * (5.0 * t - 3.0 * ts) / ts ** 6


@dataclass(frozen=True)
class GainParams:
    """Exponent k and regularizer delta of h(t)."""
    k: float = 2.0
    delta: float = 0.01

    def __post_init__(self):
        if not self.k > 1:
            raise ValueError(f"Gain exponent k must exceed 1, got {self.k}")
        if not 0 < self.delta < 1:
            raise ValueError(f"Regularizer delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class Stage:
    generator: TimeBasedGenerator
    params: GainParams

    @property
    def duration(self) -> float:
        return self.generator.t_s


@dataclass(frozen=True)
class StagedGain:
    """Two generators used back to back; zero after both stages."""
    stage1: Stage
    stage2: Stage

    @classmethod
    def polynomial(
        cls,
        t1: float,
        t2: float,
        params1: GainParams = GainParams(),
        params2: Optional[GainParams] = None,
    ) -> 'StagedGain':
        """Schedule from two polynomial generators; stage 2 reuses params1 unless given."""
        return cls(
            Stage(PolynomialGenerator(t1), params1),
            Stage(PolynomialGenerator(t2), params2 or params1),
        )

    @property
    def t1(self) -> float:
        return self.stage1.duration

    @property
    def t2(self) -> float:
        return self.stage2.duration

    @property
    def total(self) -> float:
        return self.t1 + self.t2

    def peak(self, samples: int = 4001) -> float:
        """Largest sampled gain over both stages."""
        grid = np.linspace(0.0, self.total, samples)
        return max(staged_gain(self, float(t)) for t in grid)


def xi(g: TimeBasedGenerator, t: float) -> float:
    _check_time(t)
    return g.value(t)


def xi_dot(g: TimeBasedGenerator, t: float) -> float:
    _check_time(t)
    return g.rate(t)


def xi_ddot(g: TimeBasedGenerator, t: float) -> float:
    _check_time(t)
    return g.curvature(t)


def gain(g: TimeBasedGenerator, p: GainParams, t: float) -> float:
    """h(t) = k xi'(t) / (1 - xi(t) + delta); the denominator never drops below delta."""
    _check_time(t)
    return p.k * g.rate(t) / (1.0 - g.value(t) + p.delta)


def gain_dot(g: TimeBasedGenerator, p: GainParams, t: float) -> float:
    """Quotient-rule derivative k[xi''(1 - xi + delta) + xi'^2] / (1 - xi + delta)^2."""
    _check_time(t)
    denom = 1.0 - g.value(t) + p.delta
    rate = g.rate(t)
    return p.k * (g.curvature(t) * denom + rate * rate) / (denom * denom)


def staged_gain(sg: StagedGain, t: float) -> float:
    """
    Piecewise gain: stage 1 on [0, t1), stage 2 on [t1, t1 + t2), zero afterwards.

    Stage 2 runs on the shifted generator xi_hat = xi_2(t - t1) + 1 so the
    profile does not jump from 1 back to 0 at the joint; k xi_2'/(2 - xi_hat + delta)
    is the same number as the restarted-clock gain.
    """
    _check_time(t)
    if t < sg.t1:
        return gain(sg.stage1.generator, sg.stage1.params, t)
    tau = t - sg.t1
    if tau < sg.t2:
        g, p = sg.stage2.generator, sg.stage2.params
        xi_hat = g.value(tau) + 1.0
        return p.k * g.rate(tau) / (2.0 - xi_hat + p.delta)
    return 0.0


def staged_gain_dot(sg: StagedGain, t: float) -> float:
    """Exact time derivative of staged_gain."""
    _check_time(t)
    if t < sg.t1:
        return gain_dot(sg.stage1.generator, sg.stage1.params, t)
    tau = t - sg.t1
    if tau < sg.t2:
        return gain_dot(sg.stage2.generator, sg.stage2.params, tau)
    return 0.0


def decay_residual_factor(p: GainParams) -> float:
    """(delta/(1+delta))^k: what remains of z(0) at t_s under z' = -h(t) z."""
    return (p.delta / (1.0 + p.delta)) ** p.k
