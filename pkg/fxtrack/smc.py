"""
Fixed-time nonsingular sliding-mode control of a double integrator.

Surface s = (h1/2 + 1) z1 + z2. The control cancels the surface dynamics
so that s' = -(h1/2) s - rho*sgn(s) + disturbance; h1 forces arrival by the
end of stage 1 and the sliding motion reaches the origin by the end of stage 2.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .generator import StagedGain, staged_gain, staged_gain_dot

logger = logging.getLogger(__name__)


def switching(s, boundary_layer: Optional[float] = None):
    """sgn(s) with sgn(0) = 0, or sat(s / eps) when a boundary layer is set."""
    if boundary_layer:
        return np.clip(np.asarray(s) / boundary_layer, -1.0, 1.0)
    return np.sign(s)


def sliding_control(
    h: float,
    h_dot: float,
    rho: float,
    e1,
    e2,
    boundary_layer: Optional[float] = None,
) -> Tuple:
    """
    Surface value and control for error coordinates (e1, e2).

    Works elementwise, so the composed network controllers reuse it.

    Returns:
        Tuple of (s, u)
    """
    scale = 0.5 * h + 1.0
    s = scale * e1 + e2
    u = -0.5 * h_dot * e1 - scale * e2 - 0.5 * h * s - rho * switching(s, boundary_layer)
    return s, u


@dataclass(frozen=True)
class PlantState:
    """(z1, z2), or (z1', z2') from closed_loop_rhs. Finiteness is checked by the integrator."""
    z1: float
    z2: float


@dataclass(frozen=True)
class SmcController:
    """Staged gain h1 plus switching gain rho."""
    schedule: StagedGain
    rho: float
    boundary_layer: Optional[float] = None

    @property
    def deadline(self) -> float:
        """T_a = t_a1 + t_a2."""
        return self.schedule.total

    def check_rho(self, disturbance_bound: float) -> bool:
        """Warn (do not fail) when rho < |disturbance bound| + 1."""
        required = abs(disturbance_bound) + 1.0
        if self.rho < required:
            logger.warning(
                "Switching gain rho=%g is below |disturbance bound| + 1 = %g; "
                "fixed-time reaching is not guaranteed", self.rho, required
            )
            return False
        return True


def surface(c: SmcController, s: PlantState, t: float) -> float:
    return (0.5 * staged_gain(c.schedule, t) + 1.0) * s.z1 + s.z2


def control(c: SmcController, s: PlantState, t: float) -> float:
    h = staged_gain(c.schedule, t)
    h_dot = staged_gain_dot(c.schedule, t)
    _, u = sliding_control(h, h_dot, c.rho, s.z1, s.z2, c.boundary_layer)
    return float(u)


def closed_loop_rhs(
    c: SmcController,
    s: PlantState,
    t: float,
    disturbance: Callable[[float], float],
) -> PlantState:
    """(z1', z2') = (z2, u + disturbance(t))."""
    return PlantState(s.z2, control(c, s, t) + disturbance(t))
