"""
Bounded scalar signals: a constant plus a sum of sinusoids.

Used for the leader input u0, follower disturbances d_i, reference
accelerations a_i^r and the single-plant disturbance.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Sinusoid:
    amplitude: float
    frequency: float = 1.0  # rad/s
    phase: float = 0.0

    def to_dict(self) -> Dict[str, float]:
        return {"amplitude": float(self.amplitude), "frequency": float(self.frequency), "phase": float(self.phase)}


@dataclass(frozen=True)
class Signal:
    """c + sum A_k sin(w_k t + phi_k)."""
    constant: float = 0.0
    sines: tuple = field(default_factory=tuple)

    def __call__(self, t: float) -> float:
        value = self.constant
        for s in self.sines:
            value += s.amplitude * math.sin(s.frequency * t + s.phase)
        return value

    @classmethod
    def sine(cls, constant: float, amplitude: float, frequency: float = 1.0, phase: float = 0.0) -> 'Signal':
        return cls(constant, (Sinusoid(amplitude, frequency, phase),))

    @property
    def envelope(self) -> float:
        """|c| + sum |A_k|, an upper bound on |signal(t)|."""
        return abs(self.constant) + sum(abs(s.amplitude) for s in self.sines)

    def peak(self, horizon: float, samples: int = 10001) -> float:
        """Largest sampled |signal(t)| on [0, horizon]."""
        grid = np.linspace(0.0, horizon, samples)
        values = np.full_like(grid, self.constant)
        for s in self.sines:
            values += s.amplitude * np.sin(s.frequency * grid + s.phase)
        return float(np.max(np.abs(values)))

    def to_dict(self) -> Dict[str, Any]:
        return {"constant": float(self.constant), "sines": [s.to_dict() for s in self.sines]}

    @classmethod
    def from_dict(cls, data: Any) -> 'Signal':
        """Accept a bare number or {constant, sines: [{amplitude, frequency, phase}]}."""
        if isinstance(data, (int, float)):
            return cls(float(data))
        if not isinstance(data, dict):
            raise ValueError(f"Signal must be a number or a mapping, got {type(data).__name__}")
        unknown = set(data) - {"constant", "sines"}
        if unknown:
            raise ValueError(f"Unknown signal fields: {', '.join(sorted(unknown))}")
        sines = []
        for item in data.get("sines", []) or []:
            if not isinstance(item, dict) or "amplitude" not in item:
                raise ValueError("Each sine needs at least an amplitude")
            sines.append(Sinusoid(
                float(item["amplitude"]),
                float(item.get("frequency", 1.0)),
                float(item.get("phase", 0.0)),
            ))
        return cls(float(data.get("constant", 0.0)), tuple(sines))


ZERO = Signal()


def bank_value(signals: Sequence[Signal], t: float) -> np.ndarray:
    return np.array([s(t) for s in signals])


def check_bound(name: str, signals: Sequence[Signal], bound: float, horizon: float) -> List[str]:
    """
    Compare declared bound against sampled signal peaks.

    Returns:
        List of problems (empty when the bound holds)
    """
    problems = []
    for i, s in enumerate(signals):
        peak = s.peak(horizon)
        if peak > bound + 1e-12:
            label = name if len(signals) == 1 else f"{name}[{i + 1}]"
            problems.append(f"|{label}(t)| reaches {peak:.6g} > declared bound {bound:.6g}")
    for problem in problems:
        logger.warning(problem)
    return problems
