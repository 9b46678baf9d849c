"""
Validation results and error types.

Report-only checks (graph assumptions, gain inequalities) return result
objects; hard input problems raise ValueError subclasses.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional


class AssumptionError(ValueError):
    """A graph assumption required by an operation does not hold."""


class DimensionError(ValueError):
    """Vector or matrix sizes do not match the topology."""


class ScenarioFileError(ValueError):
    """Scenario file could not be parsed or does not follow the schema."""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        location = ''
        if path:
            location = f"{path}:"
        if line is not None:
            location = f"{location}{line}:"
        super().__init__(f"{location} {message}".strip() if location else message)


class SimulationDivergedError(RuntimeError):
    """The integrated state became non-finite."""

    def __init__(self, t: float, component: int):
        self.t = t
        self.component = component
        super().__init__(f"Non-finite state at t={t:.6g} in component {component}")


@dataclass
class CheckEntry:
    """One named condition with its verdict."""
    name: str
    passed: bool
    reason: str = ""
    value: Optional[float] = None
    threshold: Optional[float] = None
    strict: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "reason": self.reason,
            "value": self.value,
            "threshold": self.threshold,
            "strict": self.strict,
        }

    def describe(self) -> str:
        """Single report line for this entry."""
        status = "PASS" if self.passed else "FAIL"
        if self.threshold is None:
            detail = self.reason
        else:
            relation = ">" if self.strict else ">="
            detail = f"{self.value:.6g} {relation} {self.threshold:.6g}"
            if self.reason:
                detail = f"{detail} ({self.reason})"
        return f"[{status}] {self.name}: {detail}"


class CheckReport:
    """Collection of checks; valid only when every entry passes."""

    def __init__(self, title: str):
        self.title = title
        self.is_valid = True
        self.entries: List[CheckEntry] = []

    def add(self, entry: CheckEntry) -> CheckEntry:
        if not entry.passed:
            self.is_valid = False
        self.entries.append(entry)
        return entry

    def failures(self) -> List[CheckEntry]:
        return [e for e in self.entries if not e.passed]

    def reasons(self) -> List[str]:
        """Human-readable reasons of the failed entries."""
        return [f"{e.name}: {e.reason}" if e.reason else e.describe() for e in self.failures()]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "title": self.title,
            "isValid": self.is_valid,
            "entries": [e.to_dict() for e in self.entries],
        }

    def lines(self) -> List[str]:
        return [self.title] + [f"  {e.describe()}" for e in self.entries]


class AssumptionReport(CheckReport):
    """Graph assumption verdicts for one observer mode."""

    def __init__(self, mode: str):
        super().__init__(f"Assumptions ({mode})")
        self.mode = mode


class GainReport(CheckReport):
    """Gain inequality verdicts plus the minimal admissible gains."""

    def __init__(self, mode: str):
        super().__init__(f"Gain conditions ({mode})")
        self.mode = mode
        self.minimal_gains: Dict[str, float] = {}
        self.spectral: Dict[str, Any] = {}

    def to_dict(self) -> Dict[str, Any]:
        result = super().to_dict()
        result["minimalGains"] = dict(self.minimal_gains)
        result["spectral"] = dict(self.spectral)
        return result

    def lines(self) -> List[str]:
        out = super().lines()
        if self.minimal_gains:
            mins = ", ".join(f"{k}={v:.6g}" for k, v in self.minimal_gains.items())
            out.append(f"  minimal admissible gains: {mins}")
        return out


@dataclass
class ModeBounds:
    """Declared signal bounds used by the gain conditions."""
    u_max: float = 0.0
    d_max: float = 0.0
    a_max: float = 0.0
    d_bar: Optional[float] = None  # override for the directed-mode disturbance term
