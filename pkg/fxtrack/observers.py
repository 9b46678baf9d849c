"""
Distributed fixed-time observers.

Consensus tracking (undirected and directed graphs): agent i estimates its
disagreement with the leader, alpha_i ~ x_i - x0 and beta_i ~ v_i - v0, from
neighbor exchanges only. Average tracking: alpha_i, beta_i estimate the mean
reference position and velocity of the whole network.

All right-hand sides are evaluated synchronously for the whole network and
return the derivative as an ObserverState.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .generator import StagedGain, staged_gain
from .topology import Topology, TrackingMode, spectral_data
from .validation import AssumptionError, CheckEntry, DimensionError, GainReport, ModeBounds

logger = logging.getLogger(__name__)

SUM_TOL = 1e-9


@dataclass(frozen=True)
class ObserverGains:
    """b1, b2 act on the alpha channel, c1, c2 on beta; schedule is h2."""
    b1: float
    b2: float
    c1: float
    c2: float
    schedule: StagedGain

    @property
    def deadline(self) -> float:
        """T_b = t_b1 + t_b2."""
        return self.schedule.total


@dataclass(frozen=True, eq=False)
class ObserverState:
    """Estimates (alpha, beta), or their rates when returned by an observer rhs."""
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float).reshape(-1)
        beta = np.array(self.beta, dtype=float).reshape(-1)
        if alpha.shape != beta.shape:
            raise DimensionError(f"alpha has {alpha.size} entries but beta has {beta.size}")
        object.__setattr__(self, 'alpha', alpha)
        object.__setattr__(self, 'beta', beta)

    @property
    def n(self) -> int:
        return self.alpha.size

    @classmethod
    def zeros(cls, n: int) -> 'ObserverState':
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def for_average_tracking(
        cls,
        r0,
        f0,
        alpha: Optional[np.ndarray] = None,
        beta: Optional[np.ndarray] = None,
    ) -> 'ObserverState':
        """
        Initial average-tracking state.

        Defaults to alpha(0) = r(0), beta(0) = f(0). Explicit values must keep
        sum(alpha) = sum(r) and sum(beta) = sum(f), otherwise the estimates
        settle on the wrong average.

        Raises:
            ValueError: If a sum constraint is violated
        """
        r0 = np.asarray(r0, dtype=float)
        f0 = np.asarray(f0, dtype=float)
        alpha = r0.copy() if alpha is None else np.asarray(alpha, dtype=float)
        beta = f0.copy() if beta is None else np.asarray(beta, dtype=float)
        for name, est, ref in (("alpha", alpha, r0), ("beta", beta, f0)):
            if est.shape != ref.shape:
                raise DimensionError(f"{name} has {est.size} entries, expected {ref.size}")
            gap = abs(est.sum() - ref.sum())
            if gap > SUM_TOL * max(1.0, float(np.abs(ref).sum())):
                raise ValueError(
                    f"Average tracking needs sum({name}(0)) equal to the reference sum; off by {gap:.3g}"
                )
        return cls(alpha, beta)


def _as_vector(name: str, value, n: int) -> np.ndarray:
    vec = np.asarray(value, dtype=float).reshape(-1)
    if vec.size != n:
        raise DimensionError(f"{name} has {vec.size} entries, topology has {n} followers")
    return vec


def _check_state(topo: Topology, obs: ObserverState) -> None:
    if obs.n != topo.n:
        raise DimensionError(f"Observer state has {obs.n} agents, topology has {topo.n}")


def _leader_disagreement(topo: Topology, est: np.ndarray, meas: np.ndarray, leader: float) -> np.ndarray:
    """
    sum_j a_ij [(est_i - est_j) - (meas_i - meas_j)] over j = 0..n.

    The leader's virtual estimate is fixed at zero, so its term is
    a_i0 (est_i - meas_i + leader).
    """
    gap = est - meas
    return topo.L @ gap + topo.leader_links * (gap + leader)


def undirected_ct_rhs(
    topo: Topology,
    gains: ObserverGains,
    obs: ObserverState,
    x,
    v,
    x0: float,
    v0: float,
    u,
    t: float,
) -> ObserverState:
    """Consensus-tracking observer over an undirected graph with a leader."""
    _check_state(topo, obs)
    x, v, u = (_as_vector(k, val, topo.n) for k, val in (("x", x), ("v", v), ("u", u)))
    h2 = staged_gain(gains.schedule, t)
    e_alpha = _leader_disagreement(topo, obs.alpha, x, x0)
    e_beta = _leader_disagreement(topo, obs.beta, v, v0)
    return ObserverState(
        obs.beta - gains.b1 * h2 * e_alpha - gains.b2 * np.sign(e_alpha),
        u - gains.c1 * h2 * e_beta - gains.c2 * np.sign(e_beta),
    )


def directed_ct_rhs(
    topo: Topology,
    gains: ObserverGains,
    obs: ObserverState,
    x,
    v,
    x0: float,
    v0: float,
    u,
    t: float,
) -> ObserverState:
    """Consensus-tracking observer over a leader-rooted digraph; gains scale with h2 + 2."""
    _check_state(topo, obs)
    x, v, u = (_as_vector(k, val, topo.n) for k, val in (("x", x), ("v", v), ("u", u)))
    factor = staged_gain(gains.schedule, t) + 2.0
    e_alpha = _leader_disagreement(topo, obs.alpha, x, x0)
    e_beta = _leader_disagreement(topo, obs.beta, v, v0)
    return ObserverState(
        obs.beta - 2.0 * gains.b1 * factor * e_alpha - gains.b2 * factor * np.sign(e_alpha),
        u - 2.0 * gains.c1 * factor * e_beta - gains.c2 * factor * np.sign(e_beta),
    )


def sign_coupling(topo: Topology, values: np.ndarray) -> np.ndarray:
    """sum_j a_ij sgn(values_i - values_j); sums to zero over an undirected graph."""
    return (topo.adjacency * np.sign(values[:, None] - values[None, :])).sum(axis=1)


def dat_rhs(topo: Topology, gains: ObserverGains, obs: ObserverState, a_ref, t: float) -> ObserverState:
    """
    Average-tracking observer.

    Raises:
        AssumptionError: If the topology has leader links
    """
    if topo.has_leader:
        raise AssumptionError("Average tracking does not use leader links")
    _check_state(topo, obs)
    a_ref = _as_vector("a_ref", a_ref, topo.n)
    h2 = staged_gain(gains.schedule, t)
    L = topo.L
    return ObserverState(
        -gains.b1 * h2 * (L @ obs.alpha) - gains.b2 * sign_coupling(topo, obs.alpha) + obs.beta,
        -gains.c1 * h2 * (L @ obs.beta) - gains.c2 * sign_coupling(topo, obs.beta) + a_ref,
    )


def directed_disturbance_term(topo: Topology, bounds: ModeBounds) -> float:
    """d_bar: declared override, else max row degree x 2 x d_max."""
    if bounds.d_bar is not None:
        return float(bounds.d_bar)
    return float(topo.degrees.max(initial=0.0)) * 2.0 * bounds.d_max


def _add_threshold(
    report: GainReport,
    name: str,
    value: float,
    threshold: float,
    strict: bool = False,
    minimal_key: Optional[str] = None,
) -> None:
    passed = value > threshold if strict else value >= threshold
    report.add(CheckEntry(name, bool(passed), value=float(value), threshold=float(threshold), strict=strict))
    if minimal_key:
        minimal = float(np.nextafter(threshold, np.inf)) if strict else float(threshold)
        report.minimal_gains[minimal_key] = minimal


def validate_gains(
    topo: Topology,
    gains: ObserverGains,
    mode: TrackingMode,
    bounds: ModeBounds,
) -> GainReport:
    """
    Check the observer gain inequalities of a mode.

    Args:
        topo: Communication topology
        gains: Observer gains under test
        mode: undirected_ct, directed_ct or dat
        bounds: Declared u_max, d_max, a_max (and optional d_bar)

    Returns:
        GainReport with per-inequality verdicts, thresholds, minimal gains
        and the spectral quantities they were computed from
    """
    mode = TrackingMode(mode)
    report = GainReport(mode.value)
    if mode == TrackingMode.SMC:
        raise ValueError("The smc mode has no observer gains")

    try:
        spectral = spectral_data(topo, mode)
    except AssumptionError as e:
        report.add(CheckEntry("spectral data", False, str(e)))
        return report
    report.spectral = spectral.to_dict()

    positive = all(g > 0 for g in (gains.b1, gains.b2, gains.c1, gains.c2))
    report.add(CheckEntry("positive gains", positive, "" if positive else "b1, b2, c1, c2 must all be positive"))

    if mode == TrackingMode.UNDIRECTED_CT:
        lam = spectral.lambda1_Q
        thr = 1.0 / (2.0 * lam)
        _add_threshold(report, "b1 >= 1/(2 lambda1(Q))", gains.b1, thr, minimal_key="b1")
        _add_threshold(report, "c1 >= 1/(2 lambda1(Q))", gains.c1, thr, minimal_key="c1")
        _add_threshold(report, "b2 >= 1", gains.b2, 1.0, minimal_key="b2")
        _add_threshold(report, "c2 > u_max + d_max", gains.c2, bounds.u_max + bounds.d_max,
                       strict=True, minimal_key="c2")
    elif mode == TrackingMode.DIRECTED_CT:
        lam, p_max = spectral.lambda1_Q, spectral.p_max
        d_bar = directed_disturbance_term(topo, bounds)
        report.spectral["d_bar"] = d_bar
        _add_threshold(report, "b1 >= p_max/(4 lambda1(Q))", gains.b1, p_max / (4.0 * lam), minimal_key="b1")
        _add_threshold(report, "c1 >= p_max/(4 lambda1(Q))", gains.c1, p_max / (4.0 * lam), minimal_key="c1")
        _add_threshold(report, "b2 >= p_max/lambda1(Q)", gains.b2, p_max / lam, minimal_key="b2")
        _add_threshold(report, "c2 >= p_max (d_bar + u_max)/lambda1(Q)", gains.c2,
                       p_max * (d_bar + bounds.u_max) / lam, minimal_key="c2")
    else:
        lam2 = spectral.lambda2_L
        thr = 1.0 / (2.0 * lam2)
        _add_threshold(report, "b1 >= 1/(2 lambda2(L))", gains.b1, thr, minimal_key="b1")
        _add_threshold(report, "c1 >= 1/(2 lambda2(L))", gains.c1, thr, minimal_key="c1")
        _add_threshold(report, "b2 >= 1", gains.b2, 1.0, minimal_key="b2")
        _add_threshold(report, "c2 > 2 a_max", gains.c2, 2.0 * bounds.a_max, strict=True, minimal_key="c2")

    if not report.is_valid:
        logger.info("Gain check failed for %s: %s", mode.value, "; ".join(report.reasons()))
    return report


def observer_error(
    obs: ObserverState,
    mode: TrackingMode,
    x=None,
    v=None,
    x0: float = 0.0,
    v0: float = 0.0,
    r_bar: Optional[float] = None,
    f_bar: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Estimation errors against ground truth.

    Consensus tracking: (alpha - (x - x0), beta - (v - v0)).
    Average tracking: (alpha - r_bar, beta - f_bar).
    """
    mode = TrackingMode(mode)
    if mode == TrackingMode.DAT:
        if r_bar is None or f_bar is None:
            raise ValueError("Average tracking errors need r_bar and f_bar")
        return obs.alpha - r_bar, obs.beta - f_bar
    if mode == TrackingMode.SMC:
        raise ValueError("The smc mode has no observer")
    x = _as_vector("x", x, obs.n)
    v = _as_vector("v", v, obs.n)
    return obs.alpha - (x - x0), obs.beta - (v - v0)
