"""
Scenario assembly, validation and evaluation.

A Scenario bundles everything one run needs. run_scenario() integrates the
coupled plant/observer/controller system and evaluates it against the
tracking deadline, the observer deadlines and the Lyapunov diagnostics.

State layouts:
    smc            [z1, z2]
    consensus      [x0, v0, x(n), v(n), alpha(n), beta(n)]
    average        [r(n), f(n), x(n), v(n), alpha(n), beta(n)]
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .engine import (
    GRID_TOL,
    LyapunovKind,
    SimConfig,
    TrajectoryLog,
    finite_time_bound,
    integrate,
    lyapunov_series,
    max_increase,
    settling_time,
)
from .generator import StagedGain, decay_residual_factor, staged_gain
from .observers import (
    ObserverGains,
    ObserverState,
    dat_rhs,
    directed_ct_rhs,
    directed_disturbance_term,
    observer_error,
    undirected_ct_rhs,
    validate_gains,
)
from .scenarios import (
    FollowerSpec,
    LeaderSpec,
    PlantSpec,
    ReferenceSpec,
    TrackingController,
    averages,
    check_rho,
    ct_controls,
    dat_controls,
    follower_rhs,
    leader_rhs,
    reference_rhs,
    tracking_metric,
)
from .signals import check_bound
from .smc import PlantState, SmcController, closed_loop_rhs, control, surface
from .topology import SpectralData, Topology, TrackingMode, check_assumptions, eigenvalues, spectral_data
from .validation import (
    AssumptionError,
    AssumptionReport,
    CheckEntry,
    DimensionError,
    GainReport,
    ModeBounds,
)

logger = logging.getLogger(__name__)

# Chattering bands are per-step estimates; sampled increments may span a few.
CHATTER_FACTOR = 4.0


@dataclass(frozen=True)
class Tolerances:
    """Convergence thresholds: max(floor, factor * rho * dt)."""
    smc_floor: float = 1e-2
    smc_factor: float = 10.0
    network_floor: float = 5e-2
    network_factor: float = 20.0

    def for_mode(self, mode: TrackingMode, rho: float, dt: float) -> float:
        if TrackingMode(mode) == TrackingMode.SMC:
            return max(self.smc_floor, self.smc_factor * rho * dt)
        return max(self.network_floor, self.network_factor * rho * dt)


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    Complete description of one run.

    schedule is the controller gain h1; observer.schedule is h2. t_c defaults
    to the observer deadline T_b.
    """
    name: str
    mode: TrackingMode
    rho: float
    schedule: StagedGain
    sim: SimConfig
    plant: Optional[PlantSpec] = None
    topology: Optional[Topology] = None
    observer: Optional[ObserverGains] = None
    t_c: Optional[float] = None
    leader: Optional[LeaderSpec] = None
    followers: Optional[FollowerSpec] = None
    references: Optional[ReferenceSpec] = None
    initial_observer: Optional[ObserverState] = None
    d_bar: Optional[float] = None
    boundary_layer: Optional[float] = None
    description: str = ""

    def __post_init__(self):
        mode = TrackingMode(self.mode)
        object.__setattr__(self, 'mode', mode)
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.boundary_layer is not None and not self.boundary_layer > 0:
            raise ValueError(f"boundary_layer must be positive, got {self.boundary_layer}")
        if mode == TrackingMode.SMC:
            if self.plant is None:
                raise ValueError("smc scenarios need a plant")
            self.sim.check_events(t_a1=self.schedule.t1, t_a2=self.schedule.t2)
        else:
            self._check_network(mode)
        if self.sim.horizon + GRID_TOL < self.deadline:
            raise ValueError(
                f"Horizon {self.sim.horizon:g} s ends before the deadline {self.deadline:g} s"
            )

    def _check_network(self, mode: TrackingMode) -> None:
        if self.topology is None or self.observer is None or self.followers is None:
            raise ValueError(f"{mode.value} scenarios need a topology, observer gains and followers")
        n = self.topology.n
        if self.followers.n != n:
            raise DimensionError(f"{self.followers.n} followers configured, topology has {n}")
        if mode == TrackingMode.DAT:
            if self.references is None:
                raise ValueError("dat scenarios need references")
            if self.references.n != n:
                raise DimensionError(f"{self.references.n} references configured, topology has {n}")
        elif self.leader is None:
            raise ValueError(f"{mode.value} scenarios need a leader")
        if self.initial_observer is not None and self.initial_observer.n != n:
            raise DimensionError(f"Initial observer state has {self.initial_observer.n} agents, topology has {n}")
        if self.t_c is None:
            object.__setattr__(self, 't_c', self.observer.deadline)
        if self.t_c + GRID_TOL < self.observer.deadline:
            raise ValueError(f"T_c={self.t_c:g} must not precede the observer deadline T_b={self.observer.deadline:g}")
        self.sim.check_events(
            t_a1=self.schedule.t1, t_a2=self.schedule.t2,
            t_b1=self.observer.schedule.t1, t_b2=self.observer.schedule.t2, t_c=self.t_c,
        )

    @property
    def is_network(self) -> bool:
        return self.mode != TrackingMode.SMC

    @property
    def n(self) -> int:
        return 1 if not self.is_network else self.topology.n

    @property
    def deadline(self) -> float:
        """T_a for smc, T_c + T_a otherwise."""
        if not self.is_network:
            return self.schedule.total
        return self.t_c + self.schedule.total

    @property
    def controller(self) -> TrackingController:
        return TrackingController(self.schedule, self.rho, self.t_c, self.boundary_layer)

    @property
    def bounds(self) -> ModeBounds:
        return ModeBounds(
            u_max=self.leader.u_max if self.leader else 0.0,
            d_max=self.followers.d_max if self.followers else 0.0,
            a_max=self.references.a_max if self.references else 0.0,
            d_bar=self.d_bar,
        )

    def with_overrides(self, dt: Optional[float] = None, seed: Optional[int] = None) -> 'Scenario':
        """Copy with a different step and/or seed; random follower states are redrawn."""
        sim = self.sim if dt is None else replace(self.sim, dt=dt)
        if seed is None:
            return replace(self, sim=sim)
        followers = self.followers.reseeded(seed) if self.followers else None
        return replace(self, sim=replace(sim, seed=seed), followers=followers)


@dataclass
class Validation:
    assumptions: Optional[AssumptionReport]
    gains: GainReport

    @property
    def is_valid(self) -> bool:
        return self.gains.is_valid and (self.assumptions is None or self.assumptions.is_valid)

    def reasons(self) -> List[str]:
        reasons = list(self.assumptions.reasons()) if self.assumptions else []
        return reasons + self.gains.reasons()


def _bound_entry(name: str, signals, bound: float, horizon: float) -> CheckEntry:
    problems = check_bound(name, list(signals), bound, horizon)
    return CheckEntry(f"|{name}| <= declared bound", not problems, "; ".join(problems))


def validate_scenario(scenario: Scenario) -> Validation:
    """Graph assumptions, gain inequalities, switching gain and declared signal bounds."""
    mode, horizon = scenario.mode, scenario.sim.horizon
    if mode == TrackingMode.SMC:
        plant = scenario.plant
        report = GainReport(mode.value)
        report.add(check_rho(scenario.rho, mode, plant.disturbance_bound))
        report.add(_bound_entry("disturbance", [plant.disturbance], plant.disturbance_bound, horizon))
        return Validation(None, report)

    bounds = scenario.bounds
    assumptions = check_assumptions(scenario.topology, mode)
    report = validate_gains(scenario.topology, scenario.observer, mode, bounds)
    report.add(check_rho(scenario.rho, mode, bounds.d_max, bounds.u_max, bounds.a_max))
    report.minimal_gains["rho"] = report.entries[-1].threshold
    if scenario.leader is not None and mode != TrackingMode.DAT:
        report.add(_bound_entry("u0", [scenario.leader.u0], bounds.u_max, horizon))
    report.add(_bound_entry("d", scenario.followers.disturbances, bounds.d_max, horizon))
    if mode == TrackingMode.DAT:
        report.add(_bound_entry("a_r", scenario.references.accelerations, bounds.a_max, horizon))
    return Validation(assumptions, report)


@dataclass
class LyapunovCheck:
    """Sampled monotonicity of one Lyapunov candidate over its active window."""
    kind: LyapunovKind
    start: float
    max_increase: float
    tolerance: float
    on_radius: bool  # checked on sqrt(2V) rather than V

    @property
    def passed(self) -> bool:
        return self.max_increase <= self.tolerance

    def describe(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        quantity = f"sqrt(2 {self.kind.value})" if self.on_radius else self.kind.value
        return (f"[{status}] {quantity} nonincreasing from t={self.start:g}: "
                f"max rise {self.max_increase:.3g} <= {self.tolerance:.3g}")


@dataclass
class ObserverSummary:
    beta_error_at_tb1: float
    alpha_error_at_tb: float
    tolerance: float

    @property
    def converged(self) -> bool:
        return self.beta_error_at_tb1 <= self.tolerance and self.alpha_error_at_tb <= self.tolerance


@dataclass
class ArrivalDiagnostic:
    """Sliding-surface arrival for the single plant."""
    surface_at_ta1: float
    predicted_bound: float
    reaching_bound: Optional[float]  # extra time to reach s = 0 after t_a1

    @property
    def within_bound(self) -> bool:
        return self.surface_at_ta1 <= self.predicted_bound


@dataclass
class ConvergenceSummary:
    tolerance: float
    deadline: float
    metric_at_deadline: float
    worst_after_deadline: float
    settling_time: Optional[float]
    crossing_time: Optional[float]

    @property
    def converged(self) -> bool:
        return self.worst_after_deadline <= self.tolerance


@dataclass
class SimulationResult:
    scenario: Scenario
    log: TrajectoryLog
    validation: Validation
    convergence: ConvergenceSummary
    lyapunov: List[LyapunovCheck] = field(default_factory=list)
    observer: Optional[ObserverSummary] = None
    arrival: Optional[ArrivalDiagnostic] = None
    conservation: Optional[Dict[str, float]] = None
    notes: List[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.convergence.converged

    def lyapunov_check(self, kind: LyapunovKind) -> LyapunovCheck:
        for check in self.lyapunov:
            if check.kind == LyapunovKind(kind):
                return check
        raise KeyError(f"No {LyapunovKind(kind).value} check in this result")


System = Tuple[Callable[[float, np.ndarray], np.ndarray], np.ndarray, Callable[[float, np.ndarray], Dict]]


def _smc_system(sc: Scenario) -> System:
    controller = SmcController(sc.schedule, sc.rho, sc.boundary_layer)
    controller.check_rho(sc.plant.disturbance_bound)
    disturbance = sc.plant.disturbance

    def rhs(t, y):
        d = closed_loop_rhs(controller, PlantState(y[0], y[1]), t, disturbance)
        return np.array([d.z1, d.z2])

    def sampler(t, y):
        state = PlantState(y[0], y[1])
        z = np.array([y[0]])
        dz = np.array([y[1]])
        return {
            "x": z, "v": dz, "z1": y[0], "z2": y[1],
            "u": np.array([control(controller, state, t)]),
            "s": np.array([surface(controller, state, t)]),
            "alpha": np.zeros(1), "beta": np.zeros(1),
            "err_pos": z, "err_vel": dz,
            "h1": staged_gain(sc.schedule, t),
        }

    return rhs, np.array([sc.plant.z1, sc.plant.z2]), sampler


def _ct_system(sc: Scenario) -> System:
    n, topo, gains, leader, followers = sc.n, sc.topology, sc.observer, sc.leader, sc.followers
    controller = sc.controller
    observer_rhs = undirected_ct_rhs if sc.mode == TrackingMode.UNDIRECTED_CT else directed_ct_rhs
    X, V, A, B = (slice(2 + k * n, 2 + (k + 1) * n) for k in range(4))

    def rhs(t, y):
        x0, v0, x, v = y[0], y[1], y[X], y[V]
        obs = ObserverState(y[A], y[B])
        _, u = ct_controls(controller, obs, t)
        dx0, dv0 = leader_rhs(leader, (x0, v0), t)
        dx, dv = follower_rhs(followers, (x, v), u, t)
        d_obs = observer_rhs(topo, gains, obs, x, v, x0, v0, u, t)
        return np.concatenate(([dx0, dv0], dx, dv, d_obs.alpha, d_obs.beta))

    def sampler(t, y):
        x0, v0, x, v = y[0], y[1], y[X], y[V]
        obs = ObserverState(y[A], y[B])
        s, u = ct_controls(controller, obs, t)
        alpha_err, beta_err = observer_error(obs, sc.mode, x, v, x0, v0)
        return {
            "x": x, "v": v, "u": u, "alpha": obs.alpha, "beta": obs.beta, "s": s,
            "alpha_err": alpha_err, "beta_err": beta_err,
            "err_pos": x - x0, "err_vel": v - v0, "x0": x0, "v0": v0,
            "h1": controller.gains_at(t)[0], "h2": staged_gain(gains.schedule, t),
        }

    obs0 = sc.initial_observer or ObserverState.zeros(n)
    y0 = np.concatenate(([leader.x0, leader.v0], followers.x, followers.v, obs0.alpha, obs0.beta))
    return rhs, y0, sampler


def _dat_system(sc: Scenario) -> System:
    n, topo, gains, refs, followers = sc.n, sc.topology, sc.observer, sc.references, sc.followers
    controller = sc.controller
    R, F, X, V, A, B = (slice(k * n, (k + 1) * n) for k in range(6))

    def rhs(t, y):
        r, f, x, v = y[R], y[F], y[X], y[V]
        obs = ObserverState(y[A], y[B])
        _, u = dat_controls(controller, obs, x, v, t)
        dr, df = reference_rhs(refs, (r, f), t)
        dx, dv = follower_rhs(followers, (x, v), u, t)
        d_obs = dat_rhs(topo, gains, obs, df, t)
        return np.concatenate((dr, df, dx, dv, d_obs.alpha, d_obs.beta))

    def sampler(t, y):
        r, f, x, v = y[R], y[F], y[X], y[V]
        obs = ObserverState(y[A], y[B])
        s, u = dat_controls(controller, obs, x, v, t)
        r_bar, f_bar = averages(r, f)
        alpha_err, beta_err = observer_error(obs, sc.mode, r_bar=r_bar, f_bar=f_bar)
        return {
            "x": x, "v": v, "u": u, "alpha": obs.alpha, "beta": obs.beta, "s": s,
            "alpha_err": alpha_err, "beta_err": beta_err,
            "err_pos": x - r_bar, "err_vel": v - f_bar,
            "r_bar": r_bar, "f_bar": f_bar, "a_bar": refs.average_acceleration(t),
            "sum_gap_alpha": obs.alpha.sum() - r.sum(), "sum_gap_beta": obs.beta.sum() - f.sum(),
            "h1": controller.gains_at(t)[0], "h2": staged_gain(gains.schedule, t),
        }

    if sc.initial_observer is None:
        obs0 = ObserverState.for_average_tracking(refs.r, refs.f)
    else:
        obs0 = ObserverState.for_average_tracking(refs.r, refs.f, sc.initial_observer.alpha, sc.initial_observer.beta)
    y0 = np.concatenate((refs.r, refs.f, followers.x, followers.v, obs0.alpha, obs0.beta))
    return rhs, y0, sampler


def build_system(sc: Scenario) -> System:
    """(rhs, y0, sampler) for the scenario's mode."""
    if sc.mode == TrackingMode.SMC:
        return _smc_system(sc)
    if sc.mode == TrackingMode.DAT:
        return _dat_system(sc)
    return _ct_system(sc)


def _from(log: TrajectoryLog, start: float) -> np.ndarray:
    return log.t >= start - GRID_TOL


def _monotonicity(
    log: TrajectoryLog,
    kind: LyapunovKind,
    series: np.ndarray,
    start: float,
    tolerance: float,
    on_radius: bool = True,
) -> LyapunovCheck:
    window = series[_from(log, start)]
    if on_radius:
        window = np.sqrt(2.0 * np.maximum(window, 0.0))
    return LyapunovCheck(kind, start, max_increase(window), tolerance, on_radius)


def _lambda_max(M: np.ndarray) -> float:
    return float(eigenvalues(M)[-1])


def _network_surface_band(sc: Scenario, sign_alpha: float, sign_beta: float) -> float:
    """Per-step change of s_i once the controller is on."""
    b = sc.bounds
    h1_peak = sc.schedule.peak()
    return sc.sim.dt * (sc.rho + b.u_max + b.d_max + b.a_max + (0.5 * h1_peak + 1.0) * sign_alpha + sign_beta)


def observer_spectra(sc: Scenario) -> Tuple[Optional[SpectralData], Optional[str]]:
    """
    Spectra behind the observer Lyapunov candidates.

    Returns (None, reason) when the graph fails the mode's assumptions, as it
    may in a forced run.
    """
    if sc.mode == TrackingMode.SMC:
        return None, None
    try:
        return spectral_data(sc.topology, sc.mode), None
    except AssumptionError as e:
        return None, f"observer Lyapunov diagnostics skipped: {e}"


def lyapunov_checks(sc: Scenario, log: TrajectoryLog,
                    spectral: Optional[SpectralData] = None) -> List[LyapunovCheck]:
    """
    Monotonicity of the candidates that apply to the mode, each on its active window.

    Without spectral data a network run gets the surface check only.
    """
    dt, mode, b = sc.sim.dt, sc.mode, sc.bounds
    if mode == TrackingMode.SMC:
        band = (sc.rho + sc.plant.disturbance_bound) * dt
        return [
            _monotonicity(log, LyapunovKind.V1, lyapunov_series(log, LyapunovKind.V1), 0.0, CHATTER_FACTOR * band),
            _monotonicity(log, LyapunovKind.V2, lyapunov_series(log, LyapunovKind.V2), sc.schedule.t1,
                          CHATTER_FACTOR * band),
        ]

    n, gains, topo = sc.n, sc.observer, sc.topology
    t_b1 = gains.schedule.t1
    deg_max = float(topo.degrees.max())
    if mode == TrackingMode.UNDIRECTED_CT:
        surface_band = _network_surface_band(sc, gains.b2, gains.c2)
    elif mode == TrackingMode.DIRECTED_CT:
        surface_band = _network_surface_band(sc, 2.0 * gains.b2, 2.0 * gains.c2)
    else:
        surface_band = _network_surface_band(sc, gains.b2 * deg_max, gains.c2 * deg_max)

    checks = []
    if spectral is None:
        pass
    elif mode == TrackingMode.UNDIRECTED_CT:
        Q = spectral.Q
        scale = np.sqrt(n * _lambda_max(Q))
        band3 = dt * (gains.c2 + b.u_max + b.d_max)
        band4 = dt * (gains.b2 + gains.c2 + b.u_max + b.d_max)
        checks.append(_monotonicity(log, LyapunovKind.V3, lyapunov_series(log, LyapunovKind.V3, Q=Q), 0.0,
                                    CHATTER_FACTOR * band3 * scale))
        checks.append(_monotonicity(log, LyapunovKind.V4, lyapunov_series(log, LyapunovKind.V4, Q=Q), t_b1,
                                    CHATTER_FACTOR * band4 * scale))
    elif mode == TrackingMode.DIRECTED_CT:
        d_bar = directed_disturbance_term(topo, b)
        h2_peak = gains.schedule.peak()
        eps = CHATTER_FACTOR * np.abs(spectral.H).sum(axis=1).max() * dt * (
            gains.c2 * (h2_peak + 2.0) + b.u_max + d_bar)
        tol = float((spectral.p * (gains.c1 * eps ** 2 + gains.c2 * eps)).sum())
        series = lyapunov_series(log, LyapunovKind.V5, H=spectral.H, p=spectral.p, c1=gains.c1, c2=gains.c2)
        checks.append(_monotonicity(log, LyapunovKind.V5, series, 0.0, tol, on_radius=False))
    else:
        L = spectral.laplacian
        scale = np.sqrt(n * _lambda_max(L))
        band6 = dt * (gains.c2 * deg_max + b.a_max)
        band7 = dt * (gains.b2 * deg_max + gains.c2 * deg_max + b.a_max)
        checks.append(_monotonicity(log, LyapunovKind.V6, lyapunov_series(log, LyapunovKind.V6, L=L), 0.0,
                                    CHATTER_FACTOR * band6 * scale))
        checks.append(_monotonicity(log, LyapunovKind.V7, lyapunov_series(log, LyapunovKind.V7, L=L), t_b1,
                                    CHATTER_FACTOR * band7 * scale))

    checks.append(_monotonicity(log, LyapunovKind.V1, lyapunov_series(log, LyapunovKind.V1), sc.t_c,
                                CHATTER_FACTOR * surface_band * np.sqrt(n)))
    return checks


def observer_lyapunov(sc: Scenario, log: TrajectoryLog, spectral: Optional[SpectralData] = None) -> np.ndarray:
    """Network series written as V_obs: V3, V5 or V6 by mode, V2 for smc, NaN without spectral data."""
    if sc.mode == TrackingMode.SMC:
        return lyapunov_series(log, LyapunovKind.V2)
    if spectral is None:
        return np.full(len(log), np.nan)
    if sc.mode == TrackingMode.UNDIRECTED_CT:
        return lyapunov_series(log, LyapunovKind.V3, Q=spectral.Q)
    if sc.mode == TrackingMode.DIRECTED_CT:
        return lyapunov_series(log, LyapunovKind.V5, H=spectral.H, p=spectral.p,
                               c1=sc.observer.c1, c2=sc.observer.c2)
    return lyapunov_series(log, LyapunovKind.V6, L=spectral.laplacian)


def _observer_summary(sc: Scenario, log: TrajectoryLog) -> ObserverSummary:
    gains = sc.observer
    alpha_err, beta_err = log.channel("alpha_err"), log.channel("beta_err")
    initial_scale = float(max(np.abs(alpha_err[0]).max(), np.abs(beta_err[0]).max()))
    residual = np.sqrt(decay_residual_factor(gains.schedule.stage1.params))
    tolerance = max(10.0 * gains.c2 * sc.sim.dt, residual * initial_scale)
    return ObserverSummary(
        beta_error_at_tb1=float(np.abs(log.value_at("beta_err", gains.schedule.t1)).max()),
        alpha_error_at_tb=float(np.abs(log.value_at("alpha_err", gains.deadline)).max()),
        tolerance=tolerance,
    )


def _arrival(sc: Scenario, log: TrajectoryLog) -> ArrivalDiagnostic:
    V1 = lyapunov_series(log, LyapunovKind.V1)
    t_a1 = sc.schedule.t1
    residual = decay_residual_factor(sc.schedule.stage1.params)
    predicted = np.sqrt(2.0 * V1[0]) * np.sqrt(residual) + sc.rho * sc.sim.dt
    V1_ta1 = float(V1[log.index_at(t_a1)])
    margin = sc.rho - sc.plant.disturbance_bound
    # V1' <= -sqrt(2) (rho - disturbance bound) V1^(1/2) once h1 has switched off
    reaching = finite_time_bound(np.sqrt(2.0) * margin, 0.5, V1_ta1) if margin > 0 else None
    return ArrivalDiagnostic(float(np.sqrt(2.0 * V1_ta1)), float(predicted), reaching)


def evaluate(sc: Scenario, log: TrajectoryLog, validation: Validation,
             tolerances: Tolerances = Tolerances()) -> SimulationResult:
    """Attach V1/V_obs channels and compute convergence and Lyapunov diagnostics."""
    s = log.channel("s")
    log.channels["V1"] = 0.5 * s ** 2
    spectral, skipped = observer_spectra(sc)
    if skipped:
        logger.warning("%s: %s", sc.name, skipped)
    log.channels["V_obs"] = observer_lyapunov(sc, log, spectral)

    tolerance = tolerances.for_mode(sc.mode, sc.rho, sc.sim.dt)
    metric = tracking_metric(log, sc.mode)
    after = metric.worst[_from(log, sc.deadline)]
    convergence = ConvergenceSummary(
        tolerance=tolerance,
        deadline=sc.deadline,
        metric_at_deadline=float(metric.at(sc.deadline).max()),
        worst_after_deadline=float(after.max()),
        settling_time=settling_time(log.t, metric.values, tolerance),
        crossing_time=metric.crossing_time(tolerance),
    )
    result = SimulationResult(sc, log, validation, convergence, lyapunov_checks(sc, log, spectral))
    if skipped:
        result.notes.append(f"{skipped}; V_obs written as NaN")

    if sc.mode == TrackingMode.SMC:
        result.arrival = _arrival(sc, log)
    else:
        result.observer = _observer_summary(sc, log)
    if sc.mode == TrackingMode.DAT:
        result.conservation = {
            "alpha": float(np.abs(log.channel("sum_gap_alpha")).max()),
            "beta": float(np.abs(log.channel("sum_gap_beta")).max()),
        }
        logger.info(
            "Reference averages at t=%g: r_bar=%.6g f_bar=%.6g a_bar=%.6g",
            log.t[-1], log.channel("r_bar")[-1], log.channel("f_bar")[-1], log.channel("a_bar")[-1],
        )

    logger.info(
        "%s: worst tracking error after %gs is %.3g (tolerance %.3g) -> %s",
        sc.name, sc.deadline, convergence.worst_after_deadline, tolerance,
        "converged" if convergence.converged else "NOT converged",
    )
    return result


def run_scenario(sc: Scenario, tolerances: Tolerances = Tolerances()) -> SimulationResult:
    """
    Validate, integrate and evaluate a scenario.

    Validation failures are recorded in the result, not raised; callers
    decide whether to gate on them.
    """
    validation = validate_scenario(sc)
    for reason in validation.reasons():
        logger.warning("%s: %s", sc.name, reason)
    rhs, y0, sampler = build_system(sc)
    logger.info("Running %s (%s, n=%d, dt=%g, horizon=%g)", sc.name, sc.mode.value, sc.n, sc.sim.dt, sc.sim.horizon)
    log = integrate(rhs, y0, sc.sim, sampler)
    return evaluate(sc, log, validation, tolerances)
