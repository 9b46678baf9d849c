"""
Fixed-time cooperative tracking for double-integrator multi-agent systems.
"""

from .builtin_scenarios import EXAMPLES, builtin_scenario
from .engine import (
    Integrator,
    LyapunovKind,
    SimConfig,
    TrajectoryLog,
    finite_time_bound,
    integrate,
    is_nonincreasing,
    lyapunov_series,
    settling_time,
)
from .generator import (
    GainParams,
    PolynomialGenerator,
    StagedGain,
    TimeBasedGenerator,
    decay_residual_factor,
    gain,
    gain_dot,
    staged_gain,
    staged_gain_dot,
    xi,
    xi_ddot,
    xi_dot,
)
from .observers import (
    ObserverGains,
    ObserverState,
    dat_rhs,
    directed_ct_rhs,
    observer_error,
    undirected_ct_rhs,
    validate_gains,
)
from .report import validation_lines, write_outputs, write_trajectory_csv
from .scenario_file import dump_scenario, load_scenario, parse_scenario, save_scenario
from .scenarios import (
    FollowerSpec,
    LeaderSpec,
    PlantSpec,
    ReferenceSpec,
    TrackingController,
    ct_control,
    dat_control,
    follower_rhs,
    leader_rhs,
    reference_rhs,
    tracking_metric,
)
from .signals import Signal, Sinusoid
from .simulation import Scenario, SimulationResult, Tolerances, run_scenario, validate_scenario
from .smc import PlantState, SmcController, closed_loop_rhs, control, surface
from .topology import (
    SpectralData,
    Topology,
    TrackingMode,
    check_assumptions,
    directed_weights,
    grounded_matrix,
    incidence,
    laplacian,
    second_smallest_eigenvalue,
    smallest_eigenvalue,
)
from .validation import (
    AssumptionError,
    AssumptionReport,
    DimensionError,
    GainReport,
    ModeBounds,
    ScenarioFileError,
    SimulationDivergedError,
)

__version__ = "1.0.0"
