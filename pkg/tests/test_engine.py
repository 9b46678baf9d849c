import numpy as np
import pytest

from fxtrack import (
    Integrator,
    LyapunovKind,
    SimConfig,
    SimulationDivergedError,
    TrajectoryLog,
    finite_time_bound,
    integrate,
    is_nonincreasing,
    lyapunov_series,
    parse_scenario,
    run_scenario,
    settling_time,
)
from fxtrack.engine import max_increase

from conftest import DIVERGING_SCENARIO


class TestIntegrate:
    def test_single_euler_step(self):
        log = integrate(lambda t, y: -y, [1.0], SimConfig(dt=0.1, horizon=0.1, decimation=1))
        assert log.final_state[0] == pytest.approx(0.9)

    def test_zero_rhs(self):
        log = integrate(lambda t, y: np.zeros_like(y), [1.0, -2.0], SimConfig(dt=0.01, horizon=1.0, decimation=10))
        np.testing.assert_array_equal(log.states, np.tile([1.0, -2.0], (len(log), 1)))

    def test_grid_is_exact_multiples(self):
        log = integrate(lambda t, y: y * 0.0, [0.0], SimConfig(dt=1e-3, horizon=1.0, decimation=100))
        np.testing.assert_array_equal(log.t, np.arange(11) * 100 * 1e-3)

    def test_last_step_recorded(self):
        log = integrate(lambda t, y: y * 0.0, [0.0], SimConfig(dt=0.1, horizon=0.5, decimation=3))
        assert log.t[-1] == pytest.approx(0.5)
        assert len(log) == 3

    def test_rk4_accuracy(self):
        log = integrate(lambda t, y: -y, [1.0], SimConfig(dt=0.01, horizon=1.0, integrator=Integrator.RK4))
        assert log.final_state[0] == pytest.approx(np.exp(-1.0), rel=1e-9)

    def test_sampler_channels(self):
        log = integrate(lambda t, y: np.ones(1), [0.0], SimConfig(dt=0.1, horizon=1.0, decimation=5),
                        sampler=lambda t, y: {"double": 2.0 * y})
        np.testing.assert_allclose(log.channel("double")[:, 0], 2.0 * log.states[:, 0])
        assert log.value_at("double", 0.5)[0] == pytest.approx(1.0)
        with pytest.raises(ValueError, match="no channel"):
            log.channel("missing")

    def test_divergence(self):
        with pytest.raises(SimulationDivergedError) as info:
            integrate(lambda t, y: y * 1e300, [1e10], SimConfig(dt=1.0, horizon=5.0, decimation=1))
        assert info.value.component == 0

    def test_non_finite_initial_state(self):
        with pytest.raises(ValueError, match="Initial state"):
            integrate(lambda t, y: -y, [np.nan], SimConfig(dt=0.1, horizon=1.0))

    def test_deterministic(self):
        rhs = lambda t, y: -np.sign(y) - np.sin(t) * y  # noqa: E731
        config = SimConfig(dt=1e-3, horizon=2.0, decimation=7)
        a, b = integrate(rhs, [1.0, -3.0], config), integrate(rhs, [1.0, -3.0], config)
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.t, b.t)

    @pytest.mark.parametrize("kwargs", [{"dt": 0.0}, {"horizon": -1.0}, {"decimation": 0}])
    def test_invalid_config(self, kwargs):
        with pytest.raises(ValueError):
            SimConfig(**kwargs)


class TestScenarioDivergence:
    def test_reports_time_and_component(self):
        sc = parse_scenario(DIVERGING_SCENARIO)
        with pytest.raises(SimulationDivergedError) as info:
            run_scenario(sc)
        assert 0.0 < info.value.t <= sc.sim.horizon
        # [x0, v0, x(2), v(2), alpha(2), beta(2)]
        assert 0 <= info.value.component < 10

    def test_rk4_stages_diverge_the_same_way(self):
        sc = parse_scenario(DIVERGING_SCENARIO.replace("horizon: 4.0", "horizon: 4.0\n  integrator: rk4"))
        with pytest.raises(SimulationDivergedError):
            run_scenario(sc)


class TestSettlingTime:
    def test_rebound_excluded(self):
        t = np.arange(6.0)
        series = np.array([5.0, 0.5, 3.0, 0.5, 0.2, 0.1])
        assert settling_time(t, series, 1.0) == 3.0

    def test_all_zero(self):
        assert settling_time(np.arange(4.0), np.zeros(4), 0.1) == 0.0

    def test_exponential(self):
        t = np.arange(0.0, 5.0, 0.01)
        assert settling_time(t, np.exp(-t), np.exp(-2.0)) == pytest.approx(2.0, abs=0.01)

    def test_never_settles(self):
        assert settling_time(np.arange(3.0), np.ones(3), 0.5) is None

    def test_worst_column(self):
        t = np.arange(3.0)
        series = np.array([[1.0, 2.0], [0.0, 2.0], [0.0, 0.0]])
        assert settling_time(t, series, 0.5) == 2.0

    def test_empty(self):
        with pytest.raises(ValueError):
            settling_time(np.array([]), np.array([]), 1.0)


class TestFiniteTimeBound:
    def test_unit(self):
        assert finite_time_bound(1.0, 0.5, 1.0) == pytest.approx(2.0)

    def test_zero_start(self):
        assert finite_time_bound(1.0, 0.5, 0.0) == 0.0

    def test_scaled(self):
        assert finite_time_bound(2.0, 0.5, 4.0) == pytest.approx(2.0)

    @pytest.mark.parametrize("mu, nu, V0", [(0.0, 0.5, 1.0), (1.0, 1.0, 1.0), (1.0, 0.5, -1.0)])
    def test_invalid(self, mu, nu, V0):
        with pytest.raises(ValueError):
            finite_time_bound(mu, nu, V0)


def one_sample_log(**channels):
    return TrajectoryLog(t=np.zeros(1), states=np.zeros((1, 1)), channels=channels)


class TestLyapunovSeries:
    def test_zero_errors(self):
        zeros = np.zeros((3, 2))
        log = TrajectoryLog(np.arange(3.0), np.zeros((3, 1)), {
            "s": zeros, "z1": np.zeros(3), "alpha": zeros, "beta": zeros,
            "alpha_err": zeros, "beta_err": zeros,
        })
        M = np.array([[2.0, -1.0], [-1.0, 1.0]])
        for kind in LyapunovKind:
            series = lyapunov_series(log, kind, Q=M, L=M, H=M, p=np.ones(2), c1=1.0, c2=1.0)
            np.testing.assert_array_equal(series, 0.0)

    def test_v3_single_follower(self):
        log = one_sample_log(beta_err=np.array([[2.0]]))
        assert lyapunov_series(log, LyapunovKind.V3, Q=np.array([[1.0]]))[0] == pytest.approx(2.0)

    def test_v5(self):
        log = one_sample_log(beta_err=np.array([[1.0, -1.0]]))
        series = lyapunov_series(log, LyapunovKind.V5, H=np.eye(2), p=np.array([2.0, 1.0]), c1=1.0, c2=1.0)
        assert series[0] == pytest.approx(6.0)

    def test_v1_sums_agents(self):
        log = one_sample_log(s=np.array([[1.0, -2.0]]))
        assert lyapunov_series(log, LyapunovKind.V1)[0] == pytest.approx(2.5)

    def test_missing_matrix(self):
        with pytest.raises(ValueError, match="needs Q"):
            lyapunov_series(one_sample_log(beta_err=np.zeros((1, 1))), LyapunovKind.V3)

    def test_monotonicity_helpers(self):
        assert is_nonincreasing(np.array([3.0, 2.0, 2.0, 1.0]))
        assert max_increase(np.array([3.0, 2.5, 2.75])) == pytest.approx(0.25)
        assert is_nonincreasing(np.array([3.0, 2.5, 2.75]), tol=0.3)
