"""End-to-end runs of the four built-in examples."""

import numpy as np
import pytest

from fxtrack import (
    LyapunovKind,
    Scenario,
    SimConfig,
    TrackingMode,
    builtin_scenario,
    run_scenario,
    validate_scenario,
)

pytestmark = pytest.mark.slow


class TestBuiltins:
    def test_unknown_example(self):
        with pytest.raises(ValueError, match="Unknown example"):
            builtin_scenario(7)

    def test_parameters(self):
        sc = builtin_scenario(2)
        assert (sc.rho, sc.observer.b1, sc.observer.b2, sc.observer.c1, sc.observer.c2) == (8.0, 4.0, 1.0, 4.0, 8.0)
        assert sc.deadline == pytest.approx(9.0)
        assert builtin_scenario(1).deadline == pytest.approx(6.0)
        assert builtin_scenario(3).deadline == pytest.approx(6.0)
        assert builtin_scenario(4).deadline == pytest.approx(12.0)

    def test_dt_override(self):
        assert builtin_scenario(1, dt=1e-3).sim.dt == 1e-3

    def test_seed_changes_followers(self):
        a, b = builtin_scenario(2, seed=0), builtin_scenario(2, seed=1)
        assert not np.array_equal(a.followers.x, b.followers.x)
        np.testing.assert_array_equal(builtin_scenario(2, seed=1).followers.x, b.followers.x)

    @pytest.mark.parametrize("example_id", [1, 2, 4])
    def test_validation_passes(self, example_id):
        assert validate_scenario(builtin_scenario(example_id)).is_valid

    def test_example_3_reports_c2(self):
        validation = validate_scenario(builtin_scenario(3))
        assert validation.assumptions.is_valid
        assert not validation.is_valid
        assert len(validation.gains.failures()) == 1


class TestExample1:
    def test_surface_reached_by_first_stage(self, example_1_result):
        s = example_1_result.log.value_at("s", 3.0)
        assert abs(s[0]) <= 1e-2

    def test_state_at_deadline(self, example_1_result):
        log = example_1_result.log
        z1, z2 = log.value_at("z1", 6.0), log.value_at("z2", 6.0)
        assert abs(z1) + abs(z2) <= 2e-2
        assert example_1_result.converged

    def test_surface_lyapunov(self, example_1_result):
        assert example_1_result.lyapunov_check(LyapunovKind.V1).passed

    def test_arrival_diagnostic(self, example_1_result):
        arrival = example_1_result.arrival
        assert arrival.within_bound
        assert arrival.reaching_bound is not None


class TestExample2:
    def test_observer_deadlines(self, example_2_result):
        log = example_2_result.log
        assert np.abs(log.value_at("beta_err", 1.5)).max() <= 5e-2
        assert np.abs(log.value_at("alpha_err", 3.0)).max() <= 5e-2

    def test_tracking_by_deadline(self, example_2_result):
        log = example_2_result.log
        metric = np.abs(log.value_at("err_pos", 9.0)) + np.abs(log.value_at("err_vel", 9.0))
        assert metric.max() <= 5e-2
        assert example_2_result.converged

    def test_observer_lyapunov(self, example_2_result):
        assert example_2_result.lyapunov_check(LyapunovKind.V3).passed

    def test_no_control_before_switch_on(self, example_2_result):
        log = example_2_result.log
        before = log.t < 3.0 - 1e-9
        np.testing.assert_array_equal(log.channel("u")[before], 0.0)


class TestExample3:
    def test_tracking_by_deadline(self, example_3_result):
        log = example_3_result.log
        metric = np.abs(log.value_at("err_pos", 6.0)) + np.abs(log.value_at("err_vel", 6.0))
        assert metric.max() <= 5e-2
        assert example_3_result.converged

    def test_observer_lyapunov(self, example_3_result):
        assert example_3_result.lyapunov_check(LyapunovKind.V5).passed


class TestExample4:
    def test_average_tracking_by_deadline(self, example_4_result):
        log = example_4_result.log
        metric = np.abs(log.value_at("err_pos", 12.0)) + np.abs(log.value_at("err_vel", 12.0))
        assert metric.max() <= 1.5e-1
        assert example_4_result.converged

    def test_conservation(self, example_4_result):
        assert example_4_result.conservation["alpha"] <= 1e-9
        assert example_4_result.conservation["beta"] <= 1e-9

    def test_observer_lyapunov(self, example_4_result):
        assert example_4_result.lyapunov_check(LyapunovKind.V6).passed


def test_determinism():
    sc = builtin_scenario(1, dt=1e-3)
    a, b = run_scenario(sc), run_scenario(sc)
    assert np.array_equal(a.log.states, b.log.states)
    assert np.array_equal(a.log.channel("u"), b.log.channel("u"))


def test_horizon_before_deadline():
    sc = builtin_scenario(1)
    with pytest.raises(ValueError, match="before the deadline"):
        Scenario(name="short", mode=TrackingMode.SMC, rho=sc.rho, schedule=sc.schedule,
                 sim=SimConfig(dt=1e-4, horizon=5.0), plant=sc.plant)


@pytest.mark.parametrize("example_id", [1, 2, 3, 4])
def test_every_lyapunov_check_passes(request, example_id):
    result = request.getfixturevalue(f"example_{example_id}_result")
    assert result.lyapunov
    failed = [check.describe() for check in result.lyapunov if not check.passed]
    assert not failed


@pytest.mark.parametrize("example_id, kinds", [
    (1, {"V1", "V2"}),
    (2, {"V1", "V3", "V4"}),
    (3, {"V1", "V5"}),
    (4, {"V1", "V6", "V7"}),
])
def test_lyapunov_candidates_per_mode(request, example_id, kinds):
    result = request.getfixturevalue(f"example_{example_id}_result")
    assert {check.kind.value for check in result.lyapunov} == kinds


@pytest.mark.parametrize("example_id", [2, 3, 4])
def test_observer_converges_by_its_deadline(request, example_id):
    result = request.getfixturevalue(f"example_{example_id}_result")
    assert result.observer.converged


def test_step_refinement(example_1_result):
    """Halving dt moves the terminal state by at most twice the chattering band."""
    coarse = run_scenario(builtin_scenario(1, dt=2e-4))
    sc = coarse.scenario
    band = (sc.rho + sc.plant.disturbance_bound) * sc.sim.dt
    assert example_1_result.scenario.sim.dt == pytest.approx(sc.sim.dt / 2.0)
    gap = np.abs(coarse.log.final_state - example_1_result.log.final_state)
    assert gap.max() <= 2.0 * band
