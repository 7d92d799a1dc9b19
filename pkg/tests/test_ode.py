import math

import numpy as np
import pytest

from spinguide.ode import (
    EventSpec,
    IntegrationError,
    IntegratorConfig,
    ObservableMap,
    detect_event,
    detect_steady_state,
    integrate,
)


def test_exponential_decay_accuracy():
    traj = integrate(lambda t, y: -y, np.array([1.0]), IntegratorConfig(t_end=1.0))
    assert abs(traj.final_state[0] - math.exp(-1.0)) < 1e-7


def test_harmonic_energy_conservation():
    def rhs(t, y):
        return np.array([y[1], -y[0]])

    traj = integrate(rhs, np.array([1.0, 0.0]), IntegratorConfig(t_end=100.0))
    energy = traj.obs[:, 0] ** 2 + traj.obs[:, 1] ** 2
    assert np.max(np.abs(energy - 1.0)) < 1e-6


def test_dense_output_matches_nodes_exactly():
    traj = integrate(lambda t, y: -y, np.array([1.0]), IntegratorConfig(t_end=2.0))
    at_nodes = traj.obs_at(traj.t[1:-1], 0)
    assert np.max(np.abs(at_nodes - traj.obs[1:-1, 0])) < 1e-12


def test_dense_output_between_nodes():
    traj = integrate(lambda t, y: -y, np.array([1.0]), IntegratorConfig(t_end=2.0))
    ts = np.linspace(0.0, 2.0, 137)
    assert np.max(np.abs(traj.obs_at(ts, 0) - np.exp(-ts))) < 1e-8


def test_event_detection_half_life():
    traj = integrate(lambda t, y: -y, np.array([1.0]), IntegratorConfig(t_end=3.0))
    t_cross = detect_event(traj, EventSpec(0, 0.5, "falling"))
    assert t_cross == pytest.approx(math.log(2.0), abs=1e-6)


def test_event_on_monotone_rise_to_plateau_is_unique_and_absent_when_missed():
    # y -> 1 - e^{-t}: rising event at 95% of plateau
    traj = integrate(lambda t, y: 1.0 - y, np.array([0.0]), IntegratorConfig(t_end=12.0))
    plateau = traj.obs[-1, 0]
    t95 = detect_event(traj, EventSpec(0, 0.95 * plateau, "rising"))
    assert t95 == pytest.approx(-math.log(1.0 - 0.95 * plateau), rel=1e-5)
    assert detect_event(traj, EventSpec(0, 2.0, "rising")) is None
    assert detect_event(traj, EventSpec(0, 0.5, "falling")) is None


def test_complex_state_integration():
    # y' = i*w*y keeps |y| = 1
    w = 2.0
    traj = integrate(lambda t, y: 1j * w * y, np.array([1.0 + 0j]),
                     IntegratorConfig(t_end=10.0),
                     obs=ObservableMap(("re", "im"), np.array([[1.0 + 0j], [-1j]])))
    vals = traj.obs_at(np.array([10.0]))
    assert vals[0, 0] == pytest.approx(math.cos(20.0), abs=1e-6)
    assert vals[0, 1] == pytest.approx(math.sin(20.0), abs=1e-6)


def test_steady_state_constant_trajectory_detects_at_window():
    traj = integrate(lambda t, y: 0.0 * y, np.array([1.0]),
                     IntegratorConfig(t_end=10.0, max_step=0.5))
    t_ss = detect_steady_state(traj, window=2.0, slope=1e-9)
    assert t_ss == pytest.approx(2.0, abs=1e-9)


def test_steady_state_single_decay_time():
    # |dy/dt| = e^{-t} < 1e-6 from t ~ 13.8; with finite-difference slopes and
    # window 5 the detected time lands close behind
    traj = integrate(lambda t, y: -y, np.array([1.0]),
                     IntegratorConfig(t_end=40.0, max_step=1.0, abs_tol=1e-14))
    t_ss = detect_steady_state(traj, window=5.0, slope=1e-6)
    assert t_ss is not None
    assert 17.0 <= t_ss <= 21.0


def test_steady_state_not_reached_returns_none():
    traj = integrate(lambda t, y: -y, np.array([1.0]), IntegratorConfig(t_end=2.0))
    assert detect_steady_state(traj, window=1.0, slope=1e-12) is None


def test_self_convergence_on_nonlinear_system():
    # logistic-style nonlinear rhs: halving tolerances moves the solution by
    # less than 10x the original relative tolerance
    def rhs(t, y):
        return y * (1.0 - y) - 0.3 * y

    cfg = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10, t_end=8.0)
    half = IntegratorConfig(rel_tol=5e-9, abs_tol=5e-11, t_end=8.0)
    a = integrate(rhs, np.array([0.01]), cfg).final_state[0]
    b = integrate(rhs, np.array([0.01]), half).final_state[0]
    assert abs(a - b) <= 10 * cfg.rel_tol * max(abs(a), 1.0)


def test_non_finite_initial_derivative_raises():
    with pytest.raises(IntegrationError):
        integrate(lambda t, y: np.array([float("inf")]), np.array([1.0]),
                  IntegratorConfig(t_end=1.0))


def test_step_size_underflow_raises():
    # derivative goes non-finite mid-run: repeated halving hits the floor
    def rhs(t, y):
        if t > 0.5:
            return np.array([float("nan")])
        return -y

    with pytest.raises(IntegrationError):
        integrate(rhs, np.array([1.0]), IntegratorConfig(t_end=1.0))


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(t_end=-1.0)
    with pytest.raises(ValueError):
        EventSpec(0, float("inf"))
    with pytest.raises(ValueError):
        EventSpec(0, 1.0, "sideways")


def test_state_samples_collected():
    traj = integrate(lambda t, y: -y, np.array([1.0]), IntegratorConfig(t_end=5.0),
                     state_sample_times=[1.0, 2.5, 4.0])
    assert len(traj.states) == 3
    assert np.all(traj.state_t >= [1.0, 2.5, 4.0])
