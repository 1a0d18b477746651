"""Integrator, trajectory bookkeeping and summary metrics."""

import numpy as np
import pytest

import bsfopt as b
from bsfopt.simulate import (
    ControlSchedule,
    DegenerateRun,
    Metrics,
    NegativeState,
    NumericalBlowup,
    StepTooLarge,
    Trajectory,
    TRAJECTORY_HEADER,
)
from conftest import BENCHMARK_TARGET_MG, random_schedule


def small_params(**overrides):
    kw = dict(diet="water", N_f0=10.0, N_m0=10.0)
    kw.update(overrides)
    return b.ModelParams.defaults(**kw)


def test_zero_initial_state_stays_zero():
    params = small_params()
    sched = ControlSchedule.constant(3, 25.0, 16.0)
    traj = b.integrate(b.PopulationState(), sched, params)
    assert np.all(traj.states == 0.0)


def test_sampling_every_step():
    params = small_params()
    sched = ControlSchedule.constant(2, 25.0, 16.0)
    traj = b.integrate(params.initial_state(), sched, params, dt=0.1)
    assert len(traj.times) == 21
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(2.0, abs=1e-12)
    assert np.all(np.diff(traj.times) > 0)


@pytest.mark.parametrize("dt", [0.2, 0.11, 0.03, 0.07, 0.0, -0.05])
def test_step_size_validation(dt):
    params = small_params()
    sched = ControlSchedule.constant(1, 25.0, 16.0)
    with pytest.raises(StepTooLarge):
        b.integrate(params.initial_state(), sched, params, dt=dt)


def test_step_halving_changes_little(calibrated_params, benchmark_schedule):
    t1 = b.integrate(calibrated_params.initial_state(), benchmark_schedule,
                     calibrated_params, dt=0.05)
    t2 = b.integrate(calibrated_params.initial_state(), benchmark_schedule,
                     calibrated_params, dt=0.025)
    m1 = t1.column("m_e")[-1]
    m2 = t2.column("m_e")[-1]
    assert abs(m1 - m2) / m2 < 1e-3  # contract bound; actual is ~1e-11


def test_fourth_order_convergence(calibrated_params, benchmark_schedule):
    finals = {}
    for dt in (0.1, 0.05, 0.025):
        traj = b.integrate(calibrated_params.initial_state(), benchmark_schedule,
                           calibrated_params, dt=dt)
        finals[dt] = traj.column("m_e")[-1]
    e_coarse = abs(finals[0.1] - finals[0.05])
    e_fine = abs(finals[0.05] - finals[0.025])
    order = np.log2(e_coarse / e_fine)
    assert order > 3.5


def test_monotone_eggs_and_energy_on_benchmark(benchmark_trajectory):
    traj = benchmark_trajectory
    assert np.all(np.diff(traj.column("m_e")) >= 0.0)
    assert np.all(np.diff(traj.column("E_f")) <= 0.0)
    assert np.all(np.diff(traj.column("E_m")) <= 0.0)
    assert np.all(traj.states >= 0.0)


def test_energy_pool_saturates_at_zero_under_harsh_schedule():
    # sustained heat depletes the reserves entirely; the pools must pin at
    # zero instead of aborting the run
    params = small_params()
    sched = ControlSchedule.constant(14, 40.0, 24.0)
    traj = b.integrate(params.initial_state(), sched, params)
    e_f = traj.column("E_f")
    assert e_f[-1] == 0.0
    assert np.all(np.diff(e_f) <= 0.0)
    assert np.all(traj.states >= 0.0)


def test_scale_linearity_end_to_end(calibrated_params):
    rng = np.random.default_rng(5)
    sched = random_schedule(rng)
    base = b.integrate(calibrated_params.initial_state(), sched, calibrated_params)
    for c in (0.5, 2.0, 10.0):
        scaled_params = calibrated_params.scaled_population(c)
        scaled = b.integrate(scaled_params.initial_state(), sched, scaled_params)
        np.testing.assert_allclose(scaled.states, c * base.states,
                                   rtol=1e-9, atol=1e-9)


def test_negative_state_error_for_too_coarse_step():
    # stiff pair-to-fertilized cascade overshoots at dt = 0.1
    params = small_params(N_f0=100.0, N_m0=100.0, k4=8.0, k5=0.0,
                          stage_ref_temp=None)
    init = b.PopulationState(N_mate=100.0, E_f=100.0, E_m=100.0)
    sched = ControlSchedule.constant(3, 25.0, 16.0)
    with pytest.raises(NegativeState):
        b.integrate(init, sched, params, dt=0.1)


def test_numerical_blowup_detected():
    params = small_params(k_ovi=1e13)
    sched = ControlSchedule.constant(14, 25.0, 16.0)
    with pytest.raises(NumericalBlowup):
        b.integrate(params.initial_state(), sched, params)


def test_schedule_validation():
    with pytest.raises(ValueError):
        ControlSchedule(np.array([25.0, 14.0]), np.array([16.0, 16.0]))
    with pytest.raises(ValueError):
        ControlSchedule(np.array([25.0]), np.array([25.0]))
    with pytest.raises(ValueError):
        ControlSchedule(np.array([]), np.array([]))
    with pytest.raises(ValueError):
        ControlSchedule(np.array([25.0, 25.0]), np.array([16.0]))


def test_schedule_csv_round_trip(tmp_path):
    sched = ControlSchedule(np.array([25.0, 33.3333333333333]),
                            np.array([16.0, 2.718281828459045]))
    path = tmp_path / "sched.csv"
    sched.to_csv(path)
    loaded = ControlSchedule.from_csv(path)
    np.testing.assert_array_equal(loaded.T, sched.T)
    np.testing.assert_array_equal(loaded.tau, sched.tau)


def test_trajectory_csv_round_trip(tmp_path, benchmark_trajectory):
    path = tmp_path / "traj.csv"
    benchmark_trajectory.to_csv(path)
    with open(path) as fh:
        header = fh.readline().strip()
    assert header == TRAJECTORY_HEADER
    assert header == ("t,N_f_y,N_m_y,N_f_act,N_m_act,N_mate,N_fert,"
                      "N_f_old,N_m_old,E_f,E_m,m_e")
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 0], benchmark_trajectory.times)
    np.testing.assert_array_equal(data[:, 1:], benchmark_trajectory.states)


def test_trajectory_invariants():
    sched = ControlSchedule.constant(1, 25.0, 16.0)
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 0.0]), states=np.zeros((2, 11)),
                   schedule=sched)
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 1.0]), states=np.zeros((3, 11)),
                   schedule=sched)


def _hand_trajectory(times, n_f_y, m_e, schedule):
    states = np.zeros((len(times), 11))
    states[:, 0] = n_f_y
    states[:, 10] = m_e
    return Trajectory(times=np.asarray(times, float), states=states,
                      schedule=schedule)


def test_metrics_single_day_sums():
    sched = ControlSchedule.constant(1, 20.0, 2.0)
    traj = _hand_trajectory([0.0, 0.5, 1.0], [10.0, 9.0, 8.0],
                            [0.0, 1.0, 2.0], sched)
    m = b.metrics(traj)
    assert m.sum_T == 20.0
    assert m.sum_tau == 2.0
    assert m.m_e_final == 2.0
    assert m.t_Nfy20 is None


def test_metrics_sums_are_exact_schedule_sums():
    sched = ControlSchedule(np.array([25.0, 30.0, 15.0]),
                            np.array([16.0, 2.0, 24.0]))
    traj = _hand_trajectory([0.0, 1.0, 2.0, 3.0], [1.0] * 4, [0.0] * 4, sched)
    m = b.metrics(traj)
    assert m.sum_T == 70.0
    assert m.sum_tau == 42.0


def test_metrics_young_decline_day_is_ceiling_of_crossing():
    sched = ControlSchedule.constant(3, 25.0, 16.0)
    # crossing below 2.0 (20% of 10) happens at the t=2.5 sample
    traj = _hand_trajectory([0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
                            [10.0, 8.0, 6.0, 4.0, 2.0, 1.9, 1.0],
                            [0.0] * 7, sched)
    assert b.metrics(traj).t_Nfy20 == 3


def test_metrics_young_decline_exact_day_boundary():
    sched = ControlSchedule.constant(2, 25.0, 16.0)
    traj = _hand_trajectory([0.0, 1.0, 2.0], [10.0, 1.0, 0.5], [0.0] * 3, sched)
    assert b.metrics(traj).t_Nfy20 == 1


def test_time_to_mass_interpolates():
    sched = ControlSchedule.constant(2, 25.0, 16.0)
    traj = _hand_trajectory([0.0, 1.0, 2.0], [1.0] * 3, [0.0, 10.0, 30.0], sched)
    assert b.time_to_mass(traj, 5.0) == pytest.approx(0.5)
    assert b.time_to_mass(traj, 10.0) == pytest.approx(1.0)
    assert b.time_to_mass(traj, 20.0) == pytest.approx(1.5)
    assert b.time_to_mass(traj, 0.0) == 0.0
    assert b.time_to_mass(traj, 31.0) is None


def test_metrics_empty_trajectory_rejected():
    sched = ControlSchedule.constant(1, 25.0, 16.0)
    traj = Trajectory(times=np.array([0.0]), states=np.zeros((1, 11)),
                      schedule=sched)
    traj.times = np.array([])
    traj.states = np.zeros((0, 11))
    with pytest.raises(ValueError):
        b.metrics(traj)


def test_calibrate_scale_linearity(benchmark_schedule):
    params = small_params()
    unit = params.replace(N_f0=1.0, N_m0=1.0)
    traj = b.integrate(unit.initial_state(), benchmark_schedule, unit)
    m_unit = traj.column("m_e")[-1]
    assert b.calibrate_scale(2.0 * m_unit, benchmark_schedule, params) == \
        pytest.approx(2.0, rel=1e-12)
    assert b.calibrate_scale(0.5 * m_unit, benchmark_schedule, params) == \
        pytest.approx(0.5, rel=1e-12)


def test_calibrate_scale_fixed_point(calibrated_params, benchmark_trajectory):
    # re-simulating with the calibrated counts reproduces the target
    final = benchmark_trajectory.column("m_e")[-1]
    assert final == pytest.approx(BENCHMARK_TARGET_MG, rel=1e-9)


def test_calibrate_scale_degenerate():
    params = small_params(k_ovi=0.0)  # nothing is ever laid
    sched = ControlSchedule.constant(3, 25.0, 16.0)
    with pytest.raises(DegenerateRun):
        b.calibrate_scale(100.0, sched, params)
    with pytest.raises(ValueError):
        b.calibrate_scale(-1.0, sched, small_params())


def test_metrics_as_dict_keys():
    m = Metrics(sum_T=350.0, sum_tau=224.0, t_Nfy20=5, m_e_final=447.6)
    assert m.as_dict() == {"sumT_degCd": 350.0, "sumTau_h": 224.0,
                           "tNfy20_d": 5, "mEggFinal_mg": 447.6}
