"""Multi-day simulation under daily-constant controls, plus summary metrics.

The horizon is discretized per day (light hours can only be applied per
day); within a day the controls are constant and the ODE is advanced with
classic fixed-step RK4. The step must divide one day evenly so control
switches align with step boundaries, which keeps the integrator at its
nominal fourth order. Components that dip into (-1e-9, 0) from roundoff
are clamped to zero after every step; anything more negative aborts the
run as a step-size problem. The energy pools are the exception: they can
legitimately deplete to zero at finite slope under harsh schedules, so
they clamp at zero (where their drains freeze) rather than abort.

Summary metrics follow the cage bookkeeping used to compare schedules:
accumulated temperature (degree-days) and light hours, final egg mass,
the first whole day on which the young-female count falls below 20% of
its start, and interpolated time-to-mass.

``calibrate_scale`` picks initial fly counts so a reference schedule
reproduces a target final egg mass; the dynamics are degree-1 homogeneous
in the population scale, so one unit-population run suffices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .dynamics import (
    STATE_FIELDS,
    T_MAX,
    T_MIN,
    TAU_MAX,
    TAU_MIN,
    ModelParams,
    PopulationState,
    pack_params,
)

DEFAULT_DT = 0.05
MAX_DT = 0.1
YOUNG_DECLINE_FRACTION = 0.2

TRAJECTORY_HEADER = "t," + ",".join(STATE_FIELDS)


class StepTooLarge(ValueError):
    """dt must be at most 0.1 day and divide one day evenly."""


class NumericalBlowup(ArithmeticError):
    """A state exceeded 1e12 or became non-finite during integration."""


class NegativeState(ArithmeticError):
    """A state went below -1e-9: the step size is too large for the run."""


class DegenerateRun(ValueError):
    """Reference run produced no eggs; cannot calibrate a population scale."""


@dataclass
class ControlSchedule:
    """Per-day temperature (degC) and photoperiod (h/day) over the horizon."""

    T: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        self.T = np.atleast_1d(np.asarray(self.T, dtype=float))
        self.tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        if self.T.ndim != 1 or self.T.shape != self.tau.shape:
            raise ValueError("T and tau must be 1-d arrays of equal length")
        if self.days < 1:
            raise ValueError("schedule needs at least 1 day")
        if np.any(self.T < T_MIN) or np.any(self.T > T_MAX):
            raise ValueError(f"temperatures outside [{T_MIN}, {T_MAX}] degC")
        if np.any(self.tau < TAU_MIN) or np.any(self.tau > TAU_MAX):
            raise ValueError(f"photoperiods outside [{TAU_MIN}, {TAU_MAX}] h")

    @property
    def days(self) -> int:
        return int(self.T.shape[0])

    @classmethod
    def constant(cls, days: int, T: float, tau: float) -> "ControlSchedule":
        return cls(np.full(days, float(T)), np.full(days, float(tau)))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("day,T_degC,tau_h\n")
            for d in range(self.days):
                fh.write(f"{d},{self.T[d]:.17g},{self.tau[d]:.17g}\n")

    @classmethod
    def from_csv(cls, path) -> "ControlSchedule":
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if rows.shape[1] != 3:
            raise ValueError("schedule CSV needs columns day,T_degC,tau_h")
        order = np.argsort(rows[:, 0])
        return cls(rows[order, 1], rows[order, 2])


@dataclass
class Trajectory:
    """Sampled state history: times (days), one state row per sample."""

    times: np.ndarray
    states: np.ndarray
    schedule: ControlSchedule

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def state_at(self, i: int) -> PopulationState:
        return PopulationState.from_array(self.states[i])

    @property
    def final_state(self) -> PopulationState:
        return self.state_at(-1)

    def column(self, name: str) -> np.ndarray:
        return self.states[:, STATE_FIELDS.index(name)]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(TRAJECTORY_HEADER + "\n")
            for t, row in zip(self.times, self.states):
                fh.write(f"{t:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")


@dataclass
class Metrics:
    """Schedule-comparison summary quantities."""

    sum_T: float       # degree-days over the horizon
    sum_tau: float     # total light hours
    t_Nfy20: int | None  # first whole day with N_f_y < 20% of start
    m_e_final: float   # mg

    def as_dict(self) -> dict:
        return {"sumT_degCd": self.sum_T, "sumTau_h": self.sum_tau,
                "tNfy20_d": self.t_Nfy20, "mEggFinal_mg": self.m_e_final}


def _check_dt(dt: float) -> int:
    if not (0.0 < dt <= MAX_DT):
        raise StepTooLarge(f"dt={dt} must lie in (0, {MAX_DT}] day")
    steps_per_day = round(1.0 / dt)
    if abs(steps_per_day * dt - 1.0) > 1e-9:
        raise StepTooLarge(f"dt={dt} must divide 1 day evenly")
    return steps_per_day


def integrate(initial: PopulationState, schedule: ControlSchedule,
              params: ModelParams, dt: float = DEFAULT_DT) -> Trajectory:
    """Advance the model over the schedule, sampling every RK4 step."""
    steps_per_day = _check_dt(dt)
    P = pack_params(params)
    y0 = initial.to_array()
    n = schedule.days * steps_per_day
    out = np.empty((n + 1, _kernel.N_STATE))
    status, written = _kernel.integrate_trajectory(
        y0, schedule.T, schedule.tau, P, dt, steps_per_day, out)
    if status == _kernel.STATUS_BLOWUP:
        raise NumericalBlowup(
            f"state exceeded {_kernel.BLOWUP_LIMIT:g} or became non-finite "
            f"near t={(written - 1) * dt:.3f} d")
    if status == _kernel.STATUS_NEGATIVE:
        raise NegativeState(
            f"state below {_kernel.NEGATIVE_CLAMP:g} near "
            f"t={(written - 1) * dt:.3f} d; reduce dt")
    times = np.arange(n + 1) * dt
    return Trajectory(times=times, states=out, schedule=schedule)


def metrics(traj: Trajectory) -> Metrics:
    """Summary quantities of one finished run.

    Input sums come from the schedule itself (no quadrature error). The
    young-female decline day is the ceiling of the first sample time at
    which N_f_y drops below 20% of its initial value, or None if that
    never happens.
    """
    if len(traj.times) == 0:
        raise ValueError("trajectory is empty")
    n_f_y = traj.column("N_f_y")
    threshold = YOUNG_DECLINE_FRACTION * n_f_y[0]
    below = np.nonzero(n_f_y < threshold)[0]
    t_Nfy20 = None
    if below.size:
        t_Nfy20 = int(math.ceil(traj.times[below[0]] - 1e-9))
    return Metrics(
        sum_T=float(np.sum(traj.schedule.T)),
        sum_tau=float(np.sum(traj.schedule.tau)),
        t_Nfy20=t_Nfy20,
        m_e_final=float(traj.column("m_e")[-1]),
    )


def time_to_mass(traj: Trajectory, mass: float) -> float | None:
    """First time (days) the cumulative egg mass reaches ``mass`` mg.

    Linear interpolation between samples; None if never reached.
    """
    m = traj.column("m_e")
    if m[0] >= mass:
        return 0.0
    idx = np.nonzero(m >= mass)[0]
    if idx.size == 0:
        return None
    i = int(idx[0])
    t0, t1 = traj.times[i - 1], traj.times[i]
    m0, m1 = m[i - 1], m[i]
    return float(t0 + (mass - m0) / (m1 - m0) * (t1 - t0))


def calibrate_scale(target_final_mass: float, reference_schedule: ControlSchedule,
                    params: ModelParams, dt: float = DEFAULT_DT) -> float:
    """Initial count per sex that makes the reference run hit the target mass.

    Runs once with one fly of each sex and rescales: every trajectory
    component is proportional to the starting population.
    """
    if target_final_mass <= 0:
        raise ValueError("target mass must be > 0")
    unit = params.replace(N_f0=1.0, N_m0=1.0)
    traj = integrate(unit.initial_state(), reference_schedule, unit, dt)
    m_unit = traj.column("m_e")[-1]
    if m_unit <= 0:
        raise DegenerateRun("unit-population run produced no eggs")
    return float(target_final_mass / m_unit)
