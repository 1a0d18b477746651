"""Life-cycle ODE: compartments, energy reserves and egg production.

The cage population is tracked per sex through the stages

    young -> sexually active -> (paired) mated -> fertilized -> old
                                               -> old males

plus two population-level energy pools E_f, E_m and the cumulative egg
mass m_e, for 11 states total. Flies of both sexes mate once; the mated
compartment counts pairs, and each pair later splits into one fertilized
female and one old male. Every compartment loses flies to an
energy-driven mortality mu = 1 - E/E0 (clamped to [0, 1]): reserves only
drain, so depletion shortens the remaining lifespan. A pool that reaches
zero stops draining; the flies it represents then die at the maximal
rate instead of spending reserves they no longer have.

Controls enter through the response curves: temperature scales all
transition rates (via the stage curve), egg output (egg curve) and energy
drain (energy curve, as a divisor, so flies burn reserves fastest at
temperature extremes); photoperiod scales only the pairing rate.

Transition-rate normalization: the shipped base rates k1..k5 are the
effective per-day rates at the 25 degC reference, so by default the stage
curve is applied as r_stage(T) / r_stage(25). Set
``stage_ref_temp=None`` to multiply by the raw curve value instead.

This module is the readable reference implementation; the integrator uses
the compiled twin in :mod:`bsfopt._kernel` (asserted equal in tests).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .env_response import (
    FeedParams,
    LightParams,
    Logan10Params,
    feed_preset,
    light_preset,
    light_rate,
    logan10_rate,
    preset,
)

# control box: the admissible cage conditions
T_MIN, T_MAX = 15.0, 40.0
TAU_MIN, TAU_MAX = 2.0, 24.0

STATE_FIELDS = ("N_f_y", "N_m_y", "N_f_act", "N_m_act", "N_mate",
                "N_fert", "N_f_old", "N_m_old", "E_f", "E_m", "m_e")

MATED_MORTALITY_RULES = ("mean", "female", "male", "min", "max")
_MATED_MORTALITY_CODE = {name: float(i) for i, name in enumerate(
    ("mean", "female", "male", "min", "max"))}


class InvalidInitialEnergy(ValueError):
    """Initial energy pool must be positive."""


class NonFiniteState(ValueError):
    """State vector contains NaN or infinity."""


@dataclass(frozen=True)
class ControlInput:
    """One day's cage conditions: temperature (degC) and light hours."""

    T: float
    tau: float

    def __post_init__(self):
        if not (T_MIN <= self.T <= T_MAX):
            raise ValueError(f"T={self.T} outside [{T_MIN}, {T_MAX}] degC")
        if not (TAU_MIN <= self.tau <= TAU_MAX):
            raise ValueError(f"tau={self.tau} outside [{TAU_MIN}, {TAU_MAX}] h")


@dataclass(frozen=True)
class PopulationState:
    """The 11 model states (flies, pairs, normalized energy, mg of eggs)."""

    N_f_y: float = 0.0
    N_m_y: float = 0.0
    N_f_act: float = 0.0
    N_m_act: float = 0.0
    N_mate: float = 0.0
    N_fert: float = 0.0
    N_f_old: float = 0.0
    N_m_old: float = 0.0
    E_f: float = 0.0
    E_m: float = 0.0
    m_e: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in STATE_FIELDS], dtype=float)

    @classmethod
    def from_array(cls, values) -> "PopulationState":
        values = np.asarray(values, dtype=float)
        if values.shape != (len(STATE_FIELDS),):
            raise ValueError(f"expected {len(STATE_FIELDS)} state components")
        return cls(**{f: float(v) for f, v in zip(STATE_FIELDS, values)})


@dataclass(frozen=True)
class ModelParams:
    """Full parameter set: rates, energy costs, response curves, initial counts.

    Initial energy pools equal the initial fly counts (each fly starts
    with one unit of normalized reserve), so E_f0/E_m0 are derived.
    """

    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    k_ovi: float
    eps_f: float
    eps_m: float
    beta_f: float
    beta_m: float
    gamma_f: float
    gamma_m: float
    feed: FeedParams
    temp_energy: Logan10Params
    temp_stage: Logan10Params
    temp_egg: Logan10Params
    light: LightParams
    N_f0: float
    N_m0: float
    stage_ref_temp: float | None = 25.0
    mated_mortality: str = "mean"

    def __post_init__(self):
        rates = dict(k1=self.k1, k2=self.k2, k3=self.k3, k4=self.k4, k5=self.k5,
                     k_ovi=self.k_ovi, eps_f=self.eps_f, eps_m=self.eps_m,
                     beta_f=self.beta_f, beta_m=self.beta_m,
                     gamma_f=self.gamma_f, gamma_m=self.gamma_m)
        for name, value in rates.items():
            if value < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.N_f0 <= 0 or self.N_m0 <= 0:
            raise ValueError("initial populations must be > 0")
        if self.mated_mortality not in MATED_MORTALITY_RULES:
            raise ValueError(f"mated_mortality must be one of {MATED_MORTALITY_RULES}")

    @property
    def E_f0(self) -> float:
        return self.N_f0

    @property
    def E_m0(self) -> float:
        return self.N_m0

    @classmethod
    def defaults(cls, diet: str = "water", N_f0: float = 500.0,
                 N_m0: float = 500.0, **overrides) -> "ModelParams":
        """Shipped rate table plus the response presets for one diet."""
        base = dict(
            k1=0.34, k2=0.35, k3=1.84, k4=0.3, k5=0.79, k_ovi=0.79,
            eps_f=0.0287, eps_m=0.0404,
            beta_f=1.22e-4, beta_m=9.25e-5,
            gamma_f=0.3513, gamma_m=0.1773,
            feed=feed_preset(diet),
            temp_energy=preset("energy"),
            temp_stage=preset("stage"),
            temp_egg=preset("egg"),
            light=light_preset(),
            N_f0=N_f0, N_m0=N_m0,
        )
        base.update(overrides)
        return cls(**base)

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def scaled_population(self, c: float) -> "ModelParams":
        """Scale the initial counts (and hence energy pools) by c > 0."""
        return self.replace(N_f0=c * self.N_f0, N_m0=c * self.N_m0)

    def initial_state(self) -> PopulationState:
        """All flies start young with full reserves; nothing laid yet."""
        return PopulationState(N_f_y=self.N_f0, N_m_y=self.N_m0,
                               E_f=self.E_f0, E_m=self.E_m0)

    def stage_norm(self) -> float:
        """Divisor applied to the stage curve (1.0 when un-normalized)."""
        if self.stage_ref_temp is None:
            return 1.0
        return logan10_rate(self.stage_ref_temp, self.temp_stage)


def mortality(E: float, E0: float) -> float:
    """Per-day death rate from reserve depletion, clamped to [0, 1]."""
    if E0 <= 0:
        raise InvalidInitialEnergy(f"E0 must be > 0, got {E0}")
    return min(max(1.0 - E / E0, 0.0), 1.0)


def transition_rates(T: float, tau: float,
                     params: ModelParams) -> tuple[float, float, float, float, float]:
    """Effective per-day stage-transition rates at cage conditions (T, tau).

    All five scale with the stage temperature curve; the pairing rate (third
    entry) additionally scales with the photoperiod response.
    """
    r_stage = logan10_rate(T, params.temp_stage) / params.stage_norm()
    r_light = light_rate(tau, params.light)
    return (params.k1 * r_stage,
            params.k2 * r_stage,
            params.k3 * r_stage * r_light,
            params.k4 * r_stage,
            params.k5 * r_stage)


def _mated_mortality(mu_f: float, mu_m: float, rule: str) -> float:
    if rule == "female":
        return mu_f
    if rule == "male":
        return mu_m
    if rule == "min":
        return min(mu_f, mu_m)
    if rule == "max":
        return max(mu_f, mu_m)
    return 0.5 * (mu_f + mu_m)


def rhs(state: PopulationState, u: ControlInput, params: ModelParams,
        mortality_override: tuple[float, float] | None = None) -> PopulationState:
    """Time derivative of every state (per day) at the given conditions.

    ``mortality_override`` substitutes (mu_f, mu_m) for the energy-derived
    hazards; it exists so tests can switch mortality off and verify that
    fly counts are conserved along the stage chain.
    """
    y = state.to_array()
    if not np.all(np.isfinite(y)):
        raise NonFiniteState("state contains NaN or infinity")

    k1, k2, k3, k4, k5 = transition_rates(u.T, u.tau, params)
    r_energy = logan10_rate(u.T, params.temp_energy)
    r_egg = logan10_rate(u.T, params.temp_egg)

    if mortality_override is None:
        mu_f = mortality(state.E_f, params.E_f0)
        mu_m = mortality(state.E_m, params.E_m0)
    else:
        mu_f, mu_m = mortality_override
    mu_fm = _mated_mortality(mu_f, mu_m, params.mated_mortality)

    mate_flux = k3 * state.N_f_act * state.N_m_act / params.N_m0
    n_f = state.N_f_y + state.N_f_act + state.N_mate + state.N_fert + state.N_f_old
    n_m = state.N_m_y + state.N_m_act + state.N_mate + state.N_m_old
    egg_flux = r_egg * params.feed.k_fed2 * params.k_ovi * state.N_fert

    fed = params.feed
    # drains freeze once a pool is depleted: the reserves are spent per
    # living fly, so without the freeze E would cross zero at finite slope
    dE_f = 0.0
    if state.E_f > 0.0:
        dE_f = (-(fed.k_fed1_f / r_energy) * (params.beta_f + params.gamma_f * mu_f) * n_f
                - (params.eps_f / (fed.k_fed2 * r_egg)) * egg_flux)
    dE_m = 0.0
    if state.E_m > 0.0:
        dE_m = (-(fed.k_fed1_m / r_energy) * (params.beta_m + params.gamma_m * mu_m) * n_m
                - params.eps_m * state.N_mate)
    return PopulationState(
        N_f_y=-k1 * state.N_f_y - mu_f * state.N_f_y,
        N_m_y=-k2 * state.N_m_y - mu_m * state.N_m_y,
        N_f_act=k1 * state.N_f_y - mate_flux - mu_f * state.N_f_act,
        N_m_act=k2 * state.N_m_y - mate_flux - mu_m * state.N_m_act,
        N_mate=mate_flux - k4 * state.N_mate - mu_fm * state.N_mate,
        N_fert=k4 * state.N_mate - k5 * state.N_fert - mu_f * state.N_fert,
        N_f_old=k5 * state.N_fert - mu_f * state.N_f_old,
        N_m_old=k4 * state.N_mate - mu_m * state.N_m_old,
        E_f=dE_f,
        E_m=dE_m,
        m_e=egg_flux,
    )


def pack_params(params: ModelParams) -> np.ndarray:
    """Flatten a ModelParams into the float64 layout the kernels consume."""
    P = np.empty(_kernel.P_SIZE)
    P[0:5] = (params.k1, params.k2, params.k3, params.k4, params.k5)
    P[5] = params.k_ovi
    P[6], P[7] = params.eps_f, params.eps_m
    P[8], P[9] = params.beta_f, params.beta_m
    P[10], P[11] = params.gamma_f, params.gamma_m
    P[12], P[13], P[14] = (params.feed.k_fed1_f, params.feed.k_fed1_m,
                           params.feed.k_fed2)
    P[15:21] = params.temp_energy.as_tuple()
    P[21:27] = params.temp_stage.as_tuple()
    P[27:33] = params.temp_egg.as_tuple()
    P[33], P[34] = params.light.a1, params.light.a2
    P[35], P[36] = params.N_f0, params.N_m0
    P[37] = params.stage_norm()
    P[38] = _MATED_MORTALITY_CODE[params.mated_mortality]
    return P
