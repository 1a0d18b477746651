"""Compiled numerical core: model right-hand side and fixed-step RK4 driver.

Everything here operates on a flat float64 parameter vector (layout below)
so the hot loops stay in numba nopython mode. The readable reference
implementation of the same equations lives in :mod:`bsfopt.dynamics`; the
test suite asserts both paths agree to machine precision.

Packed parameter layout (39 slots):

    0..4    k1..k5            base life-stage transition rates (1/day)
    5       k_ovi             oviposition rate (mg / fertilized fly / day)
    6, 7    eps_f, eps_m      mating / oviposition energy costs
    8, 9    beta_f, beta_m    maintenance energy drains (1/day per fly)
    10, 11  gamma_f, gamma_m  aging energy drains (1/day per fly)
    12..14  k_fed1_f, k_fed1_m, k_fed2   feed factors
    15..20  energy response curve (alpha, k_L, p, T_let, T_R, dT)
    21..26  stage-transition response curve (same field order)
    27..32  egg-production response curve (same field order)
    33, 34  a1, a2            photoperiod response
    35, 36  N_f0, N_m0        initial populations (= initial energy pools)
    37      stage-rate normalization divisor (1.0 disables it)
    38      mated-pair mortality rule code (0 mean, 1 female, 2 male,
            3 min, 4 max)

Integration status codes: 0 ok, 1 non-finite/blow-up, 2 negative state
beyond the roundoff clamp.
"""

import math

import numpy as np
from numba import njit

N_STATE = 11
P_SIZE = 39

STATUS_OK = 0
STATUS_BLOWUP = 1
STATUS_NEGATIVE = 2

BLOWUP_LIMIT = 1e12
NEGATIVE_CLAMP = -1e-9


@njit(cache=True)
def logan10(T, alpha, k_L, p, T_let, T_R, dT):
    theta = (T_let - T) / dT
    return alpha / (1.0 + k_L * math.exp(-p * (T - T_R)) + math.exp(-theta))


@njit(cache=True)
def light_factor(tau, a1, a2):
    return a1 * (1.0 - math.exp(-a2 * tau))


@njit(cache=True)
def rhs_fill(y, T, tau, P, out):
    """Write the 11 state derivatives for control (T, tau) into ``out``."""
    r_stage = logan10(T, P[21], P[22], P[23], P[24], P[25], P[26]) / P[37]
    r_energy = logan10(T, P[15], P[16], P[17], P[18], P[19], P[20])
    r_egg = logan10(T, P[27], P[28], P[29], P[30], P[31], P[32])
    r_light = light_factor(tau, P[33], P[34])

    k1 = P[0] * r_stage
    k2 = P[1] * r_stage
    k3 = P[2] * r_stage * r_light
    k4 = P[3] * r_stage
    k5 = P[4] * r_stage

    mu_f = 1.0 - y[8] / P[35]
    if mu_f < 0.0:
        mu_f = 0.0
    elif mu_f > 1.0:
        mu_f = 1.0
    mu_m = 1.0 - y[9] / P[36]
    if mu_m < 0.0:
        mu_m = 0.0
    elif mu_m > 1.0:
        mu_m = 1.0

    code = P[38]
    if code == 1.0:
        mu_fm = mu_f
    elif code == 2.0:
        mu_fm = mu_m
    elif code == 3.0:
        mu_fm = mu_f if mu_f < mu_m else mu_m
    elif code == 4.0:
        mu_fm = mu_f if mu_f > mu_m else mu_m
    else:
        mu_fm = 0.5 * (mu_f + mu_m)

    # pairing flux: active females meet active males, normalized by N_m0
    mate_flux = k3 * y[2] * y[3] / P[36]
    # living totals per sex; each mated pair holds one fly of each sex
    n_f = y[0] + y[2] + y[4] + y[5] + y[6]
    n_m = y[1] + y[3] + y[4] + y[7]
    egg_flux = r_egg * P[14] * P[5] * y[5]

    out[0] = -k1 * y[0] - mu_f * y[0]
    out[1] = -k2 * y[1] - mu_m * y[1]
    out[2] = k1 * y[0] - mate_flux - mu_f * y[2]
    out[3] = k2 * y[1] - mate_flux - mu_m * y[3]
    out[4] = mate_flux - k4 * y[4] - mu_fm * y[4]
    out[5] = k4 * y[4] - k5 * y[5] - mu_f * y[5]
    out[6] = k5 * y[5] - mu_f * y[6]
    out[7] = k4 * y[4] - mu_m * y[7]
    # a depleted pool stops draining (flies with no reserves die instead
    # of spending further); keeps E >= 0 despite N-proportional drains
    if y[8] > 0.0:
        out[8] = (-(P[12] / r_energy) * (P[8] + P[10] * mu_f) * n_f
                  - (P[6] / (P[14] * r_egg)) * egg_flux)
    else:
        out[8] = 0.0
    if y[9] > 0.0:
        out[9] = (-(P[13] / r_energy) * (P[9] + P[11] * mu_m) * n_m
                  - P[7] * y[4])
    else:
        out[9] = 0.0
    out[10] = egg_flux


@njit(cache=True)
def integrate_trajectory(y0, T_days, tau_days, P, dt, steps_per_day, out):
    """March RK4 over the horizon, recording every step into ``out``.

    ``out`` must be shaped (days * steps_per_day + 1, 11). Controls are held
    constant within each day. Returns (status, samples_written).
    """
    y = y0.copy()
    k1 = np.empty(N_STATE)
    k2 = np.empty(N_STATE)
    k3 = np.empty(N_STATE)
    k4 = np.empty(N_STATE)
    yt = np.empty(N_STATE)
    out[0] = y
    idx = 1
    for d in range(T_days.shape[0]):
        T = T_days[d]
        tau = tau_days[d]
        for _ in range(steps_per_day):
            rhs_fill(y, T, tau, P, k1)
            for i in range(N_STATE):
                yt[i] = y[i] + 0.5 * dt * k1[i]
            rhs_fill(yt, T, tau, P, k2)
            for i in range(N_STATE):
                yt[i] = y[i] + 0.5 * dt * k2[i]
            rhs_fill(yt, T, tau, P, k3)
            for i in range(N_STATE):
                yt[i] = y[i] + dt * k3[i]
            rhs_fill(yt, T, tau, P, k4)
            status = STATUS_OK
            for i in range(N_STATE):
                v = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if v < 0.0:
                    # energy pools cross zero with finite slope when they
                    # deplete: that is saturation, not integrator failure
                    if i == 8 or i == 9 or v >= NEGATIVE_CLAMP:
                        v = 0.0
                    else:
                        status = STATUS_NEGATIVE
                if not np.isfinite(v) or v > BLOWUP_LIMIT:
                    status = STATUS_BLOWUP
                y[i] = v
            out[idx] = y
            idx += 1
            if status != STATUS_OK:
                return status, idx
    return STATUS_OK, idx


@njit(cache=True)
def integrate_day_masses(y0, T_days, tau_days, P, dt, steps_per_day, out_mass):
    """Cheap variant for the optimizer: record only end-of-day egg mass.

    ``out_mass`` must be shaped (days,). Returns a status code.
    """
    y = y0.copy()
    k1 = np.empty(N_STATE)
    k2 = np.empty(N_STATE)
    k3 = np.empty(N_STATE)
    k4 = np.empty(N_STATE)
    yt = np.empty(N_STATE)
    for d in range(T_days.shape[0]):
        T = T_days[d]
        tau = tau_days[d]
        for _ in range(steps_per_day):
            rhs_fill(y, T, tau, P, k1)
            for i in range(N_STATE):
                yt[i] = y[i] + 0.5 * dt * k1[i]
            rhs_fill(yt, T, tau, P, k2)
            for i in range(N_STATE):
                yt[i] = y[i] + 0.5 * dt * k2[i]
            rhs_fill(yt, T, tau, P, k3)
            for i in range(N_STATE):
                yt[i] = y[i] + dt * k3[i]
            rhs_fill(yt, T, tau, P, k4)
            for i in range(N_STATE):
                v = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if v < 0.0:
                    if i == 8 or i == 9 or v >= NEGATIVE_CLAMP:
                        v = 0.0
                    else:
                        return STATUS_NEGATIVE
                if not np.isfinite(v) or v > BLOWUP_LIMIT:
                    return STATUS_BLOWUP
                y[i] = v
        out_mass[d] = y[10]
    return STATUS_OK
