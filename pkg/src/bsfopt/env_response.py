"""Environmental response curves for the breeding-cage model.

Three temperature curves share one functional form (a modified Logan
equation with a lethal upper threshold):

    rate(T) = alpha / (1 + k_L * exp(-p * (T - T_R)) + exp(-(T_let - T) / dT))

one curve scales energy expenditure (its peak near 22-23 degC is where
adult flies live longest), one scales the life-stage transition rates, and
one scales egg output per fertilized female. Photoperiod acts through a
saturating exponential: more light hours per day raise the chance of
finding a mating partner, with diminishing returns. Diet enters as three
multiplicative factors (energy drain per sex, egg output).

The fitted coefficients shipped here are exposed through :func:`preset`
and :func:`feed_preset`; :func:`presets_document` mirrors them as a plain
JSON-ready dict.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DENOMINATOR_FLOOR = 1e-9

DIETS = ("none", "water", "agar", "milk")


class DenominatorNearZero(ValueError):
    """Temperature-curve denominator collapsed; parameter set is invalid."""


class OutOfRange(ValueError):
    """Input outside the physically meaningful domain."""


class UnknownDiet(KeyError):
    """Diet name not in the shipped table."""


@dataclass(frozen=True)
class Logan10Params:
    """Coefficients of one unimodal temperature-response curve.

    alpha is the maximum rate, k_L and p shape the low-temperature rise,
    T_let is the lethal maximum temperature, T_R a reference temperature
    and dT the width of the high-temperature boundary layer (degC).
    """

    alpha: float
    k_L: float
    p: float
    T_let: float
    T_R: float
    dT: float

    def __post_init__(self):
        for name in ("alpha", "k_L", "p", "T_let", "T_R", "dT"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.dT <= 0:
            raise ValueError("dT must be > 0")
        if self.T_let <= self.T_R:
            raise ValueError("T_let must exceed T_R")

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.alpha, self.k_L, self.p, self.T_let, self.T_R, self.dT)


@dataclass(frozen=True)
class LightParams:
    """Saturating photoperiod response: a1 * (1 - exp(-a2 * tau))."""

    a1: float
    a2: float

    def __post_init__(self):
        if self.a1 <= 0 or self.a2 <= 0:
            raise ValueError("a1 and a2 must be > 0")


@dataclass(frozen=True)
class FeedParams:
    """Diet factors: energy drain per sex (k_fed1_*) and egg output (k_fed2)."""

    diet: str
    k_fed1_f: float
    k_fed1_m: float
    k_fed2: float

    def __post_init__(self):
        if min(self.k_fed1_f, self.k_fed1_m, self.k_fed2) <= 0:
            raise ValueError("feed factors must be > 0")


# fitted coefficients of the three temperature curves
_TEMPERATURE_TABLE = {
    "energy": Logan10Params(0.08, -0.9753, -0.0157, 40.0, 15.0, 10.0),
    "stage": Logan10Params(2.3823, -0.6729, -0.0329, 40.0, 15.0, 15.0),
    "egg": Logan10Params(0.511, -0.2342, -0.0824, 40.0, 20.0, 2.0),
}

_LIGHT_TABLE = LightParams(a1=1.8825, a2=0.3711)

_FEED_TABLE = {
    "none": FeedParams("none", 1.69, 3.12, 2.26),
    "water": FeedParams("water", 1.27, 1.04, 1.78),
    "agar": FeedParams("agar", 1.0, 1.0, 3.03),
    "milk": FeedParams("milk", 0.58, 0.87, 4.06),
}


def _denominator(T, params: Logan10Params):
    theta = (params.T_let - T) / params.dT
    with np.errstate(over="ignore"):
        return 1.0 + params.k_L * np.exp(-params.p * (T - params.T_R)) + np.exp(-theta)


def logan10_rate(T, params: Logan10Params):
    """Evaluate the temperature curve at T (degC). Scalar or ndarray.

    Raises DenominatorNearZero when the denominator magnitude falls below
    1e-9, which signals an invalid parameter set (possible while a fitter
    probes the parameter space), not a physical regime.
    """
    T_arr = np.asarray(T, dtype=float)
    if not np.all(np.isfinite(T_arr)):
        raise OutOfRange("temperature must be finite")
    den = _denominator(T_arr, params)
    if np.any(np.abs(den) < DENOMINATOR_FLOOR):
        raise DenominatorNearZero(
            f"response denominator below {DENOMINATOR_FLOOR:g} for params {params}")
    out = params.alpha / den
    return float(out) if T_arr.ndim == 0 else out


def light_rate(tau, params: LightParams):
    """Evaluate the photoperiod response at tau hours/day in [0, 24]."""
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(tau_arr < 0.0) or np.any(tau_arr > 24.0):
        raise OutOfRange("photoperiod must lie in [0, 24] h/day")
    out = params.a1 * (1.0 - np.exp(-params.a2 * tau_arr))
    return float(out) if tau_arr.ndim == 0 else out


def check_denominator_grid(params: Logan10Params, step: float = 0.1) -> None:
    """Verify the denominator stays above the floor on [T_R, T_let]."""
    grid = np.arange(round(params.T_R * 10), round(params.T_let * 10) + 1) / 10.0
    den = _denominator(grid, params)
    if np.any(np.abs(den) < DENOMINATOR_FLOOR):
        worst = grid[np.argmin(np.abs(den))]
        raise DenominatorNearZero(
            f"denominator below {DENOMINATOR_FLOOR:g} at T={worst:.1f} degC")


def preset(kind: str) -> Logan10Params:
    """Return the shipped temperature curve: 'energy', 'stage' or 'egg'."""
    try:
        params = _TEMPERATURE_TABLE[kind]
    except KeyError:
        raise KeyError(f"unknown temperature curve {kind!r}; "
                       f"expected one of {sorted(_TEMPERATURE_TABLE)}") from None
    check_denominator_grid(params)
    return params


def light_preset() -> LightParams:
    """Return the shipped photoperiod response coefficients."""
    return _LIGHT_TABLE


def feed_preset(diet: str) -> FeedParams:
    """Return the shipped factors for one diet: none, water, agar or milk."""
    try:
        return _FEED_TABLE[diet]
    except KeyError:
        raise UnknownDiet(f"unknown diet {diet!r}; expected one of {DIETS}") from None


def presets_document() -> dict:
    """All shipped coefficients as a JSON-ready document."""
    temperature = {}
    for kind, p in _TEMPERATURE_TABLE.items():
        temperature[kind] = {"alpha": p.alpha, "kL": p.k_L, "p": p.p,
                             "Tlet": p.T_let, "TR": p.T_R, "dT": p.dT}
    feed = {}
    for diet, f in _FEED_TABLE.items():
        feed[diet] = {"kFed1f": f.k_fed1_f, "kFed1m": f.k_fed1_m, "kFed2": f.k_fed2}
    return {
        "temperature": temperature,
        "light": {"a1": _LIGHT_TABLE.a1, "a2": _LIGHT_TABLE.a2},
        "feed": feed,
    }
