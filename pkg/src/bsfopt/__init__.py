"""Black-soldier-fly egg production: simulator and schedule optimizer.

The package models an adult BSF breeding cage as a compartmental life
cycle (young / active / mated / fertilized / old, per sex) coupled to
energy reserves that only drain, with cage temperature, photoperiod and
diet steering transition rates, mortality and egg output. On top of the
simulator sit a least-squares fitter for the response curves and a
projected-gradient solver for daily temperature/light schedules.
"""

from .env_response import (
    FeedParams,
    LightParams,
    Logan10Params,
    feed_preset,
    light_preset,
    light_rate,
    logan10_rate,
    preset,
    presets_document,
)
from .dynamics import (
    ControlInput,
    ModelParams,
    PopulationState,
    mortality,
    rhs,
    transition_rates,
)
from .simulate import (
    ControlSchedule,
    Metrics,
    Trajectory,
    calibrate_scale,
    integrate,
    metrics,
    time_to_mass,
)
from .calibrate import DataSet, FitResult, fit_light, fit_logan10
from .optimize import (
    ComparisonReport,
    OCPResult,
    OCPWeights,
    SolveOptions,
    compare,
    fd_gradient,
    objective,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "ControlInput", "ControlSchedule", "ComparisonReport", "DataSet",
    "FeedParams", "FitResult", "LightParams", "Logan10Params", "Metrics",
    "ModelParams", "OCPResult", "OCPWeights", "PopulationState",
    "SolveOptions", "Trajectory", "calibrate_scale", "compare",
    "feed_preset", "fit_light", "fit_logan10", "fd_gradient", "integrate",
    "light_preset", "light_rate", "logan10_rate", "metrics", "mortality",
    "objective", "preset", "presets_document", "rhs", "solve",
    "time_to_mass", "transition_rates",
]
