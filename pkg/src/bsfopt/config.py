"""JSON run configuration: parsing, validation and model assembly.

One document drives every CLI command. Validation failures raise
ConfigError with the offending field named, so batch users get actionable
messages. Example:

    {
      "diet": "water",
      "horizon_days": 14,
      "dt": 0.05,
      "initial": {"calibrate_to_mg": 447.6},
      "schedule": {"T": 25.0, "tau": 16.0},
      "weights": {"Q": 1e4, "R11": 1.0, "R22": 1.0, "S": 1e5, "T_amb": 20.0},
      "solver": {"max_iters": 500, "tol": 1e-6, "n_random_starts": 3}
    }

``initial`` gives explicit counts {"N_f0": ..., "N_m0": ...} or a target
final egg mass {"calibrate_to_mg": ...} resolved against this config's
own schedule. ``schedule`` accepts constants, per-day lists, or
{"csv": "path"} (resolved relative to the config file).
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import MATED_MORTALITY_RULES, ModelParams
from .optimize import OCPWeights, SolveOptions
from .simulate import MAX_DT, ControlSchedule, calibrate_scale


class ConfigError(ValueError):
    """Configuration file failed validation; message names the field."""


def _require_number(doc: dict, key: str, lo=None, hi=None, default=None):
    value = doc.get(key, default)
    if value is None:
        raise ConfigError(f"missing required field '{key}'")
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigError(f"field '{key}' must be a number, got {value!r}")
    value = float(value)
    if lo is not None and value < lo:
        raise ConfigError(f"field '{key}' must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"field '{key}' must be <= {hi}, got {value}")
    return value


@dataclass
class RunConfig:
    """Validated run settings; build model objects via the to_* methods."""

    diet: str = "water"
    horizon_days: int = 14
    dt: float = 0.05
    N_f0: float | None = None
    N_m0: float | None = None
    calibrate_to_mg: float | None = None
    schedule_T: float | list[float] = 25.0
    schedule_tau: float | list[float] = 16.0
    schedule_csv: str | None = None
    weights: OCPWeights = field(default_factory=OCPWeights)
    solver: SolveOptions = field(default_factory=SolveOptions)
    mated_mortality: str = "mean"
    stage_ref_temp: float | None = 25.0
    base_dir: Path = field(default_factory=Path)

    def to_schedule(self) -> ControlSchedule:
        if self.schedule_csv is not None:
            path = Path(self.schedule_csv)
            if not path.is_absolute():
                path = self.base_dir / path
            try:
                schedule = ControlSchedule.from_csv(path)
            except OSError as exc:
                raise ConfigError(f"schedule.csv: cannot read {path}: {exc}") from exc
            except ValueError as exc:
                raise ConfigError(f"schedule.csv: {exc}") from exc
        else:
            T = self.schedule_T
            tau = self.schedule_tau
            T_arr = np.full(self.horizon_days, T) if isinstance(T, float) else np.asarray(T, float)
            tau_arr = (np.full(self.horizon_days, tau) if isinstance(tau, float)
                       else np.asarray(tau, float))
            try:
                schedule = ControlSchedule(T_arr, tau_arr)
            except ValueError as exc:
                raise ConfigError(f"schedule: {exc}") from exc
        if schedule.days != self.horizon_days:
            raise ConfigError(
                f"schedule length {schedule.days} != horizon_days {self.horizon_days}")
        return schedule

    def to_model_params(self) -> ModelParams:
        """ModelParams with counts resolved (calibrating if requested)."""
        base = ModelParams.defaults(
            diet=self.diet, N_f0=1.0, N_m0=1.0,
            stage_ref_temp=self.stage_ref_temp,
            mated_mortality=self.mated_mortality)
        if self.calibrate_to_mg is not None:
            n0 = calibrate_scale(self.calibrate_to_mg, self.to_schedule(),
                                 base, self.dt)
            return base.replace(N_f0=n0, N_m0=n0)
        return base.replace(N_f0=self.N_f0, N_m0=self.N_m0)


def _parse_schedule(doc, cfg: RunConfig) -> None:
    sched = doc.get("schedule", {"T": 25.0, "tau": 16.0})
    if not isinstance(sched, dict):
        raise ConfigError("field 'schedule' must be an object")
    if "csv" in sched:
        if not isinstance(sched["csv"], str):
            raise ConfigError("field 'schedule.csv' must be a path string")
        cfg.schedule_csv = sched["csv"]
        return
    for key in ("T", "tau"):
        if key not in sched:
            raise ConfigError(f"missing required field 'schedule.{key}'")
        value = sched[key]
        if isinstance(value, numbers.Real) and not isinstance(value, bool):
            setattr(cfg, f"schedule_{key}", float(value))
        elif isinstance(value, list) and all(
                isinstance(v, numbers.Real) and not isinstance(v, bool) for v in value):
            setattr(cfg, f"schedule_{key}", [float(v) for v in value])
        else:
            raise ConfigError(f"field 'schedule.{key}' must be a number or list")


def _parse_initial(doc, cfg: RunConfig) -> None:
    initial = doc.get("initial")
    if initial is None:
        raise ConfigError("missing required field 'initial' "
                          "(give N_f0/N_m0 or calibrate_to_mg)")
    if not isinstance(initial, dict):
        raise ConfigError("field 'initial' must be an object")
    if "calibrate_to_mg" in initial:
        target = _require_number(initial, "calibrate_to_mg")
        if target <= 0:
            raise ConfigError("field 'initial.calibrate_to_mg' must be > 0")
        cfg.calibrate_to_mg = target
        return
    cfg.N_f0 = _require_number(initial, "N_f0")
    cfg.N_m0 = _require_number(initial, "N_m0")
    if cfg.N_f0 <= 0 or cfg.N_m0 <= 0:
        raise ConfigError("fields 'initial.N_f0'/'initial.N_m0' must be > 0")


def load_config(path) -> RunConfig:
    """Parse and validate a JSON config file."""
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")

    cfg = RunConfig(base_dir=path.parent)

    diet = doc.get("diet", "water")
    if diet not in ("none", "water", "agar", "milk"):
        raise ConfigError(f"field 'diet' must be one of none/water/agar/milk, got {diet!r}")
    cfg.diet = diet

    horizon = doc.get("horizon_days", 14)
    if isinstance(horizon, bool) or not isinstance(horizon, numbers.Integral):
        raise ConfigError(f"field 'horizon_days' must be an integer, got {horizon!r}")
    if horizon < 1:
        raise ConfigError(f"field 'horizon_days' must be >= 1, got {horizon}")
    cfg.horizon_days = int(horizon)

    cfg.dt = _require_number(doc, "dt", default=0.05)
    if not (0.0 < cfg.dt <= MAX_DT):
        raise ConfigError(f"field 'dt' must lie in (0, {MAX_DT}] day, got {cfg.dt}")
    if abs(round(1.0 / cfg.dt) * cfg.dt - 1.0) > 1e-9:
        raise ConfigError(f"field 'dt' must divide 1 day evenly, got {cfg.dt}")

    _parse_initial(doc, cfg)
    _parse_schedule(doc, cfg)

    wdoc = doc.get("weights", {})
    if not isinstance(wdoc, dict):
        raise ConfigError("field 'weights' must be an object")
    try:
        cfg.weights = OCPWeights(
            Q=_require_number(wdoc, "Q", default=1e4),
            R11=_require_number(wdoc, "R11", default=1.0),
            R22=_require_number(wdoc, "R22", default=1.0),
            S=_require_number(wdoc, "S", default=1e5),
            T_amb=_require_number(wdoc, "T_amb", default=20.0))
    except ValueError as exc:
        raise ConfigError(f"weights: {exc}") from exc

    sdoc = doc.get("solver", {})
    if not isinstance(sdoc, dict):
        raise ConfigError("field 'solver' must be an object")
    max_iters = sdoc.get("max_iters", 500)
    if isinstance(max_iters, bool) or not isinstance(max_iters, numbers.Integral) or max_iters < 1:
        raise ConfigError(f"field 'solver.max_iters' must be a positive integer")
    n_rand = sdoc.get("n_random_starts", 3)
    if isinstance(n_rand, bool) or not isinstance(n_rand, numbers.Integral) or n_rand < 0:
        raise ConfigError(f"field 'solver.n_random_starts' must be >= 0")
    cfg.solver = SolveOptions(
        dt=cfg.dt,
        max_iters=int(max_iters),
        tol=_require_number(sdoc, "tol", lo=0.0, default=1e-6),
        seed=int(sdoc.get("seed", 0)),
        n_random_starts=int(n_rand))

    rule = doc.get("mated_mortality", "mean")
    if rule not in MATED_MORTALITY_RULES:
        raise ConfigError(
            f"field 'mated_mortality' must be one of {MATED_MORTALITY_RULES}, got {rule!r}")
    cfg.mated_mortality = rule

    if "stage_ref_temp" in doc:
        ref = doc["stage_ref_temp"]
        cfg.stage_ref_temp = None if ref is None else _require_number(doc, "stage_ref_temp")

    return cfg
