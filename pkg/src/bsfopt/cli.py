"""Command-line interface.

Subcommands:
    simulate  --config cfg.json --out-dir DIR
    optimize  --config cfg.json --out-dir DIR [--seed N]
    fit       --curve {logan10|light} --data data.csv --init init.json --out fit.json
    compare   --config cfg.json --schedule-a a.csv --schedule-b b.csv [--out out.json]

Exit codes: 0 success, 2 configuration/input error, 3 numerical failure,
4 fit did not converge (result file is still written).

Output files are written atomically (temp file + rename) and contain no
timestamps, so identical config and seed give byte-identical artifacts.
The BSF_LOG environment variable (error|info|debug) sets verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import calibrate
from .config import ConfigError, load_config
from .env_response import LightParams, Logan10Params
from .optimize import NoDescentDirection, compare as compare_schedules, solve
from .simulate import (
    ControlSchedule,
    NegativeState,
    NumericalBlowup,
    integrate,
    metrics,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NO_CONVERGENCE = 4

log = logging.getLogger("bsfopt")


def _setup_logging() -> None:
    level = os.environ.get("BSF_LOG", "info").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        level = "info"
    logging.basicConfig(stream=sys.stderr, level=levels[level],
                        format="%(levelname)s %(name)s: %(message)s")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _trajectory_csv_text(traj) -> str:
    from .simulate import TRAJECTORY_HEADER
    lines = [TRAJECTORY_HEADER]
    for t, row in zip(traj.times, traj.states):
        lines.append(f"{t:.17g}," + ",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def _schedule_csv_text(schedule: ControlSchedule) -> str:
    lines = ["day,T_degC,tau_h"]
    for d in range(schedule.days):
        lines.append(f"{d},{schedule.T[d]:.17g},{schedule.tau[d]:.17g}")
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    params = cfg.to_model_params()
    schedule = cfg.to_schedule()
    log.info("simulate: %d days, diet=%s, N_f0=%.4g", schedule.days,
             cfg.diet, params.N_f0)
    traj = integrate(params.initial_state(), schedule, params, cfg.dt)
    out_dir = Path(args.out_dir)
    _atomic_write(out_dir / "trajectory.csv", _trajectory_csv_text(traj))
    _atomic_write(out_dir / "metrics.json", _dump_json(metrics(traj).as_dict()))
    log.info("simulate: wrote %s", out_dir / "metrics.json")
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.solver.seed = args.seed
    params = cfg.to_model_params()
    init = cfg.to_schedule()
    log.info("optimize: %d days, seed=%d, max_iters=%d", init.days,
             cfg.solver.seed, cfg.solver.max_iters)
    result = solve(params, cfg.weights, init, cfg.solver)
    out_dir = Path(args.out_dir)
    _atomic_write(out_dir / "optimal_schedule.csv",
                  _schedule_csv_text(result.schedule))
    _atomic_write(out_dir / "ocp_result.json", _dump_json(result.as_dict()))
    benchmark = ControlSchedule.constant(init.days, 25.0, 16.0)
    report = compare_schedules(benchmark, result.schedule, params, cfg.weights,
                               cfg.dt)
    _atomic_write(out_dir / "comparison.json", _dump_json(
        {"benchmark": report.as_dict()["a"], "optimal": report.as_dict()["b"]}))
    log.info("optimize: objective %.6g (benchmark %.6g)", result.objective,
             result.benchmark_objective)
    return EXIT_OK


def _load_fit_init(path: Path, curve: str):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read init {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"init {path} is not valid JSON: {exc}") from exc
    try:
        if curve == "logan10":
            init = Logan10Params(alpha=doc["alpha"], k_L=doc["kL"], p=doc["p"],
                                 T_let=doc["Tlet"], T_R=doc["TR"], dT=doc["dT"])
            fixed = tuple(doc.get("fixed", ()))
            return init, fixed
        init = LightParams(a1=doc["a1"], a2=doc["a2"])
        return init, ()
    except KeyError as exc:
        raise ConfigError(f"init {path} missing field {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"init {path}: {exc}") from exc


def cmd_fit(args) -> int:
    try:
        data = calibrate.DataSet.from_csv(args.data)
    except OSError as exc:
        raise ConfigError(f"cannot read data {args.data}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"data {args.data}: {exc}") from exc
    init, fixed = _load_fit_init(Path(args.init), args.curve)
    try:
        if args.curve == "logan10":
            result = calibrate.fit_logan10(data, init, fixed=fixed)
        else:
            result = calibrate.fit_light(data, init)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _atomic_write(Path(args.out), _dump_json(result.as_dict()))
    log.info("fit: %s after %d iterations (rmse %.3g)", result.status,
             result.iterations, result.rmse)
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    params = cfg.to_model_params()
    try:
        sched_a = ControlSchedule.from_csv(args.schedule_a)
        sched_b = ControlSchedule.from_csv(args.schedule_b)
    except OSError as exc:
        raise ConfigError(f"cannot read schedule: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"schedule: {exc}") from exc
    report = compare_schedules(sched_a, sched_b, params, cfg.weights, cfg.dt)
    text = _dump_json(report.as_dict())
    if args.out:
        _atomic_write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bsfopt",
        description="Black-soldier-fly egg production: simulate, fit, optimize.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one schedule, write trajectory+metrics")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out-dir", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_opt = sub.add_parser("optimize", help="solve for the best daily schedule")
    p_opt.add_argument("--config", required=True)
    p_opt.add_argument("--out-dir", required=True)
    p_opt.add_argument("--seed", type=int, default=None)
    p_opt.set_defaults(func=cmd_optimize)

    p_fit = sub.add_parser("fit", help="least-squares fit of a response curve")
    p_fit.add_argument("--curve", required=True, choices=("logan10", "light"))
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--init", required=True)
    p_fit.add_argument("--out", required=True)
    p_fit.set_defaults(func=cmd_fit)

    p_cmp = sub.add_parser("compare", help="side-by-side metrics of two schedules")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--schedule-a", required=True)
    p_cmp.add_argument("--schedule-b", required=True)
    p_cmp.add_argument("--out", default=None)
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (NumericalBlowup, NegativeState, NoDescentDirection,
            FloatingPointError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
