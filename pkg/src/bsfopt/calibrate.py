"""Damped least-squares fitting of the response curves to tabular data.

A small Levenberg-style engine drives both fits: Gauss-Newton steps with
multiplicative damping on the scaled normal equations
(J'J + lambda*diag(J'J)), lambda growing 10x on every rejected trial and
shrinking 10x on acceptance. Damping against diag(J'J) rather than the
identity makes the iterates invariant to uniform weight rescaling.
Jacobians come from forward differences; trial points whose residuals
cannot be evaluated (curve pole, overflow) simply count as rejected.

Outcomes are reported, not raised: a fit that stalls (damping escalated
past 1e12 -- typically an underdetermined problem) or runs out of
iterations still returns its best parameters with ``converged=False`` and
a status string, so callers can persist partial results.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .env_response import LightParams, Logan10Params

LOGAN_FIELDS = ("alpha", "k_L", "p", "T_let", "T_R", "dT")
LIGHT_FIELDS = ("a1", "a2")

DEFAULT_MAX_ITER = 200
DEFAULT_TOL = 1e-10        # relative objective decrease on an accepted step
LAMBDA_INIT = 1e-3
LAMBDA_MAX = 1e12

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERATIONS = "max_iterations"
STATUS_SINGULAR = "singular_jacobian"


@dataclass
class DataSet:
    """Abscissae, observations and optional per-point weights."""

    inputs: np.ndarray
    observations: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.inputs = np.atleast_1d(np.asarray(self.inputs, dtype=float))
        self.observations = np.atleast_1d(np.asarray(self.observations, dtype=float))
        if self.inputs.shape != self.observations.shape:
            raise ValueError("inputs and observations must have equal length")
        if self.weights is not None:
            self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
            if self.weights.shape != self.inputs.shape:
                raise ValueError("weights must match inputs in length")
            if np.any(self.weights < 0):
                raise ValueError("weights must be >= 0")

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    @classmethod
    def from_csv(cls, path) -> "DataSet":
        """Read a `x,y[,w]` CSV (header required)."""
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if rows.shape[1] == 2:
            return cls(rows[:, 0], rows[:, 1])
        if rows.shape[1] == 3:
            return cls(rows[:, 0], rows[:, 1], rows[:, 2])
        raise ValueError("data CSV needs columns x,y or x,y,w")


@dataclass
class FitResult:
    """Fitted parameter vector plus fit diagnostics.

    ``cost_history`` records the weighted sum of squares after every
    accepted step (strictly decreasing by construction).
    """

    params: np.ndarray
    rmse: float
    iterations: int
    converged: bool
    status: str
    cost_history: list[float]

    def as_dict(self) -> dict:
        return {"params": [float(v) for v in self.params],
                "rmse": self.rmse, "iterations": self.iterations,
                "converged": self.converged, "status": self.status,
                "costHistory": [float(v) for v in self.cost_history]}

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _levenberg(residual, p0: np.ndarray, max_iter: int, tol: float):
    """Minimize sum(residual(p)**2).

    Returns (p, cost, iterations, status, cost_history). ``residual`` may
    return None for unevaluable trial points; those count as rejections.
    """
    p = np.asarray(p0, dtype=float).copy()
    r = residual(p)
    if r is None:
        raise ValueError("residual not evaluable at the initial guess")
    cost = float(r @ r)
    history = [cost]
    lam = LAMBDA_INIT
    status = STATUS_MAX_ITERATIONS
    it = 0
    for it in range(1, max_iter + 1):
        J = np.empty((r.size, p.size))
        for j in range(p.size):
            h = 1e-6 * max(1.0, abs(p[j]))
            pj = p.copy()
            pj[j] += h
            rj = residual(pj)
            if rj is None:
                pj[j] = p[j] - h
                rj = residual(pj)
                if rj is None:
                    return p, cost, it, STATUS_SINGULAR, history
                h = -h
            J[:, j] = (rj - r) / h
        grad = J.T @ r
        if cost == 0.0 or np.abs(grad).max() <= 1e-12 * max(1.0, cost):
            status = STATUS_CONVERGED
            break
        A = J.T @ J
        d = np.diag(A).copy()
        dmax = d.max()
        d[d <= 0.0] = dmax if dmax > 0.0 else 1.0
        accepted = False
        while lam <= LAMBDA_MAX:
            try:
                step = np.linalg.solve(A + lam * np.diag(d), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            r_new = residual(p + step)
            cost_new = float(r_new @ r_new) if r_new is not None else np.inf
            if np.isfinite(cost_new) and cost_new < cost:
                rel_decrease = (cost - cost_new) / max(cost, 1e-300)
                p = p + step
                r, cost = r_new, cost_new
                history.append(cost)
                lam = max(lam / 10.0, 1e-15)
                accepted = True
                if rel_decrease < tol:
                    status = STATUS_CONVERGED
                break
            lam *= 10.0
        if not accepted:
            status = STATUS_SINGULAR
            break
        if status == STATUS_CONVERGED:
            break
    return p, cost, it, status, history


def _weighted(data: DataSet):
    sw = np.ones(len(data)) if data.weights is None else np.sqrt(data.weights)
    return sw


def _underdetermined_result(data: DataSet, residual, free_init: np.ndarray,
                            full_init: np.ndarray) -> FitResult:
    """Fewer points than free parameters: report, don't fit.

    The normal equations are rank-deficient by construction, so this is
    surfaced as a singular-jacobian non-convergence with the initial guess
    echoed back (callers still get a well-formed result to persist).
    """
    r0 = residual(free_init)
    rmse0 = float("nan")
    if r0 is not None:
        rmse0 = float(np.sqrt((r0 @ r0) / len(data)))
    return FitResult(params=full_init, rmse=rmse0, iterations=0,
                     converged=False, status=STATUS_SINGULAR, cost_history=[])


def fit_logan10(data: DataSet, init: Logan10Params,
                fixed: tuple[str, ...] = (),
                max_iter: int = DEFAULT_MAX_ITER,
                tol: float = DEFAULT_TOL) -> FitResult:
    """Fit the temperature curve; ``fixed`` names fields held at their init value.

    The returned parameter vector is the full six-tuple in the order
    (alpha, k_L, p, T_let, T_R, dT) regardless of which fields were free.
    """
    for name in fixed:
        if name not in LOGAN_FIELDS:
            raise ValueError(f"unknown field {name!r}; expected among {LOGAN_FIELDS}")
    free_idx = [i for i, name in enumerate(LOGAN_FIELDS) if name not in fixed]
    if not free_idx:
        raise ValueError("at least one parameter must be free")

    full0 = np.array(init.as_tuple())
    sw = _weighted(data)
    x, y = data.inputs, data.observations

    def residual(free):
        full = full0.copy()
        full[free_idx] = free
        alpha, k_L, p, T_let, T_R, dT = full
        if dT == 0.0:
            return None
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            den = 1.0 + k_L * np.exp(-p * (x - T_R)) + np.exp(-(T_let - x) / dT)
            if np.any(np.abs(den) < 1e-300) or not np.all(np.isfinite(den)):
                return None
            r = sw * (alpha / den - y)
        return r if np.all(np.isfinite(r)) else None

    if len(data) < len(free_idx):
        return _underdetermined_result(data, residual, full0[free_idx], full0)

    p_free, cost, it, status, history = _levenberg(
        residual, full0[free_idx], max_iter, tol)
    full = full0.copy()
    full[free_idx] = p_free
    return FitResult(params=full, rmse=float(np.sqrt(cost / len(data))),
                     iterations=it, converged=status == STATUS_CONVERGED,
                     status=status, cost_history=history)


def fit_light(data: DataSet, init: LightParams,
              max_iter: int = DEFAULT_MAX_ITER,
              tol: float = DEFAULT_TOL) -> FitResult:
    """Fit the saturating photoperiod response (two free parameters)."""
    sw = _weighted(data)
    x, y = data.inputs, data.observations

    def residual(pv):
        a1, a2 = pv
        with np.errstate(over="ignore", invalid="ignore"):
            r = sw * (a1 * (1.0 - np.exp(-a2 * x)) - y)
        return r if np.all(np.isfinite(r)) else None

    p0 = np.array([init.a1, init.a2])
    if len(data) < 2:
        return _underdetermined_result(data, residual, p0, p0)
    p, cost, it, status, history = _levenberg(residual, p0, max_iter, tol)
    return FitResult(params=p, rmse=float(np.sqrt(cost / len(data))),
                     iterations=it, converged=status == STATUS_CONVERGED,
                     status=status, cost_history=history)
