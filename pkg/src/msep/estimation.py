"""Maximum likelihood estimation of the cascade model.

The log-likelihood over an observation window (0, T] is

    l(theta) = sum_i log lambda(tau_i) - Lambda(T)

with both pieces available in closed form (the mark density does not depend
on theta and is dropped). Maximization runs a downhill simplex over an
unconstrained reparameterization: (log alpha, log beta, log gamma,
log(delta1 - 1), log delta2), with beta and gamma clamped at a small floor so
the boundary value 0 stays reachable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .model import Cascade, ModelParams

__all__ = [
    "FitResult",
    "SimplexConfig",
    "DEFAULT_INITIAL",
    "log_likelihood",
    "to_unconstrained",
    "from_unconstrained",
    "nelder_mead",
    "fit",
]

BETA_FLOOR = 1e-12
GAMMA_FLOOR = 1e-12
DELTA1_GAP_FLOOR = 1e-6

#: Standard starting point for cascade fits.
DEFAULT_INITIAL = ModelParams(alpha=10.0, beta=0.01, gamma=1.0,
                              delta1=1.5, delta2=0.05)


@dataclass(frozen=True)
class SimplexConfig:
    """Settings for the simplex search used by fit()."""

    initial_point: ModelParams = DEFAULT_INITIAL
    relative_tolerance: float = 1e-8
    max_evaluations: int = 2000
    n_restarts: int = 3
    initial_step: float = 0.5
    restart_spread: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if not self.relative_tolerance > 0:
            raise ValueError("relative_tolerance must be positive")
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be at least 1")
        if self.n_restarts < 0:
            raise ValueError("n_restarts must be nonnegative")


@dataclass(frozen=True)
class FitResult:
    theta_hat: ModelParams
    loglik: float
    iterations: int
    converged: bool
    restarts_used: int


def log_likelihood(cascade: Cascade, T: float, params: ModelParams) -> float:
    """Exact log-likelihood of a cascade observed over (0, T].

    Returns -inf (never raises) when the intensity underflows at an event,
    so optimizers can treat invalid corners of the space as very bad.
    """
    T = float(T)
    if not np.isfinite(T) or T < 0:
        raise ValueError("censor time T must be finite and nonnegative")
    if cascade.n_events and cascade.times[-1] > T:
        raise ValueError("cascade contains events after the censor time T")
    return _backend.loglik(cascade.times, cascade.log_marks, T,
                           *params.astuple())


def to_unconstrained(params: ModelParams) -> np.ndarray:
    """Map parameters to R^5; beta/gamma and delta1-1 are floored first."""
    return np.array([
        np.log(params.alpha),
        np.log(max(params.beta, BETA_FLOOR)),
        np.log(max(params.gamma, GAMMA_FLOOR)),
        np.log(max(params.delta1 - 1.0, DELTA1_GAP_FLOOR)),
        np.log(params.delta2),
    ])


def from_unconstrained(x) -> ModelParams:
    """Inverse of to_unconstrained; output always satisfies the constraints.

    Coordinates are clipped to +-700 before exponentiation so that a
    wandering optimizer proposal maps to an extreme but finite parameter
    vector instead of overflowing to infinity.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (5,):
        raise ValueError("unconstrained vector must have 5 coordinates")
    x = np.clip(x, -700.0, 700.0)
    return ModelParams(
        alpha=float(np.exp(x[0])),
        beta=float(max(np.exp(x[1]), BETA_FLOOR)),
        gamma=float(max(np.exp(x[2]), GAMMA_FLOOR)),
        delta1=float(1.0 + max(np.exp(x[3]), DELTA1_GAP_FLOOR)),
        delta2=float(np.exp(x[4])),
    )


def nelder_mead(objective, x0, *, relative_tolerance=1e-8,
                max_evaluations=2000, initial_step=0.5):
    """Minimize objective from x0 by the downhill simplex method.

    Coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
    Terminates when the relative spread of vertex values drops to the
    tolerance or the evaluation budget runs out; never raises on bad values
    (non-finite objective values are treated as +inf). Returns
    (x_best, f_best, diagnostics) where diagnostics carries iterations,
    evaluations and the convergence flag.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    ndim = x0.size
    evals = 0
    budget = int(max_evaluations)

    def f(x):
        nonlocal evals
        evals += 1
        v = objective(x)
        return float(v) if np.isfinite(v) else np.inf

    simplex = [x0.copy()]
    for i in range(ndim):
        v = x0.copy()
        v[i] += initial_step
        simplex.append(v)
    simplex = np.asarray(simplex)
    values = np.array([f(v) for v in simplex])

    def spread_small():
        fb, fw = values[order[0]], values[order[-1]]
        if not np.isfinite(fw):
            return False
        denom = abs(fb) + abs(fw)
        return (fw - fb) <= relative_tolerance * denom or fw == fb

    iterations = 0
    converged = False
    order = np.argsort(values, kind="stable")
    while True:
        if spread_small():
            converged = True
            break
        if evals >= budget:
            break
        iterations += 1
        best, worst = order[0], order[-1]
        second_worst = order[-2]
        centroid = (simplex.sum(axis=0) - simplex[worst]) / ndim
        xr = centroid + 1.0 * (centroid - simplex[worst])
        fr = f(xr)
        if fr < values[order[0]]:
            xe = centroid + 2.0 * (centroid - simplex[worst])
            fe = f(xe)
            if fe < fr:
                simplex[worst], values[worst] = xe, fe
            else:
                simplex[worst], values[worst] = xr, fr
        elif fr < values[second_worst]:
            simplex[worst], values[worst] = xr, fr
        else:
            if fr < values[worst]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid - 0.5 * (centroid - simplex[worst])
            fc = f(xc)
            if fc < min(fr, values[worst]):
                simplex[worst], values[worst] = xc, fc
            else:
                # shrink toward the best vertex
                for i in range(len(simplex)):
                    if i == best:
                        continue
                    simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best])
                    values[i] = f(simplex[i])
        order = np.argsort(values, kind="stable")

    order = np.argsort(values, kind="stable")
    ix = order[0]
    diagnostics = {
        "iterations": iterations,
        "evaluations": evals,
        "converged": converged,
    }
    return simplex[ix].copy(), float(values[ix]), diagnostics


def fit(cascade: Cascade, T: float, config: SimplexConfig | None = None) -> FitResult:
    """Maximum likelihood fit of a cascade observed over (0, T].

    Runs the simplex from the configured start and then n_restarts more
    times from the best point so far, perturbed multiplicatively (factor
    e^{+-s} per coordinate on the natural scale), keeping the best optimum
    found. Likelihood surfaces of short cascades can hold several local
    basins, so the restarts always run rather than only on non-convergence.
    The returned log-likelihood is never below that of the initial point.
    """
    config = config or SimplexConfig()
    if cascade.n_events == 0:
        raise ValueError("cannot fit an empty cascade")
    if cascade.times[-1] > T:
        raise ValueError("cascade contains events after the censor time T")

    def objective(x):
        return -log_likelihood(cascade, T, from_unconstrained(x))

    rng = np.random.default_rng(config.seed)
    x_start = to_unconstrained(config.initial_point)
    best_x, best_f, diag = nelder_mead(
        objective, x_start,
        relative_tolerance=config.relative_tolerance,
        max_evaluations=config.max_evaluations,
        initial_step=config.initial_step)
    iterations = diag["iterations"]
    best_converged = diag["converged"]
    restarts = 0
    while restarts < config.n_restarts:
        restarts += 1
        x_start = best_x + rng.uniform(-config.restart_spread,
                                       config.restart_spread, size=5)
        x, fval, diag = nelder_mead(
            objective, x_start,
            relative_tolerance=config.relative_tolerance,
            max_evaluations=config.max_evaluations,
            initial_step=config.initial_step)
        iterations += diag["iterations"]
        if fval < best_f:
            best_x, best_f = x, fval
            best_converged = diag["converged"]
    theta = from_unconstrained(best_x)
    return FitResult(theta_hat=theta,
                     loglik=-best_f,
                     iterations=iterations,
                     converged=best_converged,
                     restarts_used=restarts)
