"""Goodness of fit by the random time change.

If the model is right, mapping each event time through the fitted
compensator gives a unit-rate Poisson process on (0, Lambda(T)], so the
transformed times, divided by the horizon Lambda(T), should look like an
i.i.d. uniform sample. A one-sample Kolmogorov-Smirnov test quantifies the
departure from uniformity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .model import Cascade, ModelParams

__all__ = [
    "GofReport",
    "residual_times",
    "ks_uniform_test",
    "gof_report",
    "batch_pass_rate",
]


@dataclass(frozen=True)
class GofReport:
    """Time-change residuals with their K-S uniformity verdict."""

    residuals: np.ndarray
    horizon: float
    ks_statistic: float
    p_value: float
    n: int


def residual_times(cascade: Cascade, T: float, params: ModelParams):
    """Compensator-transformed event times and the transformed horizon.

    residuals[i] = Lambda(tau_i) with the left-limit convention (events at
    exactly tau_i do not contribute to their own residual); the horizon is
    Lambda(T). Residuals are nondecreasing; ties map to equal residuals.
    """
    T = float(T)
    if T < 0 or not np.isfinite(T):
        raise ValueError("censor time must be finite and nonnegative")
    if cascade.n_events and cascade.times[-1] > T:
        raise ValueError("cascade contains events after the censor time")
    eval_at = np.concatenate((cascade.times, [T]))
    vals = _backend.compensator_at(eval_at, cascade.times, cascade.log_marks,
                                   *params.astuple())
    return vals[:-1], float(vals[-1])


def ks_uniform_test(residuals, horizon: float):
    """One-sample K-S test of uniformity on (0, horizon].

    Returns (D, p). D = max(D+, D-) over the rescaled sorted sample; the
    p-value comes from the asymptotic Kolmogorov distribution evaluated at
    (sqrt(n) + 0.12 + 0.11/sqrt(n)) * D. Ties are kept.
    """
    u = np.sort(np.asarray(residuals, dtype=np.float64))
    n = u.size
    if n == 0:
        raise ValueError("need at least one residual")
    if horizon <= 0 or not np.isfinite(horizon):
        raise ValueError("horizon must be positive and finite")
    u = u / horizon
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - u)
    d_minus = np.max(u - (i - 1) / n)
    d = max(d_plus, d_minus)
    en = np.sqrt(n)
    p = _kolmogorov_sf((en + 0.12 + 0.11 / en) * d)
    return float(d), float(p)


def _kolmogorov_sf(x: float) -> float:
    """Tail of the Kolmogorov distribution: 2 sum (-1)^{j-1} exp(-2 j^2 x^2)."""
    if x <= 0.0:
        return 1.0
    two_x2 = 2.0 * x * x
    total = 0.0
    for j in range(1, 100001):
        term = np.exp(-two_x2 * j * j)
        if j % 2:
            total += term
        else:
            total -= term
        if term < 1e-18:
            break
    return float(min(max(2.0 * total, 0.0), 1.0))


def gof_report(cascade: Cascade, T: float, params: ModelParams) -> GofReport:
    """Residual transform plus K-S test in one step."""
    residuals, horizon = residual_times(cascade, T, params)
    d, p = ks_uniform_test(residuals, horizon)
    return GofReport(residuals=residuals, horizon=horizon,
                     ks_statistic=d, p_value=p, n=residuals.size)


def batch_pass_rate(reports, level: float = 0.05) -> float:
    """Fraction of reports whose p-value exceeds the level."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports given")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    return float(np.mean([r.p_value > level for r in reports]))
