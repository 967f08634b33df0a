"""NumPy fallback for the hot evaluation kernels.

Function-for-function mirror of the compiled extension msep._core; the
backend shim picks one of the two at import time. Pairwise work is chunked
over evaluation points so scratch memory stays bounded for long cascades.
"""

import numpy as np

_ROW_BLOCK = 512


def _phi(t, d1, d2):
    return (d2 * (d1 - 1.0) / d1) * (1.0 + (d2 / d1) * t) ** (-d1)


def _phi_cdf(t, d1, d2):
    return 1.0 - (1.0 + (d2 / d1) * t) ** (1.0 - d1)


def _weights(times, logm, b, g):
    # per-event excitation weight p(tau_i) r(m_i)
    return np.exp(-b * times) * (g * logm)


def loglik(times, logm, T, a, b, g, d1, d2):
    """Exact log-likelihood over the window (0, T].

    sum_i log lambda(tau_i) - Lambda(T), with the left-limit convention for
    lambda at the event times. Returns -inf when any event intensity
    underflows to zero or the value is otherwise non-finite.
    """
    n = times.size
    w = _weights(times, logm, b, g)
    lam = a * _phi(times, d1, d2)
    for lo in range(0, n, _ROW_BLOCK):
        hi = min(lo + _ROW_BLOCK, n)
        dt = times[lo:hi, None] - times[None, :]
        excite = np.where(dt > 0.0, dt, np.nan)
        contrib = w[None, :] * _phi(excite, d1, d2)
        lam[lo:hi] += np.nansum(contrib, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_lam = np.log(lam)
    if not np.all(np.isfinite(log_lam)):
        return -np.inf
    big_lambda = a * _phi_cdf(T, d1, d2) + np.sum(w * _phi_cdf(T - times, d1, d2))
    out = float(np.sum(log_lam) - big_lambda)
    return out if np.isfinite(out) else -np.inf


def intensity_at(ts, times, logm, a, b, g, d1, d2):
    """lambda(t) at each t in ts, left-limit convention (strictly prior events)."""
    w = _weights(times, logm, b, g)
    out = a * _phi(ts, d1, d2)
    for lo in range(0, ts.size, _ROW_BLOCK):
        hi = min(lo + _ROW_BLOCK, ts.size)
        dt = ts[lo:hi, None] - times[None, :]
        excite = np.where(dt > 0.0, dt, np.nan)
        contrib = w[None, :] * _phi(excite, d1, d2)
        out[lo:hi] += np.nansum(contrib, axis=1)
    return out


def compensator_at(ts, times, logm, a, b, g, d1, d2):
    """Lambda(t) at each t in ts; only strictly earlier events contribute."""
    w = _weights(times, logm, b, g)
    out = a * _phi_cdf(ts, d1, d2)
    for lo in range(0, ts.size, _ROW_BLOCK):
        hi = min(lo + _ROW_BLOCK, ts.size)
        dt = ts[lo:hi, None] - times[None, :]
        excite = np.where(dt > 0.0, dt, np.nan)
        contrib = w[None, :] * _phi_cdf(excite, d1, d2)
        out[lo:hi] += np.nansum(contrib, axis=1)
    return out


def shifted_rate_at(us, T, times, logm, a, b, g, d1, d2):
    """Conditional baseline nu~(u) = lambda(T + u) over a frozen history.

    Every supplied event contributes (closed inclusion: events at exactly T
    belong to the history), so this differs from intensity_at at u = 0.
    """
    w = _weights(times, logm, b, g)
    out = a * _phi(T + us, d1, d2)
    for lo in range(0, us.size, _ROW_BLOCK):
        hi = min(lo + _ROW_BLOCK, us.size)
        dt = (T + us[lo:hi, None]) - times[None, :]
        out[lo:hi] += np.sum(w[None, :] * _phi(dt, d1, d2), axis=1)
    return out
