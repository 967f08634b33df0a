"""Shared fixtures and oracle helpers for the test suite."""

import numpy as np
import pytest
from scipy.integrate import quad

from msep.model import Cascade, ModelParams


def random_params(rng, beta_zero_ok=True):
    """Draw a valid parameter vector covering the ranges seen in practice."""
    beta = float(rng.uniform(0.0, 0.25)) if beta_zero_ok else float(rng.uniform(0.001, 0.25))
    return ModelParams(
        alpha=float(rng.uniform(0.5, 20.0)),
        beta=beta,
        gamma=float(rng.uniform(0.05, 8.0)),
        delta1=float(rng.uniform(1.1, 3.0)),
        delta2=float(rng.uniform(0.002, 1.0)),
    )


def random_cascade(rng, max_events=50, t_max=3600.0):
    """A synthetic cascade with sorted times and lognormal-ish integer marks."""
    n = int(rng.integers(0, max_events + 1))
    times = np.sort(rng.uniform(0.0, t_max, size=n))
    marks = np.floor(rng.lognormal(mean=4.0, sigma=2.0, size=n)).astype(np.int64)
    origin = int(np.floor(rng.lognormal(mean=6.0, sigma=1.5)))
    return Cascade(origin_mark=origin, times=times, marks=marks)


def quad_compensator(cascade, params, T, piecewise=True):
    """Independent quadrature oracle for the compensator.

    Integrates the intensity numerically with scipy's adaptive quadrature,
    splitting at event times where the integrand jumps.
    """
    from msep.model import intensity

    def f(s):
        return intensity(s, cascade, params)

    cuts = np.concatenate(([0.0], cascade.times[cascade.times < T], [T]))
    cuts = np.unique(cuts)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        val, _ = quad(f, a, b, limit=200, epsabs=1e-12, epsrel=1e-10)
        total += val
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(42)
