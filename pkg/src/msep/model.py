"""Core types and closed-form operations of the marked self-exciting model.

A cascade is an initial post at time 0 carrying a mark (the author's follower
count) plus the retweet events that follow, each with its own time and mark.
The conditional intensity of the retweet process is

    lambda(t) = nu(t) + sum_{tau_i < t} omega(tau_i, m_i, t - tau_i)

with a separable excitation omega(tau, m, s) = p(tau) r(m) phi(s) built from

    p(tau)  = exp(-beta * tau)                      (infectivity decay)
    r(m)    = gamma * log(m + 1)                    (mark impact, natural log)
    phi(s)  = [d2 (d1 - 1) / d1] (1 + d2 s / d1)^(-d1)   (memory kernel)

and a baseline nu(t) = alpha * phi(t) driven by the initial post. phi is a
probability density on [0, inf); its CDF has the closed form

    Phi(s) = 1 - (1 + d2 s / d1)^(1 - d1)

which makes the compensator of the process available in closed form as well.
All times are seconds since the initial post.
"""

from __future__ import annotations

import dataclasses
import functools
from dataclasses import dataclass

import numpy as np

from . import _backend

__all__ = [
    "Cascade",
    "ModelParams",
    "MarkDistribution",
    "memory_kernel",
    "memory_kernel_cdf",
    "infectivity",
    "impact",
    "intensity",
    "compensator",
    "mean_impact",
]

#: delta1 must stay strictly above 1 by this margin so that the CDF exponent
#: 1 - delta1 is strictly negative.
DELTA1_MARGIN = 1e-6


@dataclass(frozen=True)
class ModelParams:
    """Parameter vector (alpha, beta, gamma, delta1, delta2).

    alpha  > 0   baseline weight of the initial post
    beta   >= 0  infectivity decay rate (1/seconds)
    gamma  >= 0  impact scale applied to log(mark + 1)
    delta1 > 1   memory kernel tail exponent
    delta2 > 0   memory kernel rate scale (1/seconds)
    """

    alpha: float
    beta: float
    gamma: float
    delta1: float
    delta2: float

    def __post_init__(self):
        vals = dataclasses.astuple(self)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError(f"non-finite parameter in {vals}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.delta1 <= 1.0:
            raise ValueError(f"delta1 must exceed 1, got {self.delta1}")
        if self.delta2 <= 0:
            raise ValueError(f"delta2 must be positive, got {self.delta2}")

    def astuple(self):
        return dataclasses.astuple(self)


def _as_event_array(values, name, dtype):
    arr = np.asarray(values, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return arr


@dataclass(frozen=True)
class Cascade:
    """An observed cascade: origin mark plus (time, mark) retweet events.

    Event times are seconds since the origin post, nondecreasing, with equal
    timestamps allowed (ties keep their input order). The origin's mark is
    kept separately and is not part of the event sequence. Instances are
    immutable; the arrays are copied on construction and marked read-only.
    """

    origin_mark: int
    times: np.ndarray
    marks: np.ndarray

    def __post_init__(self):
        times = _as_event_array(self.times, "times", np.float64).copy()
        marks = _as_event_array(self.marks, "marks", np.int64).copy()
        if times.shape != marks.shape:
            raise ValueError("times and marks must have equal length")
        if self.origin_mark < 0:
            raise ValueError("origin mark must be nonnegative")
        if times.size:
            if not np.all(np.isfinite(times)):
                raise ValueError("event times must be finite")
            if times[0] < 0:
                raise ValueError("event times must be nonnegative")
            if np.any(np.diff(times) < 0):
                raise ValueError("event times must be nondecreasing")
            if marks.min() < 0:
                raise ValueError("marks must be nonnegative")
        times.setflags(write=False)
        marks.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "marks", marks)

    @property
    def n_events(self) -> int:
        return int(self.times.size)

    @functools.cached_property
    def log_marks(self) -> np.ndarray:
        """log(m + 1) per event, the mark part of the excitation weights."""
        out = np.log1p(self.marks.astype(np.float64))
        out.setflags(write=False)
        return out


@dataclass(frozen=True)
class MarkDistribution:
    """Empirical mark distribution: the multiset of observed retweet marks."""

    marks: np.ndarray

    def __post_init__(self):
        marks = _as_event_array(self.marks, "marks", np.int64).copy()
        if marks.size and marks.min() < 0:
            raise ValueError("marks must be nonnegative")
        marks.setflags(write=False)
        object.__setattr__(self, "marks", marks)

    def __len__(self) -> int:
        return int(self.marks.size)

    @functools.cached_property
    def mean_log_impact(self) -> float:
        """Mean of log(m + 1) over the multiset (gamma-independent part)."""
        if not len(self):
            raise ValueError("empty mark distribution")
        return float(np.mean(np.log1p(self.marks.astype(np.float64))))

    def mean_impact(self, params: ModelParams) -> float:
        """Average impact r(m) = gamma * log(m + 1) over the multiset."""
        return params.gamma * self.mean_log_impact

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw marks i.i.d. uniformly from the multiset."""
        if not len(self):
            raise ValueError("empty mark distribution")
        idx = rng.integers(0, len(self), size=size)
        return self.marks[idx]


def _check_params(params):
    if not isinstance(params, ModelParams):
        raise TypeError("params must be a ModelParams instance")


def _eval_elementwise(fn, t, allow_zero=True):
    """Apply fn over scalar or array input, validating the domain."""
    arr = np.asarray(t, dtype=np.float64)
    low = 0.0 if allow_zero else np.nextafter(0.0, 1.0)
    if np.any(arr < low) or not np.all(np.isfinite(arr)):
        raise ValueError("time argument out of domain")
    out = fn(arr)
    if np.isscalar(t) or arr.ndim == 0:
        return float(out)
    return out


def memory_kernel(t, params: ModelParams):
    """Memory kernel phi(t), a probability density on [0, inf).

    phi(t) = [d2 (d1 - 1) / d1] (1 + d2 t / d1)^(-d1). Accepts a scalar or an
    array of nonnegative times; phi(0) = d2 (d1 - 1) / d1 is finite.
    """
    _check_params(params)
    d1, d2 = params.delta1, params.delta2
    c0 = d2 * (d1 - 1.0) / d1
    return _eval_elementwise(lambda s: c0 * (1.0 + d2 * s / d1) ** (-d1), t)


def memory_kernel_cdf(t, params: ModelParams):
    """CDF of the memory kernel: Phi(t) = 1 - (1 + d2 t / d1)^(1 - d1)."""
    _check_params(params)
    d1, d2 = params.delta1, params.delta2
    return _eval_elementwise(lambda s: 1.0 - (1.0 + d2 * s / d1) ** (1.0 - d1), t)


def infectivity(tau, params: ModelParams):
    """Infectivity p(tau) = exp(-beta tau); p(0) = 1 regardless of beta."""
    _check_params(params)
    b = params.beta
    return _eval_elementwise(lambda s: np.exp(-b * s), tau)


def impact(m, params: ModelParams):
    """Mark impact r(m) = gamma * log(m + 1) for real m >= 0."""
    _check_params(params)
    arr = np.asarray(m, dtype=np.float64)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("mark out of domain")
    out = params.gamma * np.log1p(arr)
    if np.isscalar(m) or arr.ndim == 0:
        return float(out)
    return out


def intensity(t, cascade: Cascade, params: ModelParams):
    """Conditional intensity lambda(t) at time t > 0, left-limit convention.

    Events at times strictly before t contribute; an event exactly at t does
    not excite itself. Direct O(N) sum per evaluation point. Accepts a scalar
    or an array of times.
    """
    _check_params(params)
    arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ValueError("intensity requires times in (0, inf)")
    out = _backend.intensity_at(arr, cascade.times, cascade.log_marks,
                                *params.astuple())
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(out[0])
    return out


def compensator(T, cascade: Cascade, params: ModelParams):
    """Integrated intensity Lambda(T) = int_0^T lambda(s) ds, closed form.

    Lambda(T) = alpha Phi(T) + sum_{tau_i < T} p(tau_i) r(m_i) Phi(T - tau_i).
    Events at or after T contribute nothing (Phi(0) = 0 and the sum is over
    strictly earlier events), so passing a cascade censored at T is safe.
    """
    _check_params(params)
    arr = np.atleast_1d(np.asarray(T, dtype=np.float64))
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("compensator requires T >= 0")
    out = _backend.compensator_at(arr, cascade.times, cascade.log_marks,
                                  *params.astuple())
    if np.isscalar(T) or np.asarray(T).ndim == 0:
        return float(out[0])
    return out


def mean_impact(marks: MarkDistribution, params: ModelParams) -> float:
    """Mean impact R = mean of r(m_i) over an empirical mark distribution."""
    _check_params(params)
    return marks.mean_impact(params)
