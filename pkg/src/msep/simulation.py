"""Exact simulation of the continuation process and Monte-Carlo prediction.

The continuation of a censored cascade is a cluster (Cauchy-Poisson style)
process: generation 0 comes from the conditional baseline nu~, and every
event (from any generation) spawns an inhomogeneous Poisson offspring
process with intensity p~(tau) r(m) phi(.) on the remaining window. Each
process is sampled exactly by thinning under a piecewise-constant majorant;
the rates involved are nonincreasing, so the rate at each segment's left
endpoint dominates the segment.

For heavy histories the baseline can be scaled down by an integer factor S
(generation 0 simulated from nu~/S, final counts multiplied back by S),
which preserves the mean by cluster independence; medians of inflated counts
are coarsened, which the prediction result flags.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import Cascade, MarkDistribution, ModelParams
from .prediction import ContinuationModel

__all__ = [
    "SimConfig",
    "SimPath",
    "SimPrediction",
    "SimulationCapExceeded",
    "sim_inhom_poisson",
    "sim_cascade_continuation",
    "predict_by_simulation",
    "simulate_cascade",
]

THINNING_SEGMENTS = 32
_SEGMENT_MIN_FRACTION = 1e-6
_MAX_EXPECTED_CANDIDATES = 5e7


@dataclass(frozen=True)
class SimConfig:
    """Settings for Monte-Carlo prediction runs."""

    replications: int = 100
    seed: int = 0
    scale_factor: int | None = None  # None selects automatically
    max_events_per_path: int = 1_000_000

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.scale_factor is not None and self.scale_factor < 1:
            raise ValueError("scale factor must be a positive integer")
        if self.max_events_per_path < 1:
            raise ValueError("max_events_per_path must be positive")


@dataclass(frozen=True)
class SimPath:
    """One simulated continuation: events plus the (possibly scaled) count."""

    times: np.ndarray
    marks: np.ndarray
    generations: np.ndarray
    scale_factor: int
    capped: bool = False

    @property
    def count(self) -> int:
        """Number of future events, inflated by the scale factor."""
        return int(self.scale_factor * self.times.size)


class SimulationCapExceeded(RuntimeError):
    """A path hit the per-path event cap; carries the partial path."""

    def __init__(self, path: SimPath):
        self.path = path
        super().__init__(
            f"simulation cap exceeded with {path.times.size} raw events")


def _segment_bounds(length: float) -> np.ndarray:
    """Geometric segmentation of (0, length] used for the majorant."""
    n = THINNING_SEGMENTS
    frac = _SEGMENT_MIN_FRACTION
    bounds = length * frac ** (np.arange(n - 1, -1, -1) / (n - 1))
    return np.concatenate(([0.0], bounds))


def sim_inhom_poisson(rate_fn, length: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Sample an inhomogeneous Poisson process on (0, length] by thinning.

    rate_fn must be vectorized, nonincreasing, and finite at 0; the majorant
    on each geometric segment is the rate at the segment's left endpoint.
    Returns sorted event times. Raises on negative or non-finite rates.
    """
    if length < 0 or not np.isfinite(length):
        raise ValueError("window length must be finite and nonnegative")
    if length == 0.0:
        return np.empty(0)
    bounds = _segment_bounds(length)
    lefts = bounds[:-1]
    majorants = np.asarray(rate_fn(lefts), dtype=np.float64)
    if np.any(~np.isfinite(majorants)) or np.any(majorants < 0):
        raise ValueError("rate function returned negative or non-finite values")
    widths = np.diff(bounds)
    expected = majorants @ widths
    if expected > _MAX_EXPECTED_CANDIDATES:
        raise ValueError(
            f"majorant mass {expected:.3g} too large to thin; "
            "scale the baseline down first")
    counts = rng.poisson(majorants * widths)
    if counts.sum() == 0:
        return np.empty(0)
    chunks = []
    for i in np.nonzero(counts)[0]:
        chunks.append(rng.uniform(bounds[i], bounds[i + 1], counts[i]))
    candidates = np.concatenate(chunks)
    seg_majorant = np.repeat(majorants[counts > 0], counts[counts > 0])
    rates = np.asarray(rate_fn(candidates), dtype=np.float64)
    if np.any(~np.isfinite(rates)) or np.any(rates < 0):
        raise ValueError("rate function returned negative or non-finite values")
    u = rng.random(candidates.size)
    accepted = candidates[u * seg_majorant < rates]
    return np.sort(accepted)


def _auto_scale(continuation: ContinuationModel, horizon: float) -> int:
    expected = continuation.expected_baseline_count(horizon)
    return max(1, int(np.ceil(expected / 500.0)))


def sim_cascade_continuation(continuation: ContinuationModel, horizon: float,
                             rng: np.random.Generator,
                             config: SimConfig = SimConfig()) -> SimPath:
    """Simulate one continuation path over (T, T + horizon].

    Cascading algorithm: draw generation 0 from the conditional baseline
    (scaled by 1/S), give every event an i.i.d. mark from the empirical
    distribution, then let each event of generation g spawn generation g+1
    from its own offspring intensity until a generation comes up empty.
    All generations are pooled into one path.
    """
    if horizon < 0 or not np.isfinite(horizon):
        raise ValueError("horizon must be finite and nonnegative")
    params = continuation.params
    if params.gamma > 0.0 and len(continuation.marks) == 0:
        raise ValueError("empty mark distribution with gamma > 0; "
                         "future impacts would be undefined")
    S = config.scale_factor or _auto_scale(continuation, horizon)
    cap = config.max_events_per_path

    def baseline_scaled(t):
        return continuation.baseline(t) / S

    times = [sim_inhom_poisson(baseline_scaled, horizon, rng)]
    if len(continuation.marks):
        marks = [continuation.marks.sample(rng, times[0].size)]
    else:
        marks = [np.zeros(times[0].size, dtype=np.int64)]
    gens = [np.zeros(times[0].size, dtype=np.int64)]

    d1, d2 = params.delta1, params.delta2
    c0 = d2 * (d1 - 1.0) / d1
    total = times[0].size
    capped = False
    generation = 0
    current_t, current_m = times[0], marks[0]
    while current_t.size and not capped:
        generation += 1
        child_t, child_m = [], []
        for tau, m in zip(current_t, current_m):
            w = (np.exp(-params.beta * (continuation.censor_time + tau))
                 * params.gamma * np.log1p(m))
            window = horizon - tau
            if w <= 0.0 or window <= 0.0:
                continue
            offs = sim_inhom_poisson(
                lambda u: w * c0 * (1.0 + (d2 / d1) * u) ** (-d1),
                window, rng)
            if offs.size:
                born = tau + offs
                child_t.append(born)
                child_m.append(continuation.marks.sample(rng, born.size))
                total += born.size
                if total > cap:
                    capped = True
                    break
        if child_t:
            ct = np.concatenate(child_t)
            cm = np.concatenate(child_m)
            order = np.argsort(ct, kind="stable")
            ct, cm = ct[order], cm[order]
            times.append(ct)
            marks.append(cm)
            gens.append(np.full(ct.size, generation, dtype=np.int64))
            current_t, current_m = ct, cm
        else:
            break

    all_t = np.concatenate(times)
    all_m = np.concatenate(marks)
    all_g = np.concatenate(gens)
    order = np.argsort(all_t, kind="stable")
    path = SimPath(times=all_t[order], marks=all_m[order],
                   generations=all_g[order], scale_factor=S, capped=capped)
    if capped:
        raise SimulationCapExceeded(path)
    return path


@dataclass(frozen=True)
class SimPrediction:
    """Monte-Carlo prediction of the future event count."""

    mean: float
    median: float
    counts: np.ndarray
    n_capped: int
    scale_factor: int
    median_coarsened: bool

    @property
    def mc_std_error(self) -> float:
        """Standard error of the mean over the replications."""
        if self.counts.size < 2:
            return float("nan")
        return float(np.std(self.counts, ddof=1) / np.sqrt(self.counts.size))


def predict_by_simulation(continuation: ContinuationModel, horizon: float,
                          config: SimConfig = SimConfig()) -> SimPrediction:
    """Monte-Carlo estimate of the future count over (T, T + horizon].

    Runs config.replications independent paths on substreams spawned from
    the seed, so results do not depend on aggregation order. Paths that hit
    the event cap contribute their partial (lower-bound) counts and are
    tallied in n_capped; any other error propagates.
    """
    seeds = np.random.SeedSequence(config.seed).spawn(config.replications)
    counts = np.empty(config.replications)
    n_capped = 0
    scale = None
    for i, child in enumerate(seeds):
        rng = np.random.default_rng(child)
        try:
            path = sim_cascade_continuation(continuation, horizon, rng, config)
        except SimulationCapExceeded as exc:
            path = exc.path
            n_capped += 1
        counts[i] = path.count
        scale = path.scale_factor
    if n_capped:
        warnings.warn(f"{n_capped} of {config.replications} paths hit the "
                      "event cap; their counts are lower bounds",
                      RuntimeWarning, stacklevel=2)
    return SimPrediction(mean=float(np.mean(counts)),
                         median=float(np.median(counts)),
                         counts=counts,
                         n_capped=n_capped,
                         scale_factor=int(scale),
                         median_coarsened=bool(scale > 1))


def simulate_cascade(params: ModelParams, marks: MarkDistribution,
                     window: float, rng: np.random.Generator,
                     max_events: int = 1_000_000) -> Cascade:
    """Simulate a whole cascade from scratch over (0, window].

    This is the continuation of an empty history at T = 0, always with scale
    factor 1 so the returned path is a genuine realization. The origin mark
    is drawn from the same pool.
    """
    origin = int(marks.sample(rng, 1)[0]) if len(marks) else 0
    empty = Cascade(origin_mark=origin, times=[], marks=[])
    continuation = ContinuationModel(
        censor_time=0.0, history=empty, params=params, marks=marks,
        mean_impact=marks.mean_impact(params) if len(marks) else 0.0)
    config = SimConfig(replications=1, scale_factor=1,
                       max_events_per_path=max_events)
    path = sim_cascade_continuation(continuation, window, rng, config)
    return Cascade(origin_mark=origin, times=path.times, marks=path.marks)
