"""Corpus evaluation: fit each censored cascade, predict its final size,
and score the predictions against the recorded future.

Scoring uses the absolute percentage error together with squared and
absolute errors, aggregated per method and censor time. Batch runs are
deterministic: every simulation seed is derived by hashing the master seed
with the cascade id and censor time, so neither thread scheduling nor
corpus ordering can change any number in the output.
"""

from __future__ import annotations

import hashlib
import json
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data_io import WEEK_SECONDS, CorpusIndex, build_corpus_index, censor
from .estimation import SimplexConfig, fit
from .prediction import SolverError, build_continuation, predict_mean_count
from .simulation import SimConfig, predict_by_simulation

__all__ = [
    "METHODS",
    "CSV_COLUMNS",
    "EvaluationRecord",
    "MethodSummary",
    "metric_ape",
    "metric_se",
    "metric_ae",
    "aggregate",
    "evaluate_cascade",
    "run_evaluate",
    "write_records",
    "format_summary",
]

METHODS = ("eq", "sim-mean", "sim-median")
CSV_COLUMNS = ("id", "T_hours", "method", "n_observed", "n_true",
               "n_pred", "ape", "se", "ae", "fail_code")


def metric_ape(pred: float, truth: float) -> float:
    """Absolute percentage error |pred - truth| / truth; needs truth > 0."""
    if truth <= 0:
        raise ValueError("APE needs a positive true count")
    return abs(pred - truth) / truth


def metric_se(pred: float, truth: float) -> float:
    return (pred - truth) ** 2


def metric_ae(pred: float, truth: float) -> float:
    return abs(pred - truth)


@dataclass(frozen=True)
class EvaluationRecord:
    """One scored prediction, or a failure marker if fail_code is set."""

    id: str
    T_hours: float
    method: str
    n_observed: int
    n_true: int
    n_pred: float | None = None
    ape: float | None = None
    se: float | None = None
    ae: float | None = None
    fail_code: str = ""

    @property
    def ok(self) -> bool:
        return self.fail_code == ""


@dataclass(frozen=True)
class MethodSummary:
    """Aggregate scores for one (method, censor time) cell."""

    method: str
    T_hours: float
    n_scored: int
    n_failed: int
    median_ape: float
    mean_ape: float
    rmse: float
    mae: float


def aggregate(records) -> tuple:
    """Per-method, per-censor-time aggregates of a record list.

    Means use exact summation, so the result is invariant under any
    permutation of the input. Cells where every record failed carry NaN
    aggregates but still report their failure count.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to aggregate")
    cells = {}
    for r in records:
        cells.setdefault((r.method, r.T_hours), []).append(r)
    out = []
    for (method, t_hours) in sorted(cells):
        group = cells[(method, t_hours)]
        good = [r for r in group if r.ok]
        n_failed = len(group) - len(good)
        if good:
            apes = [r.ape for r in good]
            median_ape = float(statistics.median(apes))
            mean_ape = math.fsum(apes) / len(good)
            rmse = math.sqrt(math.fsum(r.se for r in good) / len(good))
            mae = math.fsum(r.ae for r in good) / len(good)
        else:
            median_ape = mean_ape = rmse = mae = float("nan")
        out.append(MethodSummary(method=method, T_hours=t_hours,
                                 n_scored=len(good), n_failed=n_failed,
                                 median_ape=median_ape, mean_ape=mean_ape,
                                 rmse=rmse, mae=mae))
    return tuple(out)


def _derived_seed(master_seed: int, cascade_id: str, t_hours: float) -> int:
    """Stable per-task seed: hash of the master seed, id, and censor time."""
    text = f"{master_seed}|{cascade_id}|{float(t_hours)!r}"
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _failure_rows(base, methods, code):
    return [EvaluationRecord(method=m, fail_code=code, **base) for m in methods]


def evaluate_cascade(cascade_file, t_hours: float, methods,
                     horizon: float = WEEK_SECONDS, nsim: int = 100,
                     seed: int = 0, fit_config: SimplexConfig | None = None):
    """Score one cascade at one censor time; returns one record per method.

    Failures (no events yet, a fit that did not converge, a solver error)
    are recorded in fail_code rather than raised, so corpus runs always
    produce a complete table.
    """
    full = cascade_file.cascade
    T = float(t_hours) * 3600.0
    n_true = int(np.sum(full.times <= horizon))
    observed = censor(full, T)
    base = dict(id=cascade_file.id, T_hours=float(t_hours),
                n_observed=observed.n_events, n_true=n_true)

    if n_true <= 0:
        return _failure_rows(base, methods, "no_truth")
    if observed.n_events == 0:
        return _failure_rows(base, methods, "no_events")
    try:
        result = fit(observed, T, fit_config)
    except (ValueError, FloatingPointError):
        return _failure_rows(base, methods, "fit_error")
    if not result.converged:
        return _failure_rows(base, methods, "fit_nonconverged")

    continuation = build_continuation(observed, T, result.theta_hat)
    window = horizon - T
    sim_result = None
    rows = []
    for method in methods:
        try:
            if method == "eq":
                future = predict_mean_count(continuation, window).count
            else:
                if sim_result is None:
                    cfg = SimConfig(replications=nsim,
                                    seed=_derived_seed(seed, cascade_file.id,
                                                       t_hours))
                    sim_result = predict_by_simulation(continuation, window, cfg)
                future = (sim_result.mean if method == "sim-mean"
                          else sim_result.median)
        except SolverError:
            rows.append(EvaluationRecord(method=method,
                                         fail_code="solve_error", **base))
            continue
        except (ValueError, RuntimeError):
            rows.append(EvaluationRecord(method=method,
                                         fail_code="predict_error", **base))
            continue
        if not math.isfinite(future):
            rows.append(EvaluationRecord(method=method,
                                         fail_code="predict_error", **base))
            continue
        n_pred = float(observed.n_events + future)
        rows.append(EvaluationRecord(
            method=method,
            n_pred=n_pred,
            ape=metric_ape(n_pred, n_true),
            se=metric_se(n_pred, n_true),
            ae=metric_ae(n_pred, n_true),
            **base))
    return rows


def run_evaluate(corpus, censor_hours, methods=METHODS,
                 horizon: float = WEEK_SECONDS, nsim: int = 100,
                 seed: int = 0, threads: int = 1,
                 fit_config: SimplexConfig | None = None):
    """Evaluate a whole corpus; returns (records, summaries).

    corpus may be a directory path or a prebuilt CorpusIndex. Output order
    is cascade-major then censor time then method, independent of the
    thread count.
    """
    methods = tuple(methods)
    if not methods:
        raise ValueError("methods list is empty")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    censor_hours = tuple(float(h) for h in censor_hours)
    if not censor_hours:
        raise ValueError("no censor times given")
    for h in censor_hours:
        if not 0.0 < h * 3600.0 < horizon:
            raise ValueError(
                f"censor time {h} h must lie inside (0, horizon)")
    if threads < 1:
        raise ValueError("threads must be at least 1")

    index = corpus if isinstance(corpus, CorpusIndex) else \
        build_corpus_index(corpus, horizon=horizon)

    def one(task):
        i, t_hours = task
        try:
            cf = index.load(i)
        except OSError:
            return _failure_rows(
                dict(id=index.ids[i], T_hours=float(t_hours),
                     n_observed=0, n_true=0),
                methods, "io_error")
        return evaluate_cascade(cf, t_hours, methods, horizon=horizon,
                                nsim=nsim, seed=seed, fit_config=fit_config)

    tasks = [(i, h) for i in range(len(index)) for h in censor_hours]
    records = []
    if threads == 1:
        for task in tasks:
            records.extend(one(task))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for rows in pool.map(one, tasks):
                records.extend(rows)
    summaries = aggregate(records) if records else ()
    return records, summaries


def _field_text(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _record_dict(record):
    return {c: getattr(record, c) for c in CSV_COLUMNS}


def write_records(records, path) -> None:
    """Write records as CSV, or as JSON when the path ends in .json.

    Field order and float formatting are fixed, so equal inputs produce
    byte-identical files.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        payload = [_record_dict(r) for r in records]
        text = json.dumps(payload, indent=2, allow_nan=False)
        path.write_text(text + "\n", encoding="utf-8")
        return
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        lines.append(",".join(_field_text(getattr(r, c)) for c in CSV_COLUMNS))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def format_summary(summaries) -> str:
    """Fixed-width text table of aggregate scores."""
    header = (f"{'method':<11}{'T_hours':>8}{'scored':>8}{'failed':>8}"
              f"{'medAPE':>10}{'meanAPE':>10}{'RMSE':>12}{'MAE':>12}")
    lines = [header]
    for s in summaries:
        lines.append(
            f"{s.method:<11}{s.T_hours:>8g}{s.n_scored:>8d}{s.n_failed:>8d}"
            f"{s.median_ape:>10.4f}{s.mean_ape:>10.4f}"
            f"{s.rmse:>12.4f}{s.mae:>12.4f}")
    return "\n".join(lines)
