"""Marked self-exciting point processes for retweet cascades.

Fits the model to observed cascades by exact maximum likelihood, checks fit
by the random time change, and predicts final popularity either by solving
the conditional mean-intensity equation or by cluster-Poisson simulation.
"""

from ._backend import backend_name
from .data_io import (
    build_corpus_index,
    censor,
    empirical_marks,
    load_cascade,
    parse_cascade,
    save_cascade,
)
from .estimation import FitResult, SimplexConfig, fit, log_likelihood
from .evaluate import aggregate, metric_ae, metric_ape, metric_se, run_evaluate
from .gof import batch_pass_rate, gof_report, ks_uniform_test, residual_times
from .model import (
    Cascade,
    MarkDistribution,
    ModelParams,
    compensator,
    impact,
    infectivity,
    intensity,
    mean_impact,
    memory_kernel,
    memory_kernel_cdf,
)
from .prediction import (
    build_continuation,
    predict_mean_count,
    solve_mean_intensity,
)
from .simulation import SimConfig, predict_by_simulation, simulate_cascade

__version__ = "0.1.0"

__all__ = [
    "Cascade",
    "FitResult",
    "MarkDistribution",
    "ModelParams",
    "SimConfig",
    "SimplexConfig",
    "aggregate",
    "backend_name",
    "batch_pass_rate",
    "build_continuation",
    "build_corpus_index",
    "censor",
    "compensator",
    "empirical_marks",
    "fit",
    "gof_report",
    "impact",
    "infectivity",
    "intensity",
    "ks_uniform_test",
    "load_cascade",
    "log_likelihood",
    "mean_impact",
    "memory_kernel",
    "memory_kernel_cdf",
    "metric_ae",
    "metric_ape",
    "metric_se",
    "parse_cascade",
    "predict_by_simulation",
    "predict_mean_count",
    "residual_times",
    "run_evaluate",
    "save_cascade",
    "simulate_cascade",
    "solve_mean_intensity",
    "__version__",
]
