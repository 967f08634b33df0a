"""Backend selection for the evaluation kernels.

The compiled extension (msep._core, Cython) is preferred when importable;
otherwise the numpy implementation is used. Set MSEP_BACKEND=python or
MSEP_BACKEND=compiled to force a choice (forcing "compiled" raises if the
extension is missing). Both backends implement the same functions with the
same semantics; random-number-driven code lives above this layer so results
do not depend on the backend's summation order beyond float round-off.
"""

import os

import numpy as np

_requested = os.environ.get("MSEP_BACKEND", "").strip().lower()
if _requested not in ("", "compiled", "python"):
    raise ImportError(
        f"MSEP_BACKEND must be 'compiled' or 'python', got {_requested!r}")

if _requested == "python":
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _kernels_py as _impl
        BACKEND = "python"


def backend_name() -> str:
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return BACKEND


def _c(arr):
    return np.ascontiguousarray(arr, dtype=np.float64)


def loglik(times, logm, T, a, b, g, d1, d2) -> float:
    return float(_impl.loglik(_c(times), _c(logm), float(T),
                              float(a), float(b), float(g),
                              float(d1), float(d2)))


def intensity_at(ts, times, logm, a, b, g, d1, d2) -> np.ndarray:
    return np.asarray(_impl.intensity_at(_c(ts), _c(times), _c(logm),
                                         float(a), float(b), float(g),
                                         float(d1), float(d2)))


def compensator_at(ts, times, logm, a, b, g, d1, d2) -> np.ndarray:
    return np.asarray(_impl.compensator_at(_c(ts), _c(times), _c(logm),
                                           float(a), float(b), float(g),
                                           float(d1), float(d2)))


def shifted_rate_at(us, T, times, logm, a, b, g, d1, d2) -> np.ndarray:
    return np.asarray(_impl.shifted_rate_at(_c(us), float(T), _c(times),
                                            _c(logm), float(a), float(b),
                                            float(g), float(d1), float(d2)))
