"""Timing comparison of the compiled kernels against the numpy fallback.

The backend is fixed at import time, so each side runs in its own
subprocess with MSEP_BACKEND set; the parent collects JSON lines and
prints a table with speedups. Run from the repository root:

    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --events 500 --repeats 5
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def synthetic_cascade(n_events: int, seed: int = 12345):
    import numpy as np

    from msep.model import Cascade

    rng = np.random.default_rng(seed)
    times = np.sort(rng.uniform(0.0, 86400.0, size=n_events))
    marks = np.floor(rng.lognormal(4.0, 2.0, size=n_events)).astype(np.int64)
    return Cascade(origin_mark=500, times=times, marks=marks)


def run_worker(n_events: int, repeats: int) -> dict:
    import numpy as np

    from msep import backend_name
    from msep.estimation import fit, log_likelihood
    from msep.gof import residual_times
    from msep.model import ModelParams

    cascade = synthetic_cascade(n_events)
    T = 90000.0
    params = ModelParams(10.0, 0.01, 0.8, 1.5, 0.05)

    def best_of(func, inner: int) -> float:
        runs = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            for _ in range(inner):
                func()
            runs.append((time.perf_counter() - t0) / inner)
        return min(runs)

    timings = {
        "loglik": best_of(lambda: log_likelihood(cascade, T, params), 20),
        "residuals": best_of(lambda: residual_times(cascade, T, params), 20),
        "fit": best_of(lambda: fit(cascade, T), 1),
    }
    check = float(log_likelihood(cascade, T, params))
    return {"backend": backend_name(), "timings": timings,
            "loglik_value": check, "n_events": n_events}


def spawn(backend: str, args) -> dict:
    env = dict(os.environ, MSEP_BACKEND=backend)
    cmd = [sys.executable, os.path.abspath(__file__), "--worker",
           "--events", str(args.events), "--repeats", str(args.repeats)]
    out = subprocess.run(cmd, env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(out.stdout)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--events", type=int, default=200,
                        help="synthetic cascade size (default 200)")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repeats, best kept (default 3)")
    parser.add_argument("--worker", action="store_true",
                        help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        print(json.dumps(run_worker(args.events, args.repeats)))
        return 0

    results = {}
    for backend in ("python", "compiled"):
        try:
            results[backend] = spawn(backend, args)
        except subprocess.CalledProcessError as err:
            sys.stderr.write(err.stderr)
            print(f"{backend:>9}: unavailable")
    if len(results) < 2:
        return 0 if results else 1

    drift = abs(results["python"]["loglik_value"]
                - results["compiled"]["loglik_value"])
    print(f"cascade with {args.events} events; "
          f"log-likelihood agreement |diff| = {drift:.3e}")
    print(f"{'operation':<12}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for op in ("loglik", "residuals", "fit"):
        t_py = results["python"]["timings"][op]
        t_c = results["compiled"]["timings"][op]
        print(f"{op:<12}{t_py * 1e3:>10.3f}ms{t_c * 1e3:>10.3f}ms"
              f"{t_py / t_c:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
