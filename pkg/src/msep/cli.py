"""Command-line interface: fit, gof, simulate, predict, and evaluate.

Exit codes: 0 on success, 1 when every requested unit of work failed,
2 on usage errors (argparse's own convention).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .data_io import (
    ParseError,
    build_corpus_index,
    censor,
    load_cascade,
    save_cascade,
)
from .estimation import fit
from .evaluate import (
    METHODS,
    format_summary,
    run_evaluate,
    write_records,
)
from .gof import gof_report
from .model import MarkDistribution, ModelParams
from .prediction import build_continuation, predict_mean_count
from .simulation import SimConfig, predict_by_simulation, simulate_cascade

__all__ = ["main", "build_parser"]


def _parse_params(text: str) -> ModelParams:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 5:
        raise argparse.ArgumentTypeError(
            "expected 5 comma-separated values: alpha,beta,gamma,delta1,delta2")
    try:
        values = [float(p) for p in parts]
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None
    try:
        return ModelParams(*values)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _parse_marks(text: str) -> np.ndarray:
    try:
        values = [int(p.strip()) for p in text.split(",") if p.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None
    if not values:
        raise argparse.ArgumentTypeError("empty mark list")
    return np.asarray(values, dtype=np.int64)


def _add_shared(p, *, censor_required=False):
    p.add_argument("--censor-hours", action="append", type=float,
                   default=None, required=censor_required, metavar="H",
                   help="censor time in hours (repeatable)")
    p.add_argument("--horizon-days", type=float, default=7.0, metavar="D",
                   help="final-count horizon in days (default 7)")
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msep",
        description="Fit, check, simulate, and predict marked "
                    "self-exciting cascades.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="maximum likelihood fit of cascades")
    p_fit.add_argument("files", nargs="+", metavar="FILE")
    _add_shared(p_fit)
    p_fit.add_argument("--out", type=Path, default=None,
                       help="write the JSON results here instead of stdout")

    p_gof = sub.add_parser(
        "gof", help="time-change residual test of a fitted cascade")
    p_gof.add_argument("files", nargs="+", metavar="FILE")
    _add_shared(p_gof)
    p_gof.add_argument("--params", type=_parse_params, default=None,
                       metavar="A,B,G,D1,D2",
                       help="use these parameters instead of fitting")
    p_gof.add_argument("--out", type=Path, default=None)

    p_sim = sub.add_parser(
        "simulate", help="write a synthetic cascade corpus")
    p_sim.add_argument("outdir", type=Path, metavar="DIR")
    p_sim.add_argument("--params", type=_parse_params, required=True,
                       metavar="A,B,G,D1,D2")
    p_sim.add_argument("--marks", type=_parse_marks, default=None,
                       metavar="M1,M2,...",
                       help="mark pool sampled for simulated events")
    p_sim.add_argument("--marks-file", type=Path, default=None,
                       help="file with one pool mark per line")
    p_sim.add_argument("--n", type=int, default=50,
                       help="number of cascades (default 50)")
    p_sim.add_argument("--horizon-days", type=float, default=7.0, metavar="D")
    p_sim.add_argument("--seed", type=int, default=0)

    p_pred = sub.add_parser(
        "predict", help="predict the final count of censored cascades")
    p_pred.add_argument("files", nargs="+", metavar="FILE")
    _add_shared(p_pred, censor_required=True)
    p_pred.add_argument("--method", choices=METHODS, default="eq")
    p_pred.add_argument("--nsim", type=int, default=100,
                        help="simulation replications (default 100)")
    p_pred.add_argument("--params", type=_parse_params, default=None,
                        metavar="A,B,G,D1,D2",
                        help="use these parameters instead of fitting")
    p_pred.add_argument("--out", type=Path, default=None)

    p_eval = sub.add_parser(
        "evaluate", help="fit, predict, and score a whole corpus")
    p_eval.add_argument("corpus", type=Path, metavar="DIR")
    _add_shared(p_eval, censor_required=True)
    p_eval.add_argument("--method", action="append", choices=METHODS,
                        default=None,
                        help="prediction method (repeatable; default all)")
    p_eval.add_argument("--nsim", type=int, default=100)
    p_eval.add_argument("--threads", type=int, default=1)
    p_eval.add_argument("--out", type=Path, required=True,
                        help="per-record output file (.csv or .json)")
    return parser


def _emit(payload, out: Path | None) -> None:
    text = json.dumps(payload, indent=2)
    if out is None:
        print(text)
    else:
        out.write_text(text + "\n", encoding="utf-8")


def _params_dict(params: ModelParams) -> dict:
    return {"alpha": params.alpha, "beta": params.beta,
            "gamma": params.gamma, "delta1": params.delta1,
            "delta2": params.delta2}


def _censor_list(args) -> list:
    hours = args.censor_hours or [args.horizon_days * 24.0]
    horizon = args.horizon_days * 86400.0
    for h in hours:
        if not 0.0 < h * 3600.0 <= horizon:
            raise ValueError(f"censor time {h} h outside (0, horizon]")
    return hours


def _cmd_fit(args) -> int:
    results, failures = [], 0
    for name in args.files:
        cf = load_cascade(name)
        for h in _censor_list(args):
            T = h * 3600.0
            observed = censor(cf.cascade, T)
            entry = {"id": cf.id, "T_hours": h, "n_observed": observed.n_events}
            if observed.n_events == 0:
                entry["error"] = "no events inside the censor window"
                failures += 1
            else:
                res = fit(observed, T)
                entry.update(params=_params_dict(res.theta_hat),
                             loglik=res.loglik, converged=res.converged)
            results.append(entry)
    _emit(results, args.out)
    return 1 if failures == len(results) else 0


def _cmd_gof(args) -> int:
    results, failures = [], 0
    for name in args.files:
        cf = load_cascade(name)
        for h in _censor_list(args):
            T = h * 3600.0
            observed = censor(cf.cascade, T)
            entry = {"id": cf.id, "T_hours": h, "n_observed": observed.n_events}
            if observed.n_events == 0:
                entry["error"] = "no events inside the censor window"
                failures += 1
            else:
                params = args.params or fit(observed, T).theta_hat
                report = gof_report(observed, T, params)
                entry.update(params=_params_dict(params),
                             ks_statistic=report.ks_statistic,
                             p_value=report.p_value,
                             pass_at_005=bool(report.p_value > 0.05))
            results.append(entry)
    _emit(results, args.out)
    return 1 if failures == len(results) else 0


def _cmd_simulate(args) -> int:
    if (args.marks is None) == (args.marks_file is None):
        raise ValueError("give exactly one of --marks or --marks-file")
    if args.marks_file is not None:
        lines = args.marks_file.read_text(encoding="utf-8").split()
        marks = np.asarray([int(x) for x in lines], dtype=np.int64)
    else:
        marks = args.marks
    if args.n < 1:
        raise ValueError("--n must be positive")
    pool = MarkDistribution(marks)
    horizon = args.horizon_days * 86400.0
    args.outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for k, child in enumerate(np.random.SeedSequence(args.seed).spawn(args.n)):
        rng = np.random.default_rng(child)
        cascade = simulate_cascade(args.params, pool, horizon, rng)
        cid = f"sim{k:05d}"
        save_cascade(cascade, args.outdir / f"{cid}.csv")
        rows.append(f"{cid},{cid}.csv,{cascade.n_events}")
    (args.outdir / "index.csv").write_text(
        "id,path,n_events\n" + "\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {args.n} cascades to {args.outdir}")
    return 0


def _cmd_predict(args) -> int:
    horizon = args.horizon_days * 86400.0
    results, failures = [], 0
    for name in args.files:
        cf = load_cascade(name)
        for h in _censor_list(args):
            T = h * 3600.0
            if T >= horizon:
                raise ValueError("censor time must fall before the horizon")
            observed = censor(cf.cascade, T)
            entry = {"id": cf.id, "T_hours": h, "method": args.method,
                     "n_observed": observed.n_events}
            if observed.n_events == 0:
                entry["error"] = "no events inside the censor window"
                failures += 1
                results.append(entry)
                continue
            params = args.params or fit(observed, T).theta_hat
            continuation = build_continuation(observed, T, params)
            window = horizon - T
            if args.method == "eq":
                future = predict_mean_count(continuation, window).count
            else:
                cfg = SimConfig(replications=args.nsim, seed=args.seed)
                sim = predict_by_simulation(continuation, window, cfg)
                future = sim.mean if args.method == "sim-mean" else sim.median
                entry["mc_std_error"] = sim.mc_std_error
            entry.update(params=_params_dict(params), future_count=future,
                         n_final_pred=observed.n_events + future)
            results.append(entry)
    _emit(results, args.out)
    return 1 if failures == len(results) else 0


def _cmd_evaluate(args) -> int:
    methods = tuple(args.method) if args.method else METHODS
    horizon = args.horizon_days * 86400.0
    index = build_corpus_index(args.corpus, horizon=horizon)
    records, summaries = run_evaluate(
        index, args.censor_hours, methods, horizon=horizon,
        nsim=args.nsim, seed=args.seed, threads=args.threads)
    write_records(records, args.out)
    print(format_summary(summaries))
    print(f"wrote {len(records)} records to {args.out}")
    return 1 if records and not any(r.ok for r in records) else 0


_COMMANDS = {
    "fit": _cmd_fit,
    "gof": _cmd_gof,
    "simulate": _cmd_simulate,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, ParseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
