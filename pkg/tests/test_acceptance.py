"""Acceptance suite: nine end-to-end guarantees, one test and one line each.

Every test here drives the public API the way a user would, pins a frozen
seed so the run is reproducible, asserts the stated tolerance, and prints a
single summary line with its headline numbers. Budgets on wall time are
asserted where the guarantee includes one.
"""

import time
from bisect import bisect_left, bisect_right

import numpy as np

import msep
from msep import cli
from msep.prediction import SplineBasis, solve_mean_intensity

from conftest import random_cascade, random_params, quad_compensator

import pytest

WEEK = 604800.0
THETA_STAR = msep.ModelParams(5.711, 0.024, 1.455, 1.254, 0.173)


def two_point_pool():
    """Mark pool with rare huge marks, the regime where every coordinate of
    the model is identifiable from a single cascade: silent zero marks plus
    an 18 percent chance of a mark whose log-impact is about 19.3."""
    return msep.MarkDistribution(np.array([0] * 82 + [240_000_000] * 18))


def test_01_compensator_matches_adaptive_quadrature():
    rng = np.random.default_rng(4242)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        params = random_params(rng)
        horizon = float(rng.uniform(60.0, 7200.0))
        cascade = random_cascade(rng, max_events=50, t_max=horizon)
        exact = msep.compensator(horizon, cascade, params)
        oracle = quad_compensator(cascade, params, horizon)
        worst = max(worst, abs(exact - oracle) / abs(oracle))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-6
    assert elapsed < 10.0
    print(f"\n[1] PASS closed-form vs quadrature on 100 pairs: "
          f"max rel err {worst:.2e} in {elapsed:.1f}s")


def test_02_decay_times_and_origin_shares():
    from scipy.optimize import brentq

    t0 = time.perf_counter()

    def one_percent_time(beta):
        p = msep.ModelParams(1.0, beta, 1.0, 1.5, 0.1)
        return brentq(lambda tau: msep.infectivity(tau, p) - 0.01, 1e-9, 1e6)

    fast, slow = one_percent_time(0.246), one_percent_time(0.019)
    assert abs(fast - 18.7) <= 0.05
    assert abs(slow - 242.4) <= 0.05

    def origin_share(alpha, delta1, delta2, total):
        p = msep.ModelParams(alpha, 0.0, 1.0, delta1, delta2)
        return alpha * msep.memory_kernel_cdf(WEEK, p) / total

    share_big = origin_share(5.711, 1.254, 0.173, 159)
    share_all = origin_share(58.136, 1.490, 0.001, 55)
    assert f"{100 * share_big:.2g}" == "3.4"
    assert abs(share_all - 1.0) < 0.01
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    print(f"\n[2] PASS spot checks: 1% decay at {fast:.1f}s and {slow:.1f}s, "
          f"origin shares {100 * share_big:.1f}% and {100 * share_all:.0f}%")


def test_03_simulate_refit_median_recovery():
    """200 cascades drawn at a known parameter point, each refitted from
    scratch with the default estimator, coordinate medians within 25
    percent of truth (50 percent for the kernel scale, the flattest
    direction of the likelihood)."""
    t0 = time.perf_counter()
    pool = two_point_pool()
    fitted = []
    for child in np.random.SeedSequence(83).spawn(200):
        cascade = msep.simulate_cascade(THETA_STAR, pool, WEEK,
                                        np.random.default_rng(child))
        if cascade.n_events == 0:
            continue
        fitted.append(msep.fit(cascade, WEEK).theta_hat.astuple())
    assert len(fitted) >= 190
    medians = np.median(np.asarray(fitted), axis=0)
    truth = np.asarray(THETA_STAR.astuple())
    rel = (medians - truth) / truth
    tol = np.array([0.25, 0.25, 0.25, 0.25, 0.50])
    elapsed = time.perf_counter() - t0
    assert np.all(np.abs(rel) < tol), f"median rel errors {rel}"
    assert elapsed < 600.0
    signed = ", ".join(f"{r:+.3f}" for r in rel)
    print(f"\n[3] PASS simulate-refit medians over {len(fitted)} cascades: "
          f"rel err ({signed}) in {elapsed:.0f}s")


def test_04_time_change_ks_pass_rate():
    """Residual-transforming data with the very parameters that generated
    it should pass the uniformity test at close to the nominal rate."""
    t0 = time.perf_counter()
    pool = two_point_pool()
    reports = []
    for child in np.random.SeedSequence(2024).spawn(500):
        cascade = msep.simulate_cascade(THETA_STAR, pool, WEEK,
                                        np.random.default_rng(child))
        if cascade.n_events == 0:
            continue
        reports.append(msep.gof_report(cascade, WEEK, THETA_STAR))
    rate = msep.batch_pass_rate(reports, level=0.05)
    elapsed = time.perf_counter() - t0
    assert 0.90 <= rate <= 0.99
    assert elapsed < 300.0
    print(f"\n[4] PASS time-change self-consistency: K-S pass rate "
          f"{rate:.3f} on {len(reports)} cascades in {elapsed:.1f}s")


CONTINUATION_SUITE = [
    (THETA_STAR, [0] * 82 + [240_000_000] * 18, 3600.0),
    (msep.ModelParams(8.0, 1e-4, 0.25, 1.8, 0.5), [3, 12], 1800.0),
    (msep.ModelParams(20.0, 0.002, 0.3, 2.2, 0.08), [0, 50, 500], 900.0),
    (msep.ModelParams(3.0, 0.01, 0.8, 1.6, 0.3), [9], 1200.0),
]


@pytest.fixture(scope="module")
def continuation_results():
    """Twenty partially observed cascades spanning baseline-dominated,
    excitation-heavy, and nearly dead regimes, each predicted by both
    routes. Shared by the agreement and refinement tests below."""
    cases = []
    core_elapsed = 0.0
    children = np.random.SeedSequence(77).spawn(40)
    for idx in range(20):
        params, marks, censor = CONTINUATION_SUITE[idx % 4]
        pool = msep.MarkDistribution(np.array(marks))
        cascade_seed, sim_seed = children[2 * idx], children[2 * idx + 1]
        cascade = msep.simulate_cascade(params, pool, censor,
                                        np.random.default_rng(cascade_seed))
        continuation = msep.build_continuation(cascade, censor, params,
                                               marks=pool)
        length = WEEK - censor
        t0 = time.perf_counter()
        eq = msep.predict_mean_count(continuation, length)
        sim = msep.predict_by_simulation(
            continuation, length,
            msep.SimConfig(replications=1000,
                           seed=int(sim_seed.generate_state(1)[0])))
        core_elapsed += time.perf_counter() - t0
        doubled = solve_mean_intensity(
            continuation, length,
            SplineBasis.geometric(4, 2 * eq.k_used, length, 1.0))
        cases.append({
            "n_obs": cascade.n_events,
            "eq_count": eq.count,
            "k_used": eq.k_used,
            "sim_mean": sim.mean,
            "band": 3.0 * sim.mc_std_error,
            "doubled_count": doubled.expected_count(),
        })
    return cases, core_elapsed


def test_05_equation_and_simulation_predictions_agree(continuation_results):
    cases, elapsed = continuation_results
    worst_ratio = 0.0
    for case in cases:
        diff = abs(case["eq_count"] - case["sim_mean"])
        assert case["band"] > 0.0
        assert diff <= case["band"], case
        worst_ratio = max(worst_ratio, diff / case["band"])
    assert elapsed < 600.0
    print(f"\n[5] PASS equation vs simulation on 20 continuations: "
          f"worst |diff| at {worst_ratio:.2f} of the 3-sigma band, "
          f"core work {elapsed:.0f}s")


def test_06_subcritical_total_count_mean():
    """With no infectivity decay and branching number one half, the mean
    cluster family size has the closed form alpha / (1 - branching)."""
    t0 = time.perf_counter()
    params = msep.ModelParams(2.0, 0.0, 0.5 / np.log(10.0), 2.0, 1.0)
    pool = msep.MarkDistribution(np.array([9]))
    rng = np.random.default_rng(np.random.SeedSequence(606))
    counts = np.array(
        [msep.simulate_cascade(params, pool, 40000.0, rng).n_events
         for _ in range(5000)], dtype=float)
    target = 2.0 / (1.0 - 0.5)
    se = counts.std(ddof=1) / np.sqrt(counts.size)
    elapsed = time.perf_counter() - t0
    assert abs(counts.mean() - target) <= 3.0 * se
    assert elapsed < 120.0
    print(f"\n[6] PASS subcritical mean count {counts.mean():.3f} vs "
          f"{target} (se {se:.3f}) over 5000 runs in {elapsed:.0f}s")


def _enumerated_sup_distance(raw, horizon):
    """Sup distance between the empirical CDF and the uniform CDF found by
    walking every jump point from both sides, stdlib arithmetic only."""
    scaled = sorted(float(x) / horizon for x in raw)
    n = len(scaled)
    best = 0.0
    for x in scaled:
        at_or_below = bisect_right(scaled, x)
        strictly_below = bisect_left(scaled, x)
        best = max(best, at_or_below / n - x, x - strictly_below / n)
    return best


def test_07_ks_statistic_matches_enumeration():
    rng = np.random.default_rng(7777)
    checked = 0
    for _ in range(1000):
        n = int(rng.integers(1, 11))
        horizon = float(rng.uniform(0.5, 2000.0))
        if rng.random() < 0.3:
            grid = np.floor(rng.uniform(0.0, 1.0, size=n) * 5.0) / 5.0
            raw = grid * horizon
        else:
            raw = rng.uniform(0.0, horizon, size=n)
        d_formula, _ = msep.ks_uniform_test(raw, horizon)
        assert d_formula == _enumerated_sup_distance(raw, horizon)
        checked += 1
    print(f"\n[7] PASS K-S statistic exactly equals enumerated sup "
          f"distance on {checked} samples of size <= 10")


def test_08_basis_refinement_converged(continuation_results):
    cases, _ = continuation_results
    worst = 0.0
    for case in cases:
        assert case["eq_count"] > 0.0
        rel = abs(case["doubled_count"] - case["eq_count"]) / case["eq_count"]
        assert rel < 0.005, case
        worst = max(worst, rel)
    print(f"\n[8] PASS doubling the spline basis moves predictions by at "
          f"most {worst:.2e} relative")


def test_09_evaluate_byte_identical(tmp_path):
    corpus = tmp_path / "corpus"
    rc = cli.main(["simulate", str(corpus),
                   "--params", "8,0.01,0.2,1.8,0.5",
                   "--marks", "0,3,10,50,200",
                   "--n", "50", "--seed", "4321"])
    assert rc == 0
    outs = []
    for run in (1, 2):
        out = tmp_path / f"records_{run}.csv"
        rc = cli.main(["evaluate", str(corpus),
                       "--censor-hours", "2.0",
                       "--nsim", "50", "--seed", "99",
                       "--threads", "2", "--out", str(out)])
        assert rc == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    n_lines = outs[0].decode().count("\n")
    print(f"\n[9] PASS evaluate on a 50-cascade corpus is byte-identical "
          f"across two runs ({n_lines} lines, {len(outs[0])} bytes)")
