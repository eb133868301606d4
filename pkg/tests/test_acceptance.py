"""End-to-end acceptance checks at the configured desk-scale sizes.

Each test prints one ``CRITERION k: PASS|FAIL`` line (also collected for the
terminal summary) and asserts its runtime budget.
"""
import math
import time

import numpy as np

from conftest import ACCEPTANCE_LINES

from compgrad.comparator import ComparisonOracle
from compgrad.experiments import default_config, records_to_csv, run
from compgrad.experiments.config import Caps, Grid
from compgrad.experiments.records import fit_scaling
from compgrad.quantumsim import (build_phase_state, coherent_depth, cyclic_deviation,
                                 inverse_qft_measure, perturb_state)
from compgrad.testing import TestParams, make_promise_instance, test_randomized

SLACK = 0.05
TWO_THIRDS = 2 / 3


def report(k, ok, detail):
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def configured(suite, replicas=None, **grid):
    cfg = default_config(suite)
    if grid:
        cfg = cfg.with_overrides(grid=Grid(**{**cfg.grid.__dict__, **grid}))
    return cfg.with_overrides(replicas=replicas)


def checked_run(cfg):
    res = run(cfg)
    assert res.summary["failed_cells"] == [], res.summary["failed_cells"]
    return res


def min_rate(res):
    return min(c["rate"] for c in res.summary["cells"])


def test_criterion_1_dp_soundness():
    t0 = time.perf_counter()
    res = checked_run(configured("dp_soundness"))
    bad = sum(not r.success for r in res.records)
    policies = {r.params["tie_policy"] for r in res.records}
    elapsed = time.perf_counter() - t0
    ok = len(res.records) >= 100_000 and bad == 0 and len(policies) == 4 and elapsed < 60
    report(1, ok, f"tuples={len(res.records)} violations={bad} policies={len(policies)} "
                  f"time={elapsed:.1f}s")
    assert ok


def test_criterion_2_randomized_tester():
    t0 = time.perf_counter()
    direct = {}
    rng = np.random.default_rng(2)
    for n in (6, 50, 500):
        inst = make_promise_instance(n, 0.1, "Yes", rng)
        o = ComparisonOracle(inst.model)
        direct[n] = test_randomized(o, inst.x, inst.v, TestParams(0.1, inst.gamma), rng).queries_used
    res = checked_run(configured("test_randomized"))
    res_q = checked_run(configured("test_randomized", replicas=100, model=("quadratic",)))
    queries = {r.queries for r in res.records + res_q.records}
    rate = min(min_rate(res), min_rate(res_q))
    elapsed = time.perf_counter() - t0
    ok = (set(direct.values()) == {879} and queries == {879}
          and rate >= TWO_THIRDS - SLACK and elapsed < 300)
    report(2, ok, f"queries={sorted(queries)} direct={direct} min_cell_rate={rate:.3f} "
                  f"cells={len(res.summary['cells'])}+{len(res_q.summary['cells'])} "
                  f"time={elapsed:.1f}s")
    assert ok


def test_criterion_3_deterministic_tester():
    t0 = time.perf_counter()
    res = checked_run(configured("test_deterministic"))
    axis = checked_run(configured("test_deterministic", replicas=40, model=("axis",)))
    per_n = {}
    for r in res.records:
        per_n[r.params["n"]] = per_n.get(r.params["n"], 0) + 1
    wrong = sum(not r.success for r in res.records + axis.records)
    fit = fit_scaling(res.records, "n")
    elapsed = time.perf_counter() - t0
    ok = wrong == 0 and min(per_n.values()) >= 1000 and fit.r2 >= 0.95 and elapsed < 600
    report(3, ok, f"instances_per_n={per_n} axis_instances={len(axis.records)} wrong={wrong} "
                  f"slope={fit.slope:.3f} r2={fit.r2:.4f} time={elapsed:.1f}s")
    assert ok


def test_criterion_4_constant_estimation():
    t0 = time.perf_counter()
    res = checked_run(configured("estimate", n=(10, 100, 500), epsilon=(0.1,),
                                 model=("hyperplane", "quadratic"), stage=("constant",)))
    exact = all(r.queries == r.params["n"] for r in res.records)
    rate = min_rate(res)
    elapsed = time.perf_counter() - t0
    ok = exact and rate >= TWO_THIRDS - SLACK and elapsed < 120
    report(4, ok, f"queries_equal_n={exact} min_cell_rate={rate:.3f} time={elapsed:.1f}s")
    assert ok


def test_criterion_5_full_estimation():
    t0 = time.perf_counter()
    res = checked_run(configured("estimate"))
    rate = min_rate(res)
    eps_grid = tuple(2.0 ** -k for k in range(2, 11))
    by_eps = checked_run(configured("estimate", replicas=30, n=(50,), epsilon=eps_grid,
                                    model=("hyperplane",)))
    by_n = checked_run(configured("estimate", replicas=30, n=(10, 20, 40, 80, 160),
                                  epsilon=(0.05,), model=("hyperplane",)))
    fit_eps = fit_scaling(by_eps.records, "log_inv_eps")
    fit_n = fit_scaling(by_n.records, "n")
    elapsed = time.perf_counter() - t0
    ok = (len(res.summary["cells"]) == 18 and rate >= TWO_THIRDS - SLACK
          and fit_eps.r2 >= 0.95 and fit_n.r2 >= 0.95 and elapsed < 1200)
    report(5, ok, f"cells={len(res.summary['cells'])} min_cell_rate={rate:.3f} "
                  f"r2_log_inv_eps={fit_eps.r2:.4f} r2_n={fit_n.r2:.4f} time={elapsed:.1f}s")
    assert ok


def test_criterion_6_concentration():
    t0 = time.perf_counter()
    res = checked_run(configured("concentration"))
    bad = [(r.params["n"], r.params["case"]) for r in res.records if not r.success]
    elapsed = time.perf_counter() - t0
    ok = len(res.records) == 9 and not bad and elapsed < 60
    probs = " ".join(f"n={r.params['n']}:{r.aux:.4f}" for r in res.records)
    report(6, ok, f"bounds_checked={len(res.records)} violated={bad} {probs} time={elapsed:.1f}s")
    assert ok


def test_criterion_7_basis_overlap():
    t0 = time.perf_counter()
    res = checked_run(configured("overlap"))
    (rec,) = res.records
    elapsed = time.perf_counter() - t0
    ok = rec.success and rec.queries >= 10_000 and elapsed < 300
    report(7, ok, f"mean_W={rec.aux:.4f} accepted={rec.queries} ci_width={rec.error_norm:.4f} "
                  f"time={elapsed:.1f}s")
    assert ok


def test_criterion_8_qft_recovery():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    x = rng.uniform(0.05, 0.9, size=2)
    state = build_phase_state(x, 64)
    ideal = inverse_qft_measure(state, 1000, rng).success_rate(x)
    noisy = inverse_qft_measure(perturb_state(state, 0.1, rng), 1000, rng).success_rate(x)
    tails = {}
    for t in (32, 64):
        theta = float(rng.uniform(0, t + 1))
        K = inverse_qft_measure(build_phase_state([theta / (t + 1)], t), 100_000, rng).shot_outcomes
        tails[t] = float(np.mean(cyclic_deviation(K[:, 0], theta, t + 1) >= 5))
    # one-sided 99.9% binomial slack on 1e5 shots
    tail_ok = all(p <= 0.125 + 3.1 * math.sqrt(0.125 * 0.875 / 100_000) for p in tails.values())
    elapsed = time.perf_counter() - t0
    ok = (ideal >= TWO_THIRDS - 0.03 and noisy >= TWO_THIRDS - 0.2 - 0.03 and tail_ok
          and elapsed < 120)
    report(8, ok, f"ideal={ideal:.3f} perturbed(0.1)={noisy:.3f} "
                  f"tail={ {k: round(v, 4) for k, v in tails.items()} } time={elapsed:.1f}s")
    assert ok


def test_criterion_9_quantum_simulation():
    t0 = time.perf_counter()
    res = checked_run(configured("quantum"))
    rate = sum(r.success for r in res.records) / len(res.records)
    expected_depth = coherent_depth(2, 0.25)
    depth_ok = all(r.aux == expected_depth for r in res.records)
    threshold = 8 / 15 - 2 * 0.25 - SLACK
    elapsed = time.perf_counter() - t0
    ok = len(res.records) == 300 and rate >= threshold and depth_ok and elapsed < 900
    report(9, ok, f"success={rate:.3f} (threshold {threshold:.3f}) depth={expected_depth} "
                  f"depth_matches={depth_ok} time={elapsed:.1f}s")
    assert ok


REPRO = {
    "dp_soundness": 200,
    "test_randomized": 4,
    "test_deterministic": 8,
    "estimate": 4,
    "quantum": 3,
    "concentration": 1,
    "overlap": 1,
}


def test_criterion_10_reproducibility():
    t0 = time.perf_counter()
    differing = []
    for suite, reps in REPRO.items():
        cfg = configured(suite, replicas=reps).with_overrides(base_seed=2024)
        if suite in ("concentration", "overlap"):
            cfg = cfg.with_overrides(caps=Caps(samples=5000))
        a = records_to_csv(checked_run(cfg).records)
        b = records_to_csv(checked_run(cfg).records)
        if a != b:
            differing.append(suite)
    elapsed = time.perf_counter() - t0
    ok = not differing
    report(10, ok, f"suites={len(REPRO)} differing={differing} time={elapsed:.1f}s")
    assert ok
