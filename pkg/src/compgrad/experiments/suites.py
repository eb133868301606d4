"""Per-suite cell enumeration and single-trial drivers.

Each trial returns a list of ``(case, success, queries, error_norm, aux)``
tuples; the runner wraps them into records. Correctness is judged here with
the verification handle, never inside the algorithms.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..comparator import ComparisonOracle, tie_policy_from_name
from ..dp import dp
from ..estimation import estimate, estimate_constant
from ..functions import HyperplaneInstance, random_quadratic
from ..geometry import verify_basis_overlap, verify_concentration
from ..quantumsim import Alg6Caps, simulate_alg6
from ..testing import Answer, TestParams, make_promise_instance, test_deterministic, test_randomized

CELL_AXES = {
    "dp_soundness": ("n", "model"),
    "test_randomized": ("n", "epsilon", "delta", "case", "model", "distance"),
    "test_deterministic": ("n", "epsilon", "model", "distance"),
    "estimate": ("n", "epsilon", "model", "stage"),
    "quantum": ("n", "epsilon", "model"),
    "concentration": ("n",),
    "overlap": ("n",),
}


def enumerate_cells(cfg) -> list[dict]:
    axes = CELL_AXES[cfg.suite]
    values = [getattr(cfg.grid, a) for a in axes]
    return [dict(zip(axes, combo)) for combo in itertools.product(*values)]


def _ball_point(n, rng, radius):
    d = rng.standard_normal(n)
    return d / np.linalg.norm(d) * radius * rng.uniform() ** (1 / n)


def _hyperplane_or_quadratic(kind, n, rng):
    """Model, base point and the gamma handed to the algorithm."""
    if kind == "quadratic":
        model = random_quadratic(n, rng)
        x = _ball_point(n, rng, 0.5 * model.radius)
        return model, x, float(np.linalg.norm(model.verification_handle().gradient(x))) / 2
    if kind == "axis":
        g = np.zeros(n)
        g[0] = 1.0
    else:
        g = rng.standard_normal(n)
    model = HyperplaneInstance(g, float(rng.standard_normal()))
    return model, _ball_point(n, rng, 0.5 * model.radius), 1.0


def trial_dp_soundness(cell, rng, tie, cfg):
    n, kind = cell["n"], cell["model"]
    if kind == "quadratic":
        model = random_quadratic(n, rng, eig_range=(0.0, 3.0))
        v = rng.standard_normal(n)
    elif kind == "axis":
        j, k = rng.integers(n, size=2)
        g = np.zeros(n)
        g[j] = 1.0
        model = HyperplaneInstance(g, 0.0, smoothness=float(rng.uniform(0.5, 2.0)))
        v = np.zeros(n)
        v[k] = rng.choice([-1.0, 1.0])
    else:
        model = HyperplaneInstance(rng.standard_normal(n), float(rng.standard_normal()),
                                   smoothness=float(rng.uniform(0.5, 2.0)))
        v = rng.standard_normal(n)
    x = _ball_point(n, rng, 0.5 * model.radius)
    delta = float(10 ** rng.uniform(-4, 0))
    oracle = ComparisonOracle(model, tie, warn_outside_domain=False)
    verdict = dp(oracle, x, v, delta, model.smoothness)
    grad = model.verification_handle().gradient(x)
    deriv = float(grad @ verdict.direction.coords)
    atol = 1e-9 * (1 + float(np.linalg.norm(grad)))
    bound = -delta - deriv if not verdict.at_most else deriv - delta
    return [(verdict.kind.value, verdict.holds_for(grad, atol), oracle.read_counter(),
             max(0.0, bound), deriv)]


def _promise(cell, rng, case, distance):
    if cell["model"] == "axis":
        d = 0.0 if case is Answer.YES else math.sqrt(2)
        return make_promise_instance(cell["n"], cell["epsilon"], case, rng, "hyperplane",
                                     distance=d, axis_aligned=True)
    if distance not in ("boundary", None):
        distance = float(distance)
    return make_promise_instance(cell["n"], cell["epsilon"], case, rng, cell["model"],
                                 distance=distance)


def make_randomized_instance(cell, base_seed, cell_index):
    rng = np.random.default_rng([base_seed, cell_index])
    dist = cell["distance"]
    dist = None if dist in ("random", "mixed") else dist
    return _promise(cell, rng, Answer(cell["case"]), dist)


def trial_test_randomized(cell, rng, tie, cfg, instance):
    oracle = ComparisonOracle(instance.model, tie)
    params = TestParams(cell["epsilon"], instance.gamma, failure=cell["delta"])
    verdict = test_randomized(oracle, instance.x, instance.v, params, rng)
    return [(instance.case.value, verdict.answer is instance.case, verdict.queries_used,
             instance.distance, verdict.trace["statistic"])]


def trial_test_deterministic(cell, rng, tie, cfg, replica):
    case = Answer.YES if replica % 2 == 0 else Answer.NO
    mode = cell["distance"]
    if mode == "mixed":
        dist = "boundary" if (replica // 2) % 2 == 0 else None
    elif mode == "random":
        dist = None
    else:
        dist = mode
    inst = _promise(cell, rng, case, dist)
    oracle = ComparisonOracle(inst.model, tie)
    verdict = test_deterministic(oracle, inst.x, inst.v, TestParams(cell["epsilon"], inst.gamma))
    return [(case.value, verdict.answer is case, verdict.queries_used, inst.distance,
             float(verdict.trace.get("cap_sum", math.nan)))]


def trial_estimate(cell, rng, tie, cfg):
    n, eps = cell["n"], cell["epsilon"]
    model, x, gamma = _hyperplane_or_quadratic(cell["model"], n, rng)
    oracle = ComparisonOracle(model, tie)
    g = model.verification_handle().normalized_gradient(x)
    if cell["stage"] == "constant":
        res = estimate_constant(oracle, x, gamma, model.smoothness, rng)
        overlap = float(res.vector @ g)
        return [("constant", overlap >= 0.1, res.queries_used,
                 float(np.linalg.norm(res.vector - g)), overlap)]
    res = estimate(oracle, x, eps, gamma, model.smoothness, rng)
    err = float(np.linalg.norm(res.vector - g))
    cap_budget = float(np.sum(res.stage_log["caps"] ** 2)) / n if n > 1 else 0.0
    return [("full", err <= eps, res.queries_used, err, cap_budget)]


def trial_quantum(cell, rng, tie, cfg):
    n, eps = cell["n"], cell["epsilon"]
    model, x, gamma = _hyperplane_or_quadratic(cell["model"], n, rng)
    x = x / max(1.0, float(np.linalg.norm(x)))
    oracle = ComparisonOracle(model, tie)
    res = simulate_alg6(oracle, x, eps, gamma, model.smoothness, rng,
                        Alg6Caps(t=cfg.caps.t, memory_cap=cfg.caps.memory_cap))
    g = model.verification_handle().normalized_gradient(x)
    err = float(np.linalg.norm(res.vector - g))
    v_ok = abs(float(res.stage_log["sampled_v"] @ g)) >= 1 / (5 * math.sqrt(n))
    return [("v_ok" if v_ok else "v_small", err <= eps, res.stage_log["transcript_queries"], err,
             float(res.stage_log["coherent_depth"]))]


def trial_concentration(cell, rng, tie, cfg):
    report = verify_concentration(cell["n"], cfg.caps.samples, rng)
    return [(row["label"], row["consistent"], 0, row["ci_high"] - row["ci_low"],
             row["probability"]) for row in report.rows]


def trial_overlap(cell, rng, tie, cfg):
    rep = verify_basis_overlap(cell["n"], cfg.caps.samples, rng)
    ok = rep.reliable and rep.ci_low > 0.7
    return [(rep.method, ok, rep.accepted, rep.ci_high - rep.ci_low, rep.mean)]


def run_trial(suite, cell, rng, tie_name, replica, cfg, context=None):
    tie = tie_policy_from_name(tie_name, seed=int(rng.integers(2 ** 32)))
    if suite == "test_randomized":
        return trial_test_randomized(cell, rng, tie, cfg, context)
    if suite == "test_deterministic":
        return trial_test_deterministic(cell, rng, tie, cfg, replica)
    return _TRIALS[suite](cell, rng, tie, cfg)


_TRIALS = {
    "dp_soundness": trial_dp_soundness,
    "estimate": trial_estimate,
    "quantum": trial_quantum,
    "concentration": trial_concentration,
    "overlap": trial_overlap,
}
