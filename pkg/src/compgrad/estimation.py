"""Normalized-gradient estimation from comparisons.

:func:`estimate_constant` returns a direction with constant overlap with the
gradient using exactly n comparisons. :func:`estimate` refines it to any
precision eps with O(n log(1/eps)) comparisons by bracketing and then
bisecting each ratio g_i / g_1 in a frame whose first axis is the coarse
estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .comparator import ComparisonOracle
from .dp import dp_batch, dp_is_at_most
from .geometry import UnitVector, rotate_to_e1, sample_haar_frame

__all__ = ["EstimateResult", "estimate_constant", "estimate", "default_cap_limit"]


@dataclass
class EstimateResult:
    direction: UnitVector
    queries_used: int
    stage_log: dict = field(default_factory=dict)

    @property
    def vector(self) -> np.ndarray:
        return self.direction.coords


def _check_common(x, gamma: float, L: float) -> np.ndarray:
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if not L > 0:
        raise ValueError(f"smoothness L must be positive, got {L}")
    return np.asarray(x, dtype=float)


def _constant_stage(oracle, x, gamma, L, rng):
    n = x.size
    U = np.array(sample_haar_frame(n, rng).matrix)
    flips = dp_batch(oracle, x, U.T, gamma / n, L)
    U[:, flips] *= -1
    return U.sum(axis=1) / math.sqrt(n), flips


def estimate_constant(oracle: ComparisonOracle, x, gamma: float, L: float,
                      rng: np.random.Generator) -> EstimateResult:
    """Average of a sign-fixed Haar frame.

    Each frame vector is flipped unless a probe at precision gamma/n shows it
    is not pointing against the gradient, so every <v_i, g> >= -1/n.
    """
    x = _check_common(x, gamma, L)
    start = oracle.read_counter()
    u, flips = _constant_stage(oracle, x, gamma, L, rng)
    return EstimateResult(UnitVector(u), oracle.read_counter() - start,
                          dict(flips=flips.astype(np.int8)))


def default_cap_limit(n: int) -> float:
    """Largest cap the doubling search may reach (a power of two >= 40 sqrt n)."""
    return float(2 ** math.ceil(math.log2(40 * math.sqrt(n))))


def estimate(oracle: ComparisonOracle, x, epsilon: float, gamma: float, L: float,
             rng: np.random.Generator, mode: str = "lockstep",
             cap_limit: float | None = None) -> EstimateResult:
    """Estimate g = grad f(x) / ||grad f(x)|| to within ``epsilon``.

    After the constant stage supplies u, work in a frame (b_1 = u, b_2, ...)
    with sign-fixed b_i. For w_i(beta) = beta b_1 - b_i, a probe returning
    AtMostDelta means beta is (up to precision) below g_i / g_1. Each
    coordinate first doubles a cap l_i until beta = l_i / sqrt n clears the
    ratio, then bisects [-l_i / sqrt n, l_i / sqrt n] down to width
    eps / (4 sqrt n). The estimate is b_1 + sum_i alpha_i b_i, normalized.

    Coordinates are independent, so ``mode="lockstep"`` issues each round of
    probes for all coordinates as one batch; ``mode="sequential"`` finishes
    coordinate i before starting i+1. Both spend the same queries and agree
    for deterministic tie policies.

    The doubling search stops at ``cap_limit`` (default
    :func:`default_cap_limit`); this is only reachable when the constant
    stage failed, and such runs are flagged with ``cap_hit``.
    """
    x = _check_common(x, gamma, L)
    if not 0 < epsilon < 1 / math.sqrt(2):
        raise ValueError(f"epsilon must lie in (0, 1/sqrt(2)), got {epsilon}")
    if mode not in ("lockstep", "sequential"):
        raise ValueError(f"mode must be 'lockstep' or 'sequential', got {mode!r}")
    n = x.size
    start = oracle.read_counter()

    if n == 1:
        sign = -1.0 if dp_is_at_most(oracle, x, np.ones(1), gamma / 2, L) else 1.0
        return EstimateResult(UnitVector([sign]), oracle.read_counter() - start,
                              dict(caps=np.zeros(0), alphas=np.zeros(0), depth=np.zeros(0, int)))

    u, const_flips = _constant_stage(oracle, x, gamma, L, rng)
    B = np.array(rotate_to_e1(u).matrix)
    flips = dp_batch(oracle, x, B[:, 1:].T, gamma / n, L)
    B[:, 1:][:, flips] *= -1

    d2 = epsilon * gamma / (400 * math.sqrt(n))
    limit = default_cap_limit(n) if cap_limit is None else float(cap_limit)
    width = epsilon / (4 * math.sqrt(n))
    search = _lockstep if mode == "lockstep" else _sequential
    caps, alphas, depth, cap_hit = search(oracle, x, B, d2, L, limit, width)

    h = B[:, 0] + B[:, 1:] @ alphas
    log = dict(constant_flips=const_flips.astype(np.int8), flips=flips.astype(np.int8),
               caps=caps, alphas=alphas, depth=depth, cap_hit=cap_hit,
               coarse=u, delta2=d2)
    return EstimateResult(UnitVector(h), oracle.read_counter() - start, log)


def _directions(B, betas, idx):
    # rows: (beta b_1 - b_i) / ||.|| for each coordinate index i in idx
    W = betas[:, None] * B[:, 0][None, :] - B[:, idx].T
    return W / np.sqrt(betas * betas + 1.0)[:, None]


def _lockstep(oracle, x, B, d2, L, limit, width):
    m = B.shape[0] - 1
    sqrt_n = math.sqrt(B.shape[0])
    idx = np.arange(1, m + 1)
    caps = np.ones(m)
    cap_hit = np.zeros(m, dtype=bool)
    active = np.ones(m, dtype=bool)
    while active.any():
        rows = np.flatnonzero(active)
        below = dp_batch(oracle, x, _directions(B, caps[rows] / sqrt_n, idx[rows]), d2, L)
        grow = rows[below]
        caps[grow] *= 2
        hit = grow[caps[grow] >= limit]
        cap_hit[hit] = True
        active[:] = False
        active[grow] = True
        active[hit] = False

    lo, hi = -caps / sqrt_n, caps / sqrt_n
    depth = np.zeros(m, dtype=np.int64)
    active = hi - lo >= width
    while active.any():
        rows = np.flatnonzero(active)
        mid = (lo[rows] + hi[rows]) / 2
        below = dp_batch(oracle, x, _directions(B, mid, idx[rows]), d2, L)
        lo[rows[below]] = mid[below]
        hi[rows[~below]] = mid[~below]
        depth[rows] += 1
        active = hi - lo >= width
    return caps, (lo + hi) / 2, depth, cap_hit


def _sequential(oracle, x, B, d2, L, limit, width):
    m = B.shape[0] - 1
    sqrt_n = math.sqrt(B.shape[0])
    b1 = B[:, 0]
    caps = np.ones(m)
    alphas = np.zeros(m)
    depth = np.zeros(m, dtype=np.int64)
    cap_hit = np.zeros(m, dtype=bool)

    def probe(beta, bi):
        w = (beta * b1 - bi) / math.sqrt(beta * beta + 1.0)
        return dp_is_at_most(oracle, x, w, d2, L)

    for j in range(m):
        bi = B[:, j + 1]
        ell = 1.0
        while probe(ell / sqrt_n, bi):
            ell *= 2
            if ell >= limit:
                cap_hit[j] = True
                break
        lo, hi = -ell / sqrt_n, ell / sqrt_n
        while hi - lo >= width:
            mid = (lo + hi) / 2
            if probe(mid, bi):
                lo = mid
            else:
                hi = mid
            depth[j] += 1
        caps[j], alphas[j] = ell, (lo + hi) / 2
    return caps, alphas, depth, cap_hit
