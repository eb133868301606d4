"""Random directions, Haar frames and orthogonal changes of basis.

All randomness comes from an explicitly passed ``numpy.random.Generator``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from ._stats import mean_interval, wilson_interval

__all__ = [
    "UnitVector",
    "OrthonormalFrame",
    "sample_sphere",
    "sample_sphere_many",
    "sample_haar_frame",
    "rotate_to_e1",
    "verify_concentration",
    "verify_basis_overlap",
    "ConcentrationReport",
    "OverlapReport",
    "CONCENTRATION_BOUNDS",
]


class UnitVector:
    """A direction in R^n, renormalized on construction."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        c = np.array(coords, dtype=float).ravel()
        norm = np.linalg.norm(c)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("cannot normalize a zero or non-finite vector")
        c = c / norm
        c.setflags(write=False)
        self.coords = c

    @classmethod
    def basis(cls, n: int, i: int) -> "UnitVector":
        e = np.zeros(n)
        e[i] = 1.0
        return cls(e)

    @property
    def dimension(self) -> int:
        return self.coords.size

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    def __neg__(self):
        return UnitVector(-self.coords)

    def __repr__(self):
        return f"UnitVector({np.array2string(self.coords, precision=4)})"


def as_unit(v) -> np.ndarray:
    """Coerce a UnitVector or array-like to a unit numpy vector."""
    if isinstance(v, UnitVector):
        return v.coords
    v = np.asarray(v, dtype=float).ravel()
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("direction must be nonzero")
    return v if abs(norm - 1.0) <= 1e-12 else v / norm


class OrthonormalFrame:
    """An orthonormal basis stored column-wise in an n x n matrix."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, check: bool = True, atol: float = 1e-10):
        M = np.array(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"frame must be square, got {M.shape}")
        if check:
            resid = orthonormality_residual(M)
            if resid > atol:
                raise ValueError(f"columns are not orthonormal (residual {resid:.2e})")
        M.setflags(write=False)
        self.matrix = M

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def column(self, i: int) -> np.ndarray:
        return self.matrix[:, i]

    @property
    def columns(self) -> list[UnitVector]:
        return [UnitVector(self.matrix[:, i]) for i in range(self.dimension)]

    def to_frame(self, x) -> np.ndarray:
        """Coordinates of ``x`` in this frame (F^T x)."""
        return self.matrix.T @ np.asarray(x, dtype=float)

    def from_frame(self, y) -> np.ndarray:
        """Ambient vector with frame coordinates ``y`` (F y)."""
        return self.matrix @ np.asarray(y, dtype=float)

    def residual(self) -> float:
        return orthonormality_residual(self.matrix)


def orthonormality_residual(M) -> float:
    M = np.asarray(M, dtype=float)
    return float(np.abs(M.T @ M - np.eye(M.shape[1])).max()) if M.size else 0.0


def sample_sphere(n: int, rng: np.random.Generator) -> UnitVector:
    """Uniform direction on the unit sphere in R^n (normalized Gaussian)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    while True:
        g = rng.standard_normal(n)
        norm = np.linalg.norm(g)
        if norm > 0.0:
            return UnitVector(g / norm)


def sample_sphere_many(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` uniform directions as rows of a (count, n) array."""
    G = rng.standard_normal((count, n))
    norms = np.linalg.norm(G, axis=1, keepdims=True)
    # a zero row has probability 0; resample defensively
    bad = norms[:, 0] == 0.0
    while bad.any():
        G[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(G, axis=1, keepdims=True)
        bad = norms[:, 0] == 0.0
    return G / norms


def sample_haar_frame(n: int, rng: np.random.Generator) -> OrthonormalFrame:
    """Haar-distributed orthogonal matrix via QR with sign-corrected R diagonal.

    Plain QR output is biased by the LAPACK sign convention; multiplying each
    column of Q by sign(R_ii) makes the law exactly Haar.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return OrthonormalFrame(Q * d, check=False)


def rotate_to_e1(u) -> OrthonormalFrame:
    """Orthonormal frame whose first column is ``u`` (Householder construction).

    The reflector is built from ``u + sign(u_1) e_1`` to avoid cancellation,
    and the first column is re-signed so that it equals ``u`` exactly in
    exact arithmetic.
    """
    u = as_unit(u)
    n = u.size
    s = 1.0 if u[0] >= 0 else -1.0
    w = u.copy()
    w[0] += s
    H = np.eye(n) - (2.0 / (w @ w)) * np.outer(w, w)
    # H u = -s e_1, so H e_1 = -s u
    H[:, 0] *= -s
    return OrthonormalFrame(H, check=False)


CONCENTRATION_BOUNDS = (
    # (label, threshold multiplier c in ||x|| c / sqrt(n), event, bound, direction)
    ("le_24/25", 24 / 25, "le", 3 / 5, "ge"),
    ("le_18/25", 18 / 25, "le", 11 / 20, "le"),
    ("ge_1/5", 1 / 5, "ge", 4 / 5, "ge"),
)


@dataclass
class ConcentrationReport:
    n: int
    samples: int
    confidence: float
    rows: list = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return all(r["consistent"] for r in self.rows)


def verify_concentration(n: int, samples: int, rng: np.random.Generator,
                         c_thresholds=CONCENTRATION_BOUNDS, confidence: float = 0.95,
                         x=None) -> ConcentrationReport:
    """Empirical probabilities for the inner-product concentration bounds.

    For y uniform on the sphere, estimates Pr[|<y,x>| <= c ||x|| / sqrt(n)] (or
    >=) for each threshold and checks the stated bound against a Wilson
    interval: a lower bound holds if the interval's upper end reaches it, an
    upper bound holds if the interval's lower end does not exceed it.
    """
    if n < 5:
        raise ValueError(f"the concentration bounds are stated for n >= 5, got n={n}")
    if x is None:
        x = sample_sphere(n, rng).coords * rng.uniform(0.5, 2.0)
    x = np.asarray(x, dtype=float)
    xnorm = np.linalg.norm(x)
    inner = np.empty(samples)
    chunk = max(1, min(samples, 2_000_000 // n))
    for start in range(0, samples, chunk):
        stop = min(samples, start + chunk)
        inner[start:stop] = sample_sphere_many(n, stop - start, rng) @ x
    scaled = np.abs(inner) * math.sqrt(n) / xnorm
    report = ConcentrationReport(n, samples, confidence)
    for label, c, event, bound, direction in c_thresholds:
        hits = int(np.count_nonzero(scaled <= c if event == "le" else scaled >= c))
        lo, hi = wilson_interval(hits, samples, confidence)
        consistent = hi >= bound if direction == "ge" else lo <= bound
        report.rows.append(dict(label=label, threshold=c, event=event, bound=bound,
                                direction=direction, probability=hits / samples,
                                ci_low=lo, ci_high=hi, consistent=consistent))
    return report


@dataclass
class OverlapReport:
    n: int
    method: str
    accepted: int
    proposals: int
    mean: float
    ci_low: float
    ci_high: float
    bias_bound: float
    reliable: bool
    unconditional_sign_fixed_mean: float
    notes: str = ""

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else 0.0


def verify_basis_overlap(n: int, samples: int, rng: np.random.Generator,
                         method: str = "truncated", min_accepted: int = 1000,
                         bias_tolerance: float = 1e-9, batch: int = 4096,
                         max_proposals: int | None = None) -> OverlapReport:
    """Estimate E[W_n | E_n] for a Haar basis (u_i) and fixed unit v.

    W_n = <(1/sqrt n) sum_i u_i, v> and E_n = {<u_i, v> >= -1/n for all i}.
    By invariance, X = U^T v is uniform on the sphere, so with X = G/||G||
    for Gaussian G the target is W_n = sum(G)/(sqrt(n) ||G||) conditioned on
    G_i >= -||G||/n.

    ``method="naive"`` rejection-samples Gaussian G directly; E_n has
    probability about Phi(1/sqrt n)^n, so this only works for small n.
    ``method="truncated"`` proposes each G_i from N(0,1) truncated to
    [-c0, inf) with c0 = (1+eta)/sqrt(n) and keeps proposals that satisfy E_n.
    Since E_n depends only on G/||G|| and ||G|| is independent of the
    direction, accepted draws follow the exact conditional law restricted to
    the event ||G|| <= n c0, whose complement has chi-square tail mass
    ``bias_bound`` (chosen below ``bias_tolerance``).

    ``samples`` is the target number of accepted draws.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if method not in ("truncated", "naive"):
        raise ValueError(f"unknown method {method!r}")
    if max_proposals is None:
        max_proposals = 200 * samples if method == "truncated" else 2000 * samples
    sqrt_n = math.sqrt(n)

    if method == "truncated":
        radius = math.sqrt(stats.chi2.isf(bias_tolerance, n))
        c0 = radius / n
        bias_bound = float(stats.chi2.sf(radius * radius, n))
        p_lo = special.ndtr(-c0)
    else:
        bias_bound = 0.0

    values = []
    accepted = proposals = 0
    sign_fixed = []
    while accepted < samples and proposals < max_proposals:
        k = min(batch, max_proposals - proposals)
        if method == "truncated":
            u = rng.uniform(p_lo, 1.0, size=(k, n))
            G = special.ndtri(u)
        else:
            G = rng.standard_normal((k, n))
        norms = np.linalg.norm(G, axis=1)
        ok = np.all(G >= -(norms / n)[:, None], axis=1)
        W = G.sum(axis=1) / (sqrt_n * norms)
        values.append(W[ok])
        accepted += int(ok.sum())
        proposals += k
        if len(sign_fixed) < 16:
            # sign-flipped frame, as produced by sign fixing without conditioning
            H = rng.standard_normal((k, n))
            sign_fixed.append(np.abs(H).sum(axis=1) / (sqrt_n * np.linalg.norm(H, axis=1)))

    vals = np.concatenate(values) if values else np.zeros(0)
    if vals.size:
        mean, lo, hi = mean_interval(vals)
    else:
        mean, lo, hi = float("nan"), float("nan"), float("nan")
    reliable = vals.size >= min_accepted
    notes = "" if reliable else (
        f"only {vals.size} accepted of {proposals} proposals; estimate unreliable")
    return OverlapReport(n, method, int(vals.size), proposals, mean, lo, hi, bias_bound,
                         reliable, float(np.concatenate(sign_fixed).mean()), notes)
