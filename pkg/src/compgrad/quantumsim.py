"""Statevector simulation of Fourier-based gradient estimation at tiny n.

The register is indexed by y in {0, ..., T-1}^n with T = t + 1 and stored
densely, so only grids with at most ``memory_cap`` amplitudes are accepted.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .comparator import ComparisonOracle
from .dp import dp_is_at_most
from .estimation import EstimateResult
from .geometry import UnitVector, rotate_to_e1, sample_sphere

__all__ = [
    "StateVector",
    "QftEstimate",
    "Alg6Caps",
    "DEFAULT_MEMORY_CAP",
    "build_phase_state",
    "inverse_qft_measure",
    "outcome_distribution",
    "perturb_state",
    "cyclic_deviation",
    "recovery_radius",
    "choose_m",
    "simulate_alg6",
    "coherent_depth",
    "default_grid_t",
    "dump_state",
    "load_state",
]

DEFAULT_MEMORY_CAP = 2 ** 24
_HEADER = struct.Struct("<4sqq")
_MAGIC = b"CGSV"


@dataclass
class StateVector:
    amplitudes: np.ndarray
    grid_t: int
    dimension: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        expected = (self.grid_t + 1) ** self.dimension
        if self.amplitudes.size != expected:
            raise ValueError(f"expected {expected} amplitudes for n={self.dimension}, "
                             f"t={self.grid_t}, got {self.amplitudes.size}")
        norm = self.norm()
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm {norm!r})")

    @property
    def T(self) -> int:
        return self.grid_t + 1

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.T,) * self.dimension)


@dataclass
class QftEstimate:
    v_hat: np.ndarray
    shot_outcomes: np.ndarray
    m: int
    grid_t: int

    def errors(self, x) -> np.ndarray:
        return np.linalg.norm(self.v_hat - np.asarray(x, dtype=float)[None, :], axis=1)

    def success_rate(self, x) -> float:
        n = self.v_hat.shape[1]
        return float(np.mean(self.errors(x) <= recovery_radius(n, self.m, self.grid_t)))


def choose_m(n: int) -> int:
    return math.ceil(2 + 1.5 * n)


def recovery_radius(n: int, m: int, t: int) -> float:
    return math.sqrt(n) * (m + 1) / t


def _check_grid(n: int, t: int, memory_cap: int) -> int:
    if n < 1 or t < 1:
        raise ValueError(f"need n >= 1 and t >= 1, got n={n}, t={t}")
    size = (t + 1) ** n
    if size > memory_cap:
        raise ValueError(f"grid (t+1)^n = {size} exceeds the memory cap of {memory_cap} amplitudes")
    return size


def build_phase_state(x, t: int, n: int | None = None,
                      memory_cap: int = DEFAULT_MEMORY_CAP) -> StateVector:
    """Amplitudes exp(2 pi i <y, x>) / T^(n/2) for y in {0, ..., T-1}^n."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size if n is None else n
    if x.size != n:
        raise ValueError(f"x has {x.size} coordinates, expected {n}")
    _check_grid(n, t, memory_cap)
    T = t + 1
    y = np.arange(T)
    amp = np.ones(1, dtype=np.complex128)
    for xj in x:
        amp = np.multiply.outer(amp, np.exp(2j * np.pi * y * xj) / math.sqrt(T)).ravel()
    return StateVector(amp, t, n)


def outcome_distribution(state: StateVector) -> np.ndarray:
    """Measurement distribution after the inverse Fourier transform on each coordinate."""
    out = np.fft.fftn(state.tensor(), norm="ortho")
    p = (out.real ** 2 + out.imag ** 2).ravel()
    return p


def inverse_qft_measure(state: StateVector, shots: int, rng: np.random.Generator,
                        m: int | None = None) -> QftEstimate:
    """Sample outcomes K and report v_hat = K / t for each shot."""
    p = outcome_distribution(state)
    p = p / p.sum()
    flat = rng.choice(p.size, size=shots, p=p)
    K = np.stack(np.unravel_index(flat, (state.T,) * state.dimension), axis=1)
    return QftEstimate(K / state.grid_t, K, choose_m(state.dimension) if m is None else m,
                       state.grid_t)


def cyclic_deviation(K, theta, T: int) -> np.ndarray:
    """Distance between outcome K and phase position theta on the cycle Z_T."""
    d = np.mod(np.asarray(K, dtype=float) - theta, T)
    return np.minimum(d, T - d)


def perturb_state(state: StateVector, distance: float, rng: np.random.Generator) -> StateVector:
    """A normalized state at Euclidean distance ``distance`` from ``state``.

    Mixes in a random unit vector orthogonal to the state: cos(a) psi +
    sin(a) r with 2 sin(a/2) = distance.
    """
    if not 0 <= distance <= 2:
        raise ValueError(f"distance must lie in [0, 2], got {distance}")
    psi = state.amplitudes
    r = rng.standard_normal(psi.size) + 1j * rng.standard_normal(psi.size)
    r -= np.vdot(psi, r) * psi
    r /= np.linalg.norm(r)
    a = 2 * math.asin(distance / 2)
    return StateVector(math.cos(a) * psi + math.sin(a) * r, state.grid_t, state.dimension)


def dump_state(state: StateVector, path) -> None:
    """Write a little-endian header (magic, n, t) then interleaved (re, im) doubles."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, state.dimension, state.grid_t))
        fh.write(state.amplitudes.astype("<c16").tobytes())


def load_state(path) -> StateVector:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, n, t = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path}: not a state dump")
    amp = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size)
    return StateVector(amp.astype(np.complex128), int(t), int(n))


def default_grid_t(n: int, epsilon: float) -> int:
    """Smallest t with 2 n^1.5 / t <= eps / (10 sqrt n)."""
    return math.ceil(20 * n * n / epsilon)


def coherent_depth(n: int, epsilon: float) -> int:
    """Bisection rounds from a bracket of width 10 n down to eps^2 / (8 pi n^1.5)."""
    return math.ceil(math.log2(10 * n / (epsilon ** 2 / (8 * math.pi * n ** 1.5))))


@dataclass
class Alg6Caps:
    """Scale knobs for the simulation.

    ``t`` defaults to :func:`default_grid_t`; ``phase_scale`` multiplies
    h(y) in the phase and defaults to t / (5 sqrt n).
    """

    t: int | None = None
    phase_scale: float | None = None
    memory_cap: int = DEFAULT_MEMORY_CAP
    orientation_probe: bool = True
    backend: str = "auto"


def simulate_alg6(oracle: ComparisonOracle, x, epsilon: float, gamma: float, L: float,
                  rng: np.random.Generator, caps: Alg6Caps | None = None) -> EstimateResult:
    """Simulate the quantum estimator classically and sample its output.

    A random direction v becomes the first axis. For every grid point y the
    coherent bisection on k (over [-5n, 5n], precision gamma eps^2 /
    (48 pi n^3)) is run classically, giving h(y) = y_1 - k, which is close to
    <g, y> / <g, v>. The phases exp(2 pi i h(y) s) with s = ``phase_scale``
    make a Fourier state whose frequency is proportional to g in the rotated
    frame; one measurement, read with a centered wrap, gives the direction.

    With ``orientation_probe`` one extra comparison flips v when it points
    against the gradient, so the encoded frequency has a consistent sign.

    ``stage_log`` reports the transcript query count (every classical probe)
    separately from the coherent depth (bisection rounds), plus counts of
    saturated searches and register wraparounds.
    """
    caps = caps or Alg6Caps()
    x = np.asarray(x, dtype=float)
    n = x.size
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not gamma > 0 or not L > 0:
        raise ValueError("gamma and L must be positive")
    t = caps.t if caps.t is not None else default_grid_t(n, epsilon)
    _check_grid(n, t, caps.memory_cap)
    T = t + 1
    scale = caps.phase_scale if caps.phase_scale is not None else t / (5 * math.sqrt(n))
    start = oracle.read_counter()

    v = sample_sphere(n, rng).coords
    flipped = False
    if caps.orientation_probe and dp_is_at_most(oracle, x, v, gamma / (10 * math.sqrt(n)), L):
        v = -v
        flipped = True
    F = rotate_to_e1(v).matrix

    idx = np.indices((T,) * n).reshape(n, -1).T
    Y = idx / t
    k_range = 5.0 * n
    width = epsilon ** 2 / (8 * math.pi * n ** 1.5)
    delta = gamma * epsilon ** 2 / (48 * math.pi * n ** 3)
    k, depth, backend = _kernels.grid_bisect(oracle, x, F, Y[:, 1:], -k_range, k_range,
                                             width, delta, L, backend=caps.backend)
    h = Y[:, 0] - k

    saturated = int(np.count_nonzero((k <= -k_range + width) | (k >= k_range - width)))
    register = np.floor(h * t * t / math.sqrt(n))
    wraparound = int(np.count_nonzero((register < 0) | (register > t * t)))

    amp = np.exp(2j * np.pi * scale * h) / math.sqrt(idx.shape[0])
    state = StateVector(amp, t, n)
    shot = inverse_qft_measure(state, 1, rng)
    K = shot.shot_outcomes[0].astype(float)
    K_centered = np.where(K >= T / 2, K - T, K)
    z = K_centered / t
    nz = float(np.linalg.norm(z))
    direction = F @ (z / nz) if nz > 0 else F[:, 0]

    queries = oracle.read_counter() - start
    log = dict(t=t, T=T, grid_points=int(idx.shape[0]), coherent_depth=int(depth),
               transcript_queries=int(queries), orientation_flipped=flipped,
               sampled_v=v, z=z, K=K.astype(int), phase_scale=scale, saturated=saturated,
               wraparound=wraparound, backend=backend, delta=delta, width=width)
    return EstimateResult(UnitVector(direction), queries, log)
