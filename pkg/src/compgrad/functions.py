"""Smooth test functions with known gradients.

Models are the ground truth sitting behind a :class:`~compgrad.comparator.ComparisonOracle`.
Algorithms only ever see the oracle; analytic gradients are reachable through
:meth:`FunctionModel.verification_handle`, which exists for harness-side checks.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FunctionModel",
    "QuadraticModel",
    "HyperplaneInstance",
    "GradientHandle",
    "make_quadratic",
    "make_hyperplane",
    "random_quadratic",
    "check_model_invariants",
    "DEFAULT_RADIUS",
]

DEFAULT_RADIUS = 10.0


class GradientHandle:
    """Read-only access to the analytic gradient of a model.

    Kept separate from the model so algorithm code has no attribute through
    which it could reach a gradient by accident.
    """

    __slots__ = ("_model",)

    def __init__(self, model: "FunctionModel"):
        self._model = model

    def gradient(self, x) -> np.ndarray:
        return self._model._gradient(np.asarray(x, dtype=float))

    def normalized_gradient(self, x) -> np.ndarray:
        g = self.gradient(x)
        norm = np.linalg.norm(g)
        if norm == 0.0:
            raise ValueError("gradient vanishes at x; normalized gradient undefined")
        return g / norm

    def gradient_norm(self, x) -> float:
        return float(np.linalg.norm(self.gradient(x)))


class FunctionModel:
    """Base class for an L-smooth objective on a ball of radius ``radius``.

    Subclasses implement ``_value``, ``_values`` (row-batched) and ``_gradient``.
    ``evaluations`` counts every scalar function evaluation; the oracle audit
    relies on it.
    """

    kind = "abstract"

    def __init__(self, dimension: int, smoothness: float, grad_lower_bound: float,
                 radius: float = DEFAULT_RADIUS):
        if dimension < 1:
            raise ValueError(f"dimension must be positive, got {dimension}")
        if smoothness < 0:
            raise ValueError(f"smoothness must be non-negative, got {smoothness}")
        self.dimension = int(dimension)
        self.smoothness = float(smoothness)
        self.grad_lower_bound = float(grad_lower_bound)
        self.radius = float(radius)
        self._evaluations = 0
        self._lock = threading.Lock()

    @property
    def evaluations(self) -> int:
        return self._evaluations

    def _count(self, k: int) -> None:
        with self._lock:
            self._evaluations += k

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"expected point of shape ({self.dimension},), got {x.shape}")
        self._count(1)
        return self._value(x)

    def evaluate_many(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dimension:
            raise ValueError(f"expected rows of length {self.dimension}, got {X.shape}")
        self._count(X.shape[0])
        return self._values(X)

    def in_domain(self, x) -> bool:
        return bool(np.linalg.norm(x) <= self.radius)

    def verification_handle(self) -> GradientHandle:
        return GradientHandle(self)

    # subclass hooks
    def _value(self, x: np.ndarray) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def _values(self, X: np.ndarray) -> np.ndarray:
        return np.array([self._value(row) for row in X])

    def _gradient(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def kernel_params(self):
        """``(A, b, c)`` when the model is a quadratic the compiled kernels can evaluate, else None."""
        return None


class QuadraticModel(FunctionModel):
    """f(x) = 0.5 x^T A x + b^T x + c with A symmetric PSD."""

    kind = "quadratic"

    def __init__(self, A, b, c: float = 0.0, radius: float = DEFAULT_RADIUS,
                 smoothness: float | None = None):
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if b.shape != (A.shape[0],):
            raise ValueError(f"b must have shape ({A.shape[0]},), got {b.shape}")
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(A).max())):
            raise ValueError("A must be symmetric")
        A = 0.5 * (A + A.T)
        eig = np.linalg.eigvalsh(A) if A.size else np.zeros(0)
        if eig.size and eig[0] < -1e-10 * max(1.0, abs(eig[-1])):
            raise ValueError(f"A must be positive semidefinite (min eigenvalue {eig[0]:.3g})")
        spectral = float(max(abs(eig[0]), abs(eig[-1]))) if eig.size else 0.0
        L = spectral if smoothness is None else float(smoothness)
        if L < spectral:
            raise ValueError(f"declared smoothness {L} is below the spectral norm {spectral}")
        gamma = _quadratic_gamma(A, b, eig, radius)
        super().__init__(A.shape[0], L, gamma, radius)
        self.A = A
        self.b = b
        self.c = float(c)
        self.A.setflags(write=False)
        self.b.setflags(write=False)

    def _value(self, x):
        return float(0.5 * x @ (self.A @ x) + self.b @ x + self.c)

    def _values(self, X):
        return 0.5 * np.einsum("ij,ij->i", X @ self.A, X) + X @ self.b + self.c

    def _gradient(self, x):
        return self.A @ x + self.b

    def kernel_params(self):
        return self.A, self.b, self.c


class HyperplaneInstance(FunctionModel):
    """f(x) = <g, x> + b with unit g; the gradient is g everywhere.

    The true smoothness is 0, but the algorithms divide by L, so any positive
    value may be declared.
    """

    kind = "hyperplane"

    def __init__(self, g, offset: float = 0.0, smoothness: float = 1.0,
                 radius: float = DEFAULT_RADIUS):
        g = np.array(g, dtype=float).ravel()
        norm = np.linalg.norm(g)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("hyperplane direction must be a nonzero finite vector")
        if abs(norm - 1.0) > 1e-12:
            g = g / norm
        if smoothness <= 0:
            raise ValueError(f"declared smoothness must be positive, got {smoothness}")
        super().__init__(g.size, smoothness, 1.0, radius)
        self.g = g
        self.offset = float(offset)
        self.g.setflags(write=False)

    def _value(self, x):
        return float(self.g @ x + self.offset)

    def _values(self, X):
        return X @ self.g + self.offset

    def _gradient(self, x):
        return self.g.copy()

    def kernel_params(self):
        return None, self.g, self.offset


def _quadratic_gamma(A, b, eig, radius):
    """Certified lower bound on ||Ax + b|| over the ball of the given radius."""
    n = A.shape[0]
    if n == 0:
        return 0.0
    if np.allclose(A, 0.0):
        return float(np.linalg.norm(b))
    lam_min = float(eig[0])
    if lam_min <= 1e-12:
        return 0.0
    x_star = -np.linalg.solve(A, b)
    return max(0.0, lam_min * (float(np.linalg.norm(x_star)) - radius))


def make_quadratic(n: int, A, b, c: float = 0.0, radius: float = DEFAULT_RADIUS) -> QuadraticModel:
    A = np.asarray(A, dtype=float)
    if A.shape != (n, n):
        raise ValueError(f"A must have shape ({n}, {n}), got {A.shape}")
    return QuadraticModel(A, b, c, radius=radius)


def make_hyperplane(g, b: float = 0.0, smoothness: float = 1.0,
                    radius: float = DEFAULT_RADIUS) -> HyperplaneInstance:
    return HyperplaneInstance(g, b, smoothness=smoothness, radius=radius)


def random_quadratic(n: int, rng: np.random.Generator, eig_range=(0.5, 2.0),
                     radius: float = DEFAULT_RADIUS) -> QuadraticModel:
    """Random positive-definite quadratic with eigenvalues drawn from ``eig_range``."""
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    Q = Q * np.sign(np.diag(R))
    lam = rng.uniform(*eig_range, size=n)
    A = (Q * lam) @ Q.T
    b = rng.standard_normal(n)
    return QuadraticModel(0.5 * (A + A.T), b, float(rng.standard_normal()), radius=radius)


@dataclass
class InvariantReport:
    samples: int
    lipschitz_violations: int
    taylor_violations: int
    worst_lipschitz_ratio: float
    worst_taylor_ratio: float

    @property
    def ok(self) -> bool:
        return self.lipschitz_violations == 0 and self.taylor_violations == 0


def check_model_invariants(model: FunctionModel, rng: np.random.Generator,
                           samples: int = 1000, rtol: float = 1e-9) -> InvariantReport:
    """Sample (x, y, h) triples in the declared ball and check the smoothness bounds.

    Checks ||grad(x) - grad(y)|| <= L ||x - y|| and the second-order Taylor bound
    |f(x + h v) - f(x) - h <grad(x), v>| <= L h^2 / 2 for unit v.
    """
    n = model.dimension
    handle = model.verification_handle()
    L = model.smoothness
    lip_bad = taylor_bad = 0
    worst_lip = worst_taylor = 0.0

    def ball_point():
        d = rng.standard_normal(n)
        d /= np.linalg.norm(d)
        return d * model.radius * rng.uniform() ** (1.0 / n)

    for _ in range(samples):
        x, y = ball_point(), ball_point()
        gx, gy = handle.gradient(x), handle.gradient(y)
        lhs = np.linalg.norm(gx - gy)
        rhs = L * np.linalg.norm(x - y)
        scale = 1.0 + np.linalg.norm(gx) + np.linalg.norm(gy)
        if lhs > rhs + rtol * scale:
            lip_bad += 1
        if rhs > 0:
            worst_lip = max(worst_lip, lhs / rhs)

        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        h = rng.uniform(1e-3, 1.0)
        fx = model._value(x)
        resid = abs(model._value(x + h * v) - fx - h * (gx @ v))
        bound = 0.5 * L * h * h
        if resid > bound + rtol * (1.0 + abs(fx)):
            taylor_bad += 1
        if bound > 0:
            worst_taylor = max(worst_taylor, resid / bound)
    return InvariantReport(samples, lip_bad, taylor_bad, worst_lip, worst_taylor)
