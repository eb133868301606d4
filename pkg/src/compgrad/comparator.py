"""Query-counted comparison oracle.

``compare(x, y)`` returns +1 when f(x) > f(y), -1 when f(x) < f(y), and defers to
a tie policy when the two values are within ``tie_epsilon`` of each other.
Either answer is legitimate on a tie, so downstream algorithms must be
correct under every policy.
"""
from __future__ import annotations

import threading
import warnings
from typing import Callable

import numpy as np

from .functions import FunctionModel

__all__ = [
    "TiePolicy",
    "AlwaysPlus",
    "AlwaysMinus",
    "RandomSeeded",
    "Adversarial",
    "alternating_adversary",
    "tie_policy_from_name",
    "TIE_POLICY_NAMES",
    "ComparisonOracle",
]


class TiePolicy:
    name = "abstract"

    def resolve(self, x, y, history: int) -> int:  # pragma: no cover - abstract
        raise NotImplementedError

    def resolve_many(self, X, Y, history: int) -> np.ndarray:
        return np.array([self.resolve(X[i], Y[i], history + i) for i in range(len(X))],
                        dtype=np.int8)

    def __repr__(self):
        return f"{type(self).__name__}()"


class AlwaysPlus(TiePolicy):
    name = "plus"

    def resolve(self, x, y, history):
        return 1

    def resolve_many(self, X, Y, history):
        return np.ones(len(X), dtype=np.int8)


class AlwaysMinus(TiePolicy):
    name = "minus"

    def resolve(self, x, y, history):
        return -1

    def resolve_many(self, X, Y, history):
        return -np.ones(len(X), dtype=np.int8)


class RandomSeeded(TiePolicy):
    """Fair coin per tie, drawn from a private generator."""

    name = "random"

    def __init__(self, seed=0):
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def resolve(self, x, y, history):
        return 1 if self._rng.integers(2) else -1

    def resolve_many(self, X, Y, history):
        return (2 * self._rng.integers(0, 2, size=len(X)) - 1).astype(np.int8)

    def __repr__(self):
        return f"RandomSeeded(seed={self.seed!r})"


class Adversarial(TiePolicy):
    """Delegates each tie to ``callback(x, y, history_length) -> +1 | -1``."""

    name = "adversarial"

    def __init__(self, callback: Callable[[np.ndarray, np.ndarray, int], int]):
        self.callback = callback

    def resolve(self, x, y, history):
        out = int(self.callback(x, y, history))
        if out not in (1, -1):
            raise ValueError(f"adversarial tie callback must return +1 or -1, got {out}")
        return out


def alternating_adversary(x, y, history: int) -> int:
    """Flip the tie answer on every query; defeats any fixed-answer assumption."""
    return 1 if history % 2 == 0 else -1


TIE_POLICY_NAMES = ("plus", "minus", "random", "adversarial")


def tie_policy_from_name(name: str, seed=0) -> TiePolicy:
    if name == "plus":
        return AlwaysPlus()
    if name == "minus":
        return AlwaysMinus()
    if name == "random":
        return RandomSeeded(seed)
    if name == "adversarial":
        return Adversarial(alternating_adversary)
    raise ValueError(f"unknown tie policy {name!r}; expected one of {TIE_POLICY_NAMES}")


class ComparisonOracle:
    """The only channel through which algorithms observe a model."""

    def __init__(self, model: FunctionModel, tie_policy: TiePolicy | None = None,
                 tie_epsilon: float = 0.0, warn_outside_domain: bool = True):
        if tie_epsilon < 0:
            raise ValueError(f"tie_epsilon must be non-negative, got {tie_epsilon}")
        self.model = model
        self.tie_policy = tie_policy if tie_policy is not None else AlwaysPlus()
        self.tie_epsilon = float(tie_epsilon)
        self.warn_outside_domain = warn_outside_domain
        self.ties = 0
        self._count = 0
        self._lock = threading.Lock()
        self._warned = False

    @property
    def dimension(self) -> int:
        return self.model.dimension

    @property
    def query_count(self) -> int:
        return self._count

    def read_counter(self) -> int:
        return self._count

    def reset_counter(self) -> None:
        with self._lock:
            self._count = 0
            self.ties = 0

    def _check_domain(self, *points) -> None:
        if self._warned or not self.warn_outside_domain:
            return
        r = self.model.radius
        for p in points:
            if np.ndim(p) == 1:
                outside = np.linalg.norm(p) > r
            else:
                outside = bool(np.any(np.linalg.norm(p, axis=1) > r))
            if outside:
                self._warned = True
                warnings.warn(f"comparison query outside the declared domain (radius {r})",
                              RuntimeWarning, stacklevel=3)
                return

    def compare(self, x, y) -> int:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self._check_domain(x, y)
        fx = self.model.evaluate(x)
        fy = self.model.evaluate(y)
        with self._lock:
            history = self._count
            self._count += 1
        if fx > fy + self.tie_epsilon:
            return 1
        if fx < fy - self.tie_epsilon:
            return -1
        self.ties += 1
        return self.tie_policy.resolve(x, y, history)

    __call__ = compare

    def compare_many(self, X, Y) -> np.ndarray:
        """Row-wise ``compare(X[i], Y[i])``; charges one query per row.

        ``Y`` may be a single point, broadcast against every row of ``X``.
        Ties are resolved in row order, so the result equals issuing the
        queries one by one.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.asarray(Y, dtype=float)
        k = X.shape[0]
        if Y.ndim == 1:
            self._check_domain(X, Y)
            fy = np.full(k, self.model.evaluate(Y))
            self.model._count(k - 1)
        else:
            self._check_domain(X, Y)
            fy = self.model.evaluate_many(Y)
        fx = self.model.evaluate_many(X)
        # batched and single-point evaluation may round differently; equal
        # inputs must still compare as equal
        same = np.all(X == Y, axis=1)
        fx[same] = fy[same]
        with self._lock:
            history = self._count
            self._count += k
        out = np.zeros(k, dtype=np.int8)
        out[fx > fy + self.tie_epsilon] = 1
        out[fx < fy - self.tie_epsilon] = -1
        tied = np.flatnonzero(out == 0)
        if tied.size:
            self.ties += tied.size
            Yt = np.broadcast_to(Y, X.shape)[tied] if Y.ndim == 1 else Y[tied]
            if isinstance(self.tie_policy, Adversarial):
                out[tied] = [self.tie_policy.resolve(X[i], Yt[j], history + int(i))
                             for j, i in enumerate(tied)]
            else:
                out[tied] = self.tie_policy.resolve_many(X[tied], Yt, history)
        return out

    def charge(self, queries: int, ties: int = 0) -> None:
        """Account for queries answered by a fused kernel on this oracle's behalf."""
        with self._lock:
            self._count += int(queries)
            self.ties += int(ties)
        self.model._count(2 * int(queries))

    def fused_params(self):
        """Parameters for the compiled comparison kernels, or None if ineligible.

        Only deterministic tie policies qualify, since the kernels cannot call
        back into Python per tie.
        """
        params = self.model.kernel_params()
        if params is None:
            return None
        if isinstance(self.tie_policy, AlwaysPlus):
            tie = 1
        elif isinstance(self.tie_policy, AlwaysMinus):
            tie = -1
        else:
            return None
        A, b, c = params
        return A, b, c, self.tie_epsilon, tie

    def __repr__(self):
        return (f"ComparisonOracle(model={type(self.model).__name__}(n={self.dimension}), "
                f"tie_policy={self.tie_policy!r}, queries={self._count})")
