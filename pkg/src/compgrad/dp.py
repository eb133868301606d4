"""Directional preference: one comparison bounds a directional derivative.

Comparing f(x + (2 delta / L) v) against f(x) certifies, by L-smoothness,
either <grad f(x), v> >= -delta (answer +1) or <grad f(x), v> <= delta
(answer -1). The guarantee is deterministic.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .comparator import ComparisonOracle
from .geometry import UnitVector, as_unit

__all__ = ["DpKind", "DpVerdict", "dp", "dp_batch", "dp_is_at_most"]


class DpKind(enum.Enum):
    AT_LEAST_MINUS_DELTA = "AtLeastMinusDelta"
    AT_MOST_DELTA = "AtMostDelta"


@dataclass(frozen=True)
class DpVerdict:
    kind: DpKind
    delta: float
    direction: UnitVector
    point: np.ndarray

    @property
    def at_most(self) -> bool:
        return self.kind is DpKind.AT_MOST_DELTA

    def holds_for(self, gradient, atol: float = 0.0) -> bool:
        """Check the certified inequality against a known gradient."""
        d = float(np.dot(gradient, self.direction.coords))
        if self.kind is DpKind.AT_LEAST_MINUS_DELTA:
            return d >= -self.delta - atol
        return d <= self.delta + atol


def _check(delta: float, L: float) -> None:
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not L > 0:
        raise ValueError(f"smoothness L must be positive, got {L}")


def dp_is_at_most(oracle: ComparisonOracle, x: np.ndarray, v: np.ndarray,
                  delta: float, L: float) -> bool:
    """Allocation-light form of :func:`dp`; ``v`` must already be unit."""
    return oracle.compare(x + (2.0 * delta / L) * v, x) != 1


def dp(oracle: ComparisonOracle, x, v, delta: float, L: float) -> DpVerdict:
    _check(delta, L)
    x = np.asarray(x, dtype=float)
    u = as_unit(v)
    at_most = dp_is_at_most(oracle, x, u, delta, L)
    kind = DpKind.AT_MOST_DELTA if at_most else DpKind.AT_LEAST_MINUS_DELTA
    return DpVerdict(kind, float(delta), v if isinstance(v, UnitVector) else UnitVector(u), x)


def dp_batch(oracle: ComparisonOracle, x, V, delta, L: float) -> np.ndarray:
    """Run independent DP probes for every row of ``V`` at base point ``x``.

    ``delta`` may be a scalar or one value per row. Returns a boolean array,
    True where the verdict is AtMostDelta. Rows of ``V`` must be unit.
    """
    x = np.asarray(x, dtype=float)
    V = np.atleast_2d(np.asarray(V, dtype=float))
    delta = np.asarray(delta, dtype=float)
    if np.any(delta <= 0):
        raise ValueError("delta must be positive")
    _check(1.0, L)
    steps = (2.0 / L) * (delta[:, None] if delta.ndim else delta)
    return oracle.compare_many(x + steps * V, x) != 1
