"""Hot-loop kernels with a compiled backend and a numpy fallback.

The compiled extension is used when it was built and the oracle qualifies
(kernel-capable model, deterministic tie policy). Setting
``COMPGRAD_PURE_PYTHON=1`` forces the numpy path.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("COMPGRAD_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure Python requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"

__all__ = ["BACKEND", "grid_bisect", "compiled_available"]


def compiled_available() -> bool:
    return _ckernels is not None


def grid_bisect(oracle, x, frame, ytilde, k_lo, k_hi, width, delta, L, backend: str = "auto"):
    """Per-row bisection on k; see :func:`_pykernels.grid_bisect`.

    Returns ``(k_last, depth, backend_used)``. Queries are charged to
    ``oracle`` either way.
    """
    if backend not in ("auto", "python", "cython"):
        raise ValueError(f"unknown backend {backend!r}")
    params = oracle.fused_params() if backend != "python" and _ckernels is not None else None
    if params is None:
        if backend == "cython":
            raise RuntimeError("compiled kernel unavailable for this oracle or build")
        k, depth = _pykernels.grid_bisect(oracle, x, frame, ytilde, k_lo, k_hi, width, delta, L)
        return k, depth, "python"
    A, b, c, tie_eps, tie = params
    Yt = np.ascontiguousarray(ytilde, dtype=np.float64)
    k, depth, total, ties = _ckernels.grid_bisect(
        np.ascontiguousarray(x, dtype=np.float64), np.ascontiguousarray(frame, dtype=np.float64),
        Yt, float(k_lo), float(k_hi), float(width), 2.0 * delta / L,
        None if A is None else np.ascontiguousarray(A, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64), float(c), float(tie_eps), int(tie))
    oracle.charge(total, ties)
    return k, depth, "cython"
