"""Pure numpy implementations of the hot loops (always available)."""
from __future__ import annotations

import numpy as np


def grid_bisect(oracle, x, frame, ytilde, k_lo, k_hi, width, delta, L):
    """Bisect k for every row of ``ytilde`` in lockstep.

    For row r the probe direction is frame @ (k, ytilde[r]) normalized; a
    probe answering AtMostDelta moves the lower end up to k, otherwise the
    upper end comes down. A zero direction degenerates to comparing x with
    itself. Returns the last midpoint per row and the number of rounds.
    """
    x = np.asarray(x, dtype=float)
    F = np.asarray(frame, dtype=float)
    Yt = np.asarray(ytilde, dtype=float)
    rows = Yt.shape[0]
    k1 = np.full(rows, float(k_lo))
    k2 = np.full(rows, float(k_hi))
    k = np.zeros(rows)
    tail = Yt @ F[:, 1:].T
    tail_sq = np.einsum("ij,ij->i", Yt, Yt)
    step = 2.0 * delta / L
    depth = 0
    active = k2 - k1 >= width
    while active.any():
        idx = np.flatnonzero(active)
        k[idx] = (k1[idx] + k2[idx]) / 2
        norms = np.sqrt(k[idx] ** 2 + tail_sq[idx])
        D = k[idx, None] * F[:, 0][None, :] + tail[idx]
        nz = norms > 0
        D[nz] /= norms[nz, None]
        D[~nz] = 0.0
        below = oracle.compare_many(x + step * D, x) != 1
        k1[idx[below]] = k[idx[below]]
        k2[idx[~below]] = k[idx[~below]]
        depth += 1
        active = k2 - k1 >= width
    return k, depth
