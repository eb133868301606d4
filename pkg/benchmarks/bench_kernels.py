"""Compare the compiled and numpy grid-bisection kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Prints wall time per backend, speedup, and how often the two backends end on
the same midpoint (they can differ only on probes that are ties up to
rounding, since the compiled kernel sums model values in a different order).
"""
import argparse
import math
import time

import numpy as np

from compgrad import _kernels
from compgrad.comparator import ComparisonOracle
from compgrad.functions import make_hyperplane, random_quadratic
from compgrad.geometry import rotate_to_e1, sample_sphere


def _setup(kind, n, t, rng):
    model = make_hyperplane(rng.standard_normal(n)) if kind == "hyperplane" else random_quadratic(n, rng)
    x = rng.standard_normal(n) * 0.3
    F = rotate_to_e1(sample_sphere(n, rng)).matrix
    idx = np.indices((t + 1,) * n).reshape(n, -1).T / t
    return model, x, F, np.ascontiguousarray(idx[:, 1:])


def bench(kind, n, t, repeat, eps=0.25):
    rng = np.random.default_rng(0)
    model, x, F, Yt = _setup(kind, n, t, rng)
    width = eps ** 2 / (8 * math.pi * n ** 1.5)
    delta = eps ** 2 / (48 * math.pi * n ** 3)
    out = {}
    for backend in ("python", "cython"):
        best = math.inf
        for _ in range(repeat):
            oracle = ComparisonOracle(model)
            t0 = time.perf_counter()
            k, depth, used = _kernels.grid_bisect(oracle, x, F, Yt, -5 * n, 5 * n, width, delta,
                                                  model.smoothness, backend=backend)
            best = min(best, time.perf_counter() - t0)
        out[backend] = (best, k, oracle.read_counter())
    same = float(np.mean(np.abs(out["python"][1] - out["cython"][1]) < width))
    py, cy = out["python"][0], out["cython"][0]
    print(f"{kind:10s} n={n} t={t:4d} rows={Yt.shape[0]:7d} queries={out['python'][2]:9d} "
          f"python={py:7.3f}s cython={cy:7.3f}s speedup={py / cy:5.1f}x agree={same:.4f}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.compiled_available():
        raise SystemExit("compiled kernels are not built; run: pip install -e . --no-build-isolation")
    for kind in ("hyperplane", "quadratic"):
        for n, t in ((2, 64), (2, 160), (2, 320), (3, 40)):
            bench(kind, n, t, args.repeat)


if __name__ == "__main__":
    main()
