import os
import subprocess
import sys

import numpy as np
import pytest

from compgrad import _kernels
from compgrad.comparator import ComparisonOracle, tie_policy_from_name
from compgrad.functions import HyperplaneInstance, random_quadratic
from compgrad.geometry import rotate_to_e1, sample_sphere

needs_ext = pytest.mark.skipif(not _kernels.compiled_available(), reason="extension not built")


def _problem(kind, n, t, rng):
    model = random_quadratic(n, rng) if kind == "quadratic" else \
        HyperplaneInstance(rng.standard_normal(n), float(rng.standard_normal()))
    x = rng.uniform(-0.5, 0.5, n)
    F = rotate_to_e1(sample_sphere(n, rng)).matrix
    Y = np.indices((t + 1,) * n).reshape(n, -1).T / t
    return model, x, F, Y[:, 1:]


@needs_ext
@pytest.mark.parametrize("kind", ["hyperplane", "quadratic"])
@pytest.mark.parametrize("policy", ["plus", "minus"])
@pytest.mark.parametrize("n,t", [(2, 30), (3, 8)])
def test_backends_agree(kind, policy, n, t, rng):
    model, x, F, Yt = _problem(kind, n, t, rng)
    args = (x, F, Yt, -5.0 * n, 5.0 * n, 1e-3, 1e-4, model.smoothness)
    out = {}
    for backend in ("python", "cython"):
        o = ComparisonOracle(model, tie_policy_from_name(policy))
        k, depth, used = _kernels.grid_bisect(o, *args, backend=backend)
        assert used == backend
        out[backend] = (k, depth, o.read_counter(), o.ties)
    np.testing.assert_array_equal(out["python"][0], out["cython"][0])
    assert out["python"][1:] == out["cython"][1:]


@needs_ext
def test_charge_updates_model_evaluations(rng):
    model, x, F, Yt = _problem("hyperplane", 2, 10, rng)
    o = ComparisonOracle(model)
    before = model.evaluations
    _kernels.grid_bisect(o, x, F, Yt, -10.0, 10.0, 0.01, 1e-3, 1.0, backend="cython")
    assert model.evaluations - before == 2 * o.read_counter()


def test_random_ties_fall_back_to_python(rng):
    model, x, F, Yt = _problem("hyperplane", 2, 5, rng)
    o = ComparisonOracle(model, tie_policy_from_name("random", 3))
    assert o.fused_params() is None
    assert _kernels.grid_bisect(o, x, F, Yt, -10.0, 10.0, 0.1, 1e-3, 1.0)[2] == "python"
    with pytest.raises(RuntimeError):
        _kernels.grid_bisect(o, x, F, Yt, -10.0, 10.0, 0.1, 1e-3, 1.0, backend="cython")


def test_unknown_backend(rng):
    model, x, F, Yt = _problem("hyperplane", 2, 3, rng)
    with pytest.raises(ValueError):
        _kernels.grid_bisect(ComparisonOracle(model), x, F, Yt, -1.0, 1.0, 0.1, 1e-3, 1.0,
                             backend="fortran")


def test_pure_python_env_var():
    env = dict(os.environ, COMPGRAD_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import compgrad._kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
