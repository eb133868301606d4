import io
import json
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from compgrad.comparator import ComparisonOracle
from compgrad.estimation import estimate
from compgrad.experiments import (ConfigError, default_config, load_config, read_csv,
                                  records_to_csv, run)
from compgrad.experiments.config import Grid, validate
from compgrad.experiments.records import CSV_COLUMNS, RunRecord, fit_scaling
from compgrad.experiments.cli import main
from compgrad.functions import random_quadratic
from compgrad.testing import TestParams, make_promise_instance, test_deterministic


def small(suite, **grid):
    cfg = default_config(suite)
    return cfg.with_overrides(grid=Grid(**{**cfg.grid.__dict__, **grid}), replicas=4)


def write_ini(tmp_path, body):
    p = tmp_path / "cfg.ini"
    p.write_text(textwrap.dedent(body))
    return p


def test_load_config(tmp_path):
    cfg = load_config(write_ini(tmp_path, """
        [run]
        suite = estimate
        base_seed = 9
        replicas = 3
        [grid]
        n = 4, 8
        epsilon = 0.2
        tie_policy = plus, random
        [caps]
        time_limit = 30
        [output]
        format = json
        """))
    assert cfg.suite == "estimate" and cfg.base_seed == 9 and cfg.replicas == 3
    assert cfg.grid.n == (4, 8) and cfg.grid.epsilon == (0.2,)
    assert cfg.grid.model == ("hyperplane", "quadratic")
    assert cfg.caps.time_limit == 30.0 and cfg.output_format == "json"


@pytest.mark.parametrize("body,match", [
    ("[grid]\nn = 3\n", "suite"),
    ("[run]\nsuite = estimate\n[grid]\ncolour = red\n", "unknown grid key"),
    ("[run]\nsuite = estimate\n[grid]\nn = three\n", "grid.n"),
    ("[run]\nsuite = nope\n", "unknown suite"),
])
def test_load_config_errors(tmp_path, body, match):
    with pytest.raises(ConfigError, match=match):
        load_config(write_ini(tmp_path, body))


@pytest.mark.parametrize("suite,grid,match", [
    ("test_randomized", dict(n=(5,)), "n >= 6"),
    ("estimate", dict(epsilon=(0.9,)), "epsilon"),
    ("estimate", dict(tie_policy=("sometimes",)), "tie policy"),
    ("concentration", dict(n=(4,)), "n >= 5"),
    ("quantum", dict(n=(3,)), "memory cap"),
    ("test_deterministic", dict(distance=("far",)), "distance"),
])
def test_validate_rejects(suite, grid, match):
    with pytest.raises(ConfigError, match=match):
        validate(small(suite, **grid))


def test_empty_grid_gives_header_only():
    res = run(small("estimate", n=()))
    assert res.records == []
    assert records_to_csv(res.records) == ",".join(CSV_COLUMNS) + "\n"


def test_csv_round_trip():
    res = run(small("estimate", n=(4,), epsilon=(0.2,), model=("hyperplane",)))
    text = records_to_csv(res.records)
    back = read_csv(io.StringIO(text))
    assert records_to_csv(back) == text
    assert all(r.success for r in back)


def _rec(cell, n, eps, q):
    return RunRecord("estimate", cell, 0, "s", dict(n=n, epsilon=eps), True, q, 0.0)


def test_fit_scaling_linear():
    recs = [_rec(i, n, 0.1, 3 * n + 7) for i, n in enumerate([10, 20, 40, 80])]
    fit = fit_scaling(recs, "n")
    assert fit.slope == pytest.approx(3.0) and fit.intercept == pytest.approx(7.0)
    assert fit.r2 == pytest.approx(1.0)


def test_fit_scaling_constant_data():
    recs = [_rec(i, 50, 2.0 ** -k, 879) for i, k in enumerate(range(2, 8))]
    fit = fit_scaling(recs, "log_inv_eps")
    assert fit.slope == pytest.approx(0.0, abs=1e-9) and fit.r2 == 1.0


def test_fit_scaling_needs_four_values():
    with pytest.raises(ValueError, match="at least 4"):
        fit_scaling([_rec(0, 10, 0.1, 5), _rec(1, 20, 0.1, 9)], "n")


def test_cli_run_fit_report(tmp_path, capsys):
    cfg = write_ini(tmp_path, """
        [run]
        suite = test_deterministic
        replicas = 4
        [grid]
        n = 6, 12, 24, 48
        epsilon = 0.2
        model = hyperplane
        """)
    out = tmp_path / "det.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((tmp_path / "det.csv.summary.json").read_text())
    assert summary["failed_cells"] == [] and "wall_time" in summary
    assert summary["fits"]["n"]["r2"] > 0.9
    assert main(["fit", str(out), "--predictor", "n"]) == 0
    assert "slope=" in capsys.readouterr().out
    assert main(["report", str(out)]) == 0
    assert "4/4" in capsys.readouterr().out


def test_cli_errors(tmp_path, capsys):
    assert main(["run"]) == 2
    assert main(["run", "--suite", "test_randomized", "--replicas", "1",
                 "--config", str(write_ini(tmp_path, "[run]\nsuite = estimate\n"))]) == 2
    assert "conflicts" in capsys.readouterr().err


def test_failed_cell_is_reported():
    cfg = small("estimate", n=(4,), epsilon=(0.2,), model=("hyperplane",))
    cfg = cfg.with_overrides(caps=cfg.caps.__class__(time_limit=-1.0))
    res = run(cfg)
    assert len(res.summary["failed_cells"]) == 1
    assert "TimeoutError" in res.summary["failed_cells"][0]["error"]


def test_rerun_is_byte_identical(tmp_path):
    cfg = write_ini(tmp_path, """
        [run]
        suite = estimate
        base_seed = 5
        replicas = 3
        [grid]
        n = 3, 7
        epsilon = 0.1
        """)
    outs = []
    for threads in ("1", "1", "2"):
        out = tmp_path / f"o{len(outs)}.csv"
        env = dict(os.environ, COMPGRAD_THREADS=threads)
        subprocess.run([sys.executable, "-m", "compgrad", "run", "--config", str(cfg),
                        "--out", str(out)], env=env, check=True)
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_oracle_audit_two_evaluations_per_query(rng):
    m = random_quadratic(6, rng)
    o = ComparisonOracle(m)
    estimate(o, np.zeros(6), 0.1, 1.0, m.smoothness, rng)
    inst = make_promise_instance(8, 0.2, "No", rng)
    o2 = ComparisonOracle(inst.model)
    test_deterministic(o2, inst.x, inst.v, TestParams(0.2, inst.gamma))
    for model, oracle in ((m, o), (inst.model, o2)):
        assert model.evaluations == 2 * oracle.read_counter()
