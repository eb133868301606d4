"""Seeded sweep driver."""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import suites
from .config import ExperimentConfig, validate
from .records import PREDICTORS, RunRecord, fit_scaling, summarize_cells

log = logging.getLogger(__name__)

SCALING_SUITES = ("test_randomized", "test_deterministic", "estimate")


@dataclass
class RunResult:
    records: list
    summary: dict = field(default_factory=dict)


def replica_seed(base_seed: int, cell_index: int, replica: int) -> np.random.Generator:
    return np.random.default_rng([base_seed, cell_index, replica])


def run_cell(cfg: ExperimentConfig, cell_index: int, cell: dict) -> list[RunRecord]:
    context = None
    if cfg.suite == "test_randomized":
        context = suites.make_randomized_instance(cell, cfg.base_seed, cell_index)
    records = []
    started = time.perf_counter()
    policies = cfg.grid.tie_policy
    for replica in range(cfg.replicas):
        if cfg.caps.time_limit is not None and time.perf_counter() - started > cfg.caps.time_limit:
            raise TimeoutError(f"cell {cell_index} exceeded {cfg.caps.time_limit}s "
                               f"after {replica} replicas")
        tie = policies[replica % len(policies)]
        rng = replica_seed(cfg.base_seed, cell_index, replica)
        t0 = time.perf_counter()
        outcomes = suites.run_trial(cfg.suite, cell, rng, tie, replica, cfg, context)
        wall = (time.perf_counter() - t0) / len(outcomes)
        for case, success, queries, err, aux in outcomes:
            params = dict(cell, tie_policy=tie, case=case)
            records.append(RunRecord(cfg.suite, cell_index, replica,
                                     f"{cfg.base_seed}-{cell_index}-{replica}", params,
                                     bool(success), int(queries), float(err), float(aux), wall))
    return records


def _threads() -> int:
    raw = os.environ.get("COMPGRAD_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring non-integer COMPGRAD_THREADS=%r", raw)
        return 1


def run(cfg: ExperimentConfig) -> RunResult:
    """Run every cell of the configured grid; failed cells are reported, not raised."""
    validate(cfg)
    cells = suites.enumerate_cells(cfg)
    started = time.perf_counter()
    results: dict[int, list] = {}
    failures = []
    workers = min(_threads(), max(1, len(cells)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {i: pool.submit(run_cell, cfg, i, c) for i, c in enumerate(cells)}
            for i, fut in futures.items():
                try:
                    results[i] = fut.result()
                except Exception as exc:  # noqa: BLE001 - recorded per cell
                    failures.append(dict(cell=i, params=cells[i], error=repr(exc)))
    else:
        for i, c in enumerate(cells):
            try:
                results[i] = run_cell(cfg, i, c)
            except Exception as exc:  # noqa: BLE001
                log.exception("cell %d failed", i)
                failures.append(dict(cell=i, params=cells[i], error=repr(exc)))
    records = [r for i in sorted(results) for r in results[i]]

    fits = {}
    if cfg.suite in SCALING_SUITES:
        for pred in PREDICTORS:
            try:
                fits[pred] = asdict(fit_scaling(records, pred))
            except (ValueError, KeyError):
                pass
    summary = dict(suite=cfg.suite, base_seed=cfg.base_seed, replicas=cfg.replicas,
                   cells=[asdict(c) for c in summarize_cells(records)], fits=fits,
                   failed_cells=failures, wall_time=time.perf_counter() - started)
    return RunResult(records, summary)
