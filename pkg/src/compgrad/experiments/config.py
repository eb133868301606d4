"""Experiment configuration and its INI file format.

Example::

    [run]
    suite = estimate
    base_seed = 0
    replicas = 300

    [grid]
    n = 10, 50, 200
    epsilon = 0.2, 0.05, 0.01
    model = hyperplane, quadratic
    tie_policy = plus, minus, random, adversarial

    [caps]
    memory_cap = 16777216

    [output]
    path = estimate.csv
    format = csv

Grid keys: ``n``, ``epsilon``, ``delta`` (failure probability), ``model``,
``tie_policy`` (cycled over replicas, not a grid axis), ``case`` (Yes/No),
``distance`` (``boundary``, ``random``, ``mixed`` or a number), ``stage``
(``full``/``constant``). Caps: ``memory_cap``, ``t``, ``samples``,
``time_limit``. Omitted keys take the suite defaults from
:func:`default_config`; a key present with an empty value is an empty list.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace

from ..comparator import TIE_POLICY_NAMES
from ..quantumsim import default_grid_t

SUITES = ("dp_soundness", "test_randomized", "test_deterministic", "estimate", "quantum",
          "concentration", "overlap")
MODEL_KINDS = ("hyperplane", "quadratic", "axis")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    n: tuple = ()
    epsilon: tuple = ()
    delta: tuple = (1 / 3,)
    model: tuple = ("hyperplane",)
    tie_policy: tuple = TIE_POLICY_NAMES
    case: tuple = ("Yes", "No")
    distance: tuple = ("boundary",)
    stage: tuple = ("full",)


@dataclass(frozen=True)
class Caps:
    memory_cap: int = 2 ** 24
    t: int | None = None
    samples: int = 100_000
    time_limit: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str
    grid: Grid = field(default_factory=Grid)
    base_seed: int = 0
    replicas: int = 1
    caps: Caps = field(default_factory=Caps)
    output_path: str | None = None
    output_format: str = "csv"

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


_DEFAULT_GRIDS = {
    "dp_soundness": Grid(n=(2, 10, 50), model=("hyperplane", "quadratic", "axis")),
    "test_randomized": Grid(n=(6, 50, 200), epsilon=(0.1, 0.3)),
    "test_deterministic": Grid(n=(10, 20, 40, 80, 160), epsilon=(0.1, 0.3),
                               model=("hyperplane", "quadratic"), distance=("mixed",)),
    "estimate": Grid(n=(10, 50, 200), epsilon=(0.2, 0.05, 0.01),
                     model=("hyperplane", "quadratic")),
    "quantum": Grid(n=(2,), epsilon=(0.25,)),
    "concentration": Grid(n=(5, 20, 200)),
    "overlap": Grid(n=(500,)),
}
_DEFAULT_REPLICAS = {"dp_soundness": 11_112, "test_randomized": 300, "test_deterministic": 250,
                     "estimate": 300, "quantum": 300, "concentration": 1, "overlap": 1}
_DEFAULT_CAPS = {"overlap": Caps(samples=10_000)}


def default_config(suite: str) -> ExperimentConfig:
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; expected one of {SUITES}")
    return ExperimentConfig(suite, _DEFAULT_GRIDS[suite], replicas=_DEFAULT_REPLICAS[suite],
                            caps=_DEFAULT_CAPS.get(suite, Caps()))


def _split(raw: str) -> list[str]:
    return [p.strip() for p in raw.replace("\n", ",").split(",") if p.strip()]


_CASTS = {"n": int, "epsilon": float, "delta": float}


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    if not parser.has_option("run", "suite"):
        raise ConfigError(f"{path}: missing [run] suite")
    cfg = default_config(parser.get("run", "suite").strip())
    grid_kw = {}
    if parser.has_section("grid"):
        for key, raw in parser.items("grid"):
            if key not in Grid.__dataclass_fields__:
                raise ConfigError(f"{path}: unknown grid key {key!r}")
            cast = _CASTS.get(key, str)
            try:
                grid_kw[key] = tuple(cast(p) for p in _split(raw))
            except ValueError as exc:
                raise ConfigError(f"{path}: bad value for grid.{key}: {exc}") from None
    caps_kw = {}
    if parser.has_section("caps"):
        for key, raw in parser.items("caps"):
            if key not in Caps.__dataclass_fields__:
                raise ConfigError(f"{path}: unknown caps key {key!r}")
            raw = raw.strip()
            caps_kw[key] = None if raw == "" else (float(raw) if key == "time_limit" else int(raw))
    run = parser["run"] if parser.has_section("run") else {}
    out = parser["output"] if parser.has_section("output") else {}
    return replace(cfg, grid=replace(cfg.grid, **grid_kw), caps=replace(cfg.caps, **caps_kw),
                   base_seed=int(run.get("base_seed", cfg.base_seed)),
                   replicas=int(run.get("replicas", cfg.replicas)),
                   output_path=out.get("path", cfg.output_path) or None,
                   output_format=out.get("format", cfg.output_format).strip())


def validate(cfg: ExperimentConfig) -> None:
    """Reject any grid point outside the preconditions of the suite's operation."""
    problems = []
    g = cfg.grid
    if cfg.suite not in SUITES:
        problems.append(f"unknown suite {cfg.suite!r}")
    if cfg.replicas < 0:
        problems.append("replicas must be non-negative")
    if cfg.output_format not in FORMATS:
        problems.append(f"format must be one of {FORMATS}")
    for p in g.tie_policy:
        if p not in TIE_POLICY_NAMES:
            problems.append(f"unknown tie policy {p!r}")
    if not g.tie_policy:
        problems.append("at least one tie policy is required")
    for m in g.model:
        if m not in MODEL_KINDS:
            problems.append(f"unknown model kind {m!r}")
    for n in g.n:
        if n < 1:
            problems.append(f"n must be positive, got {n}")
    needs_eps = cfg.suite in ("test_randomized", "test_deterministic", "estimate", "quantum")
    for e in (g.epsilon if needs_eps else ()):
        if not 0 < e < 1 / math.sqrt(2):
            problems.append(f"epsilon {e} outside (0, 1/sqrt 2)")
    for d in g.delta:
        if not 0 < d < 1:
            problems.append(f"failure probability {d} outside (0, 1)")
    for c in g.case:
        if c not in ("Yes", "No"):
            problems.append(f"case must be Yes or No, got {c!r}")
    for s in g.stage:
        if s not in ("full", "constant"):
            problems.append(f"stage must be full or constant, got {s!r}")
    for d in g.distance:
        if d not in ("boundary", "random", "mixed"):
            try:
                float(d)
            except ValueError:
                problems.append(f"distance must be boundary, random, mixed or a number, got {d!r}")
    if cfg.suite == "test_randomized":
        problems += [f"randomized tester needs n >= 6, got {n}" for n in g.n if n < 6]
    if cfg.suite == "concentration":
        problems += [f"concentration bounds need n >= 5, got {n}" for n in g.n if n < 5]
    if cfg.suite == "quantum":
        for n in g.n:
            for e in g.epsilon:
                t = cfg.caps.t or default_grid_t(n, e)
                if (t + 1) ** n > cfg.caps.memory_cap:
                    problems.append(f"quantum grid (t+1)^n = {(t + 1) ** n} at n={n}, eps={e} "
                                    f"exceeds memory cap {cfg.caps.memory_cap}")
    if problems:
        raise ConfigError("; ".join(problems))
