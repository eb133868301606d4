"""Run records, CSV/JSON serialization and scaling fits."""
from __future__ import annotations

import csv
import io
import json
import math
from collections import OrderedDict
from dataclasses import asdict, dataclass, field

import numpy as np

from .._stats import wilson_interval

# Fixed CSV column order. wall_time is deliberately absent so that reruns are
# byte-identical; it is reported in the JSON summary instead.
CSV_COLUMNS = ("suite", "cell", "replica", "seed", "n", "epsilon", "delta", "model",
               "tie_policy", "case", "success", "queries", "error_norm", "aux")
PARAM_KEYS = ("n", "epsilon", "delta", "model", "tie_policy", "case")
PREDICTORS = ("n", "log_inv_eps", "n_log_inv_eps")


@dataclass
class RunRecord:
    suite: str
    cell: int
    replica: int
    seed: str
    params: dict
    success: bool
    queries: int
    error_norm: float
    aux: float = math.nan
    wall_time: float = 0.0

    def row(self) -> list[str]:
        p = self.params
        return [self.suite, str(self.cell), str(self.replica), self.seed,
                *(_fmt(p.get(k)) for k in PARAM_KEYS),
                "1" if self.success else "0", str(int(self.queries)),
                _fmt(self.error_norm), _fmt(self.aux)]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    return str(v)


def write_csv(records, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())


def records_to_csv(records) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def _parse_param(key, raw):
    if raw == "":
        return None
    if key == "n":
        return int(raw)
    if key in ("epsilon", "delta"):
        return float(raw)
    return raw


def read_csv(fh) -> list[RunRecord]:
    out = []
    for row in csv.DictReader(fh):
        params = {k: _parse_param(k, row[k]) for k in PARAM_KEYS if row.get(k, "") != ""}
        out.append(RunRecord(row["suite"], int(row["cell"]), int(row["replica"]), row["seed"],
                             params, row["success"] == "1", int(row["queries"]),
                             float(row["error_norm"]), float(row["aux"])))
    return out


def record_to_json(r: RunRecord) -> dict:
    d = asdict(r)
    for k in ("error_norm", "aux"):
        if isinstance(d[k], float) and math.isnan(d[k]):
            d[k] = None
    return d


@dataclass
class CellSummary:
    cell: int
    params: dict
    trials: int
    successes: int
    rate: float
    wilson_low: float
    wilson_high: float
    mean_queries: float
    max_queries: int
    wall_time: float = 0.0


def summarize_cells(records) -> list[CellSummary]:
    groups: "OrderedDict[int, list[RunRecord]]" = OrderedDict()
    for r in records:
        groups.setdefault(r.cell, []).append(r)
    out = []
    for cell, rs in groups.items():
        k = sum(r.success for r in rs)
        lo, hi = wilson_interval(k, len(rs))
        params = {key: v for key, v in rs[0].params.items() if key not in ("tie_policy", "case")}
        q = [r.queries for r in rs]
        out.append(CellSummary(cell, params, len(rs), k, k / len(rs), lo, hi,
                               float(np.mean(q)), int(max(q)), float(sum(r.wall_time for r in rs))))
    return out


@dataclass
class ScalingFit:
    predictor: str
    slope: float
    intercept: float
    r2: float
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)


def _predictor_value(params, predictor):
    if predictor == "n":
        return float(params["n"])
    eps = params.get("epsilon")
    if eps is None:
        raise ValueError(f"predictor {predictor!r} needs epsilon in every record")
    li = math.log2(1 / eps)
    return li if predictor == "log_inv_eps" else params["n"] * li


def fit_scaling(records, predictor: str) -> ScalingFit:
    """Least-squares line through mean queries per cell against ``predictor``.

    Needs at least four distinct predictor values.
    """
    if predictor not in PREDICTORS:
        raise ValueError(f"predictor must be one of {PREDICTORS}, got {predictor!r}")
    cells: "OrderedDict[int, list]" = OrderedDict()
    for r in records:
        cells.setdefault(r.cell, [r.params, []])[1].append(r.queries)
    xs, ys = [], []
    for params, q in cells.values():
        xs.append(_predictor_value(params, predictor))
        ys.append(float(np.mean(q)))
    x, y = np.array(xs), np.array(ys)
    if np.unique(x).size < 4:
        raise ValueError(f"need at least 4 distinct values of {predictor}, got {np.unique(x).size}")
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1 - float(resid @ resid) / ss_tot
    return ScalingFit(predictor, float(slope), float(intercept), r2, xs, ys)


def summary_to_json(summary: dict) -> str:
    def default(o):
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        if hasattr(o, "__dataclass_fields__"):
            return asdict(o)
        raise TypeError(f"cannot serialize {type(o).__name__}")
    return json.dumps(summary, indent=2, sort_keys=True, default=default) + "\n"
