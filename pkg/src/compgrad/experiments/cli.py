"""Command-line entry point: ``compgrad run|fit|report``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import FORMATS, SUITES, ConfigError, default_config, load_config
from .records import (PREDICTORS, fit_scaling, read_csv, record_to_json, summarize_cells,
                      summary_to_json, write_csv)
from .runner import run


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="compgrad", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a suite and write per-trial records")
    r.add_argument("--suite", choices=SUITES)
    r.add_argument("--config", type=Path, help="INI experiment config")
    r.add_argument("--seed", type=int, help="base seed")
    r.add_argument("--replicas", type=int)
    r.add_argument("--out", type=Path, help="output path (default: stdout)")
    r.add_argument("--format", choices=FORMATS)

    f = sub.add_parser("fit", help="fit mean queries per cell against a predictor")
    f.add_argument("records", type=Path, help="CSV written by 'run'")
    f.add_argument("--predictor", choices=PREDICTORS, default="n")

    rep = sub.add_parser("report", help="per-cell success rates with Wilson intervals")
    rep.add_argument("records", type=Path)
    return p


def _cmd_run(args) -> int:
    if args.config is not None:
        cfg = load_config(args.config)
        if args.suite and args.suite != cfg.suite:
            raise ConfigError(f"--suite {args.suite} conflicts with config suite {cfg.suite}")
    elif args.suite:
        cfg = default_config(args.suite)
    else:
        raise ConfigError("either --suite or --config is required")
    cfg = cfg.with_overrides(base_seed=args.seed, replicas=args.replicas,
                             output_format=args.format,
                             output_path=str(args.out) if args.out else None)
    result = run(cfg)
    out = Path(cfg.output_path) if cfg.output_path else None
    if cfg.output_format == "csv":
        if out is None:
            write_csv(result.records, sys.stdout)
        else:
            with open(out, "w", newline="") as fh:
                write_csv(result.records, fh)
            out.with_name(out.name + ".summary.json").write_text(summary_to_json(result.summary))
    else:
        doc = dict(records=[record_to_json(r) for r in result.records], summary=result.summary)
        text = json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n"
        if out is None:
            sys.stdout.write(text)
        else:
            out.write_text(text)
    if result.summary["failed_cells"]:
        logging.warning("%d cell(s) failed", len(result.summary["failed_cells"]))
        return 1
    return 0


def _cmd_fit(args) -> int:
    with open(args.records, newline="") as fh:
        fit = fit_scaling(read_csv(fh), args.predictor)
    print(f"predictor={fit.predictor} slope={fit.slope:.6g} intercept={fit.intercept:.6g} "
          f"r2={fit.r2:.6f}")
    return 0


def _cmd_report(args) -> int:
    with open(args.records, newline="") as fh:
        cells = summarize_cells(read_csv(fh))
    for c in cells:
        params = " ".join(f"{k}={v}" for k, v in c.params.items())
        print(f"cell {c.cell:3d} {params:45s} {c.successes}/{c.trials} "
              f"rate={c.rate:.3f} [{c.wilson_low:.3f}, {c.wilson_high:.3f}] "
              f"queries mean={c.mean_queries:.1f} max={c.max_queries}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return {"run": _cmd_run, "fit": _cmd_fit, "report": _cmd_report}[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"compgrad: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
