"""Command line entry point: ``minorant run`` and ``minorant describe``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from . import experiments as ex
from .moments import write_moment_csv
from .stats import EmpiricalSample, config_digest, default_workers

RESULT_FIELDS = ["experiment", "law", "n", "statistic", "value", "stderr", "pass"]


def load_config(path) -> dict:
    return json.loads(Path(path).read_text())


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_results(report: ex.ExitReport, out: Path, workers: int) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_FIELDS)
        for r in report.rows:
            w.writerow([_cell(r[k]) for k in RESULT_FIELDS])
    cfg = report.config
    digest = config_digest(cfg.to_dict())
    raw = out / "raw"
    if report.samples:
        raw.mkdir(exist_ok=True)
    for name, values in report.samples.items():
        EmpiricalSample(values, cfg.seed, digest).save_binary(raw / f"{name}.bin")
    for name, rows in report.tables.items():
        write_moment_csv(out / f"{name}.csv", rows)
    summary = {
        "experiment": cfg.experiment,
        "config": cfg.to_dict(),
        "config_digest": digest,
        "seed": cfg.seed,
        "workers": workers,
        "pass": report.passed,
        "criteria": [c.to_dict() for c in report.criteria],
        "runtime_seconds": round(report.runtime, 3),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")


def cmd_run(args) -> int:
    try:
        raw = load_config(args.config)
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.output is not None:
            raw["output_dir"] = args.output
        cfg = ex.ExperimentConfig.from_dict(raw)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    workers = args.workers if args.workers is not None else default_workers()
    t0 = time.perf_counter()
    try:
        report = ex.run_experiment(cfg, workers=workers)
    except ex.ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    write_results(report, Path(cfg.output_dir), workers)
    for c in report.criteria:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  statistic={c.statistic:.6g}  threshold={c.threshold:.6g}")
    print(f"{cfg.experiment}: {'all criteria passed' if report.passed else 'some criteria failed'} ({time.perf_counter() - t0:.1f}s)")
    return 0 if report.passed else 1


def cmd_describe(args) -> int:
    try:
        print(ex.describe(args.name))
    except ex.ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


def cmd_list(args) -> int:
    for name in ex.EXPERIMENTS:
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="minorant", description="Convex minorant length experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment from a JSON config")
    r.add_argument("--config", required=True, help="path to the experiment config")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--workers", type=int, default=None, help="thread count (default: $MINORANT_WORKERS or 1)")
    r.add_argument("--output", default=None, help="output directory (default: config output_dir)")
    r.set_defaults(func=cmd_run)
    d = sub.add_parser("describe", help="print what an experiment tests")
    d.add_argument("name")
    d.set_defaults(func=cmd_describe)
    ls = sub.add_parser("list", help="list experiment names")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
