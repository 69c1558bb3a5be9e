"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 run failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

from qmlfraud import dataprep
from qmlfraud.dataprep import DataError
from qmlfraud.harness.config import ConfigError, load_config
from qmlfraud.harness.report import write_reports
from qmlfraud.harness.runner import load_records, run_experiment, run_grid

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUN = 0, 1, 2, 3

log = logging.getLogger("qmlfraud")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qmlfraud", description="Variational quantum classifier benchmark harness")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pre = sub.add_parser("preprocess", help="clean, balance, reduce, split and scale a raw CSV")
    pre.add_argument("--dataset", required=True, choices=sorted(dataprep.LOADERS))
    pre.add_argument("--input", required=True, type=Path)
    pre.add_argument("--seed", type=int, default=0)
    pre.add_argument("--out", required=True, type=Path)
    pre.add_argument("--test-fraction", type=float, default=0.2)

    run = sub.add_parser("run", help="train and evaluate one configuration")
    run.add_argument("--config", required=True, type=Path)

    grid = sub.add_parser("grid", help="run the dataset x model x map x ansatz grid")
    grid.add_argument("--config", required=True, type=Path)
    grid.add_argument("--workers", type=int, default=None)

    rep = sub.add_parser("report", help="write tables from saved run records")
    rep.add_argument("--in", dest="in_dir", required=True, type=Path)
    rep.add_argument("--out", required=True, type=Path)
    return p


def cmd_preprocess(args) -> int:
    table = dataprep.load_raw(args.dataset, args.input)
    n0, n1 = table.class_counts()
    print(f"loaded {len(table)} rows from {args.input} ({n1} positive, {n0} negative)")
    prep = dataprep.prepare(table, args.dataset, args.seed, args.test_fraction)
    out = dataprep.save_prepared(prep, args.out)
    if table.encodings:
        dataprep.write_mappings(table, out / "mappings")
    full = dataprep.DataTable(
        prep.train.column_names,
        list(prep.train.features) + list(prep.test.features),
        list(prep.train.labels) + list(prep.test.labels),
        prep.train.label_column,
    )
    cols, corr = dataprep.pearson_correlations(full)
    with open(out / "correlations.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["", *cols])
        for name, row in zip(cols, corr):
            w.writerow([name, *(f"{v:.6f}" for v in row)])
    print(f"wrote {len(prep.train)} train / {len(prep.test)} test rows to {out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    record = run_experiment(cfg)
    m = record.test_metrics
    print(
        f"{record.run_id}: test accuracy {m.accuracy:.4f} precision {m.precision:.4f} "
        f"recall {m.recall:.4f} f1 {m.f1:.4f} ({len(record.history)} evals, {record.wall_seconds:.1f}s)"
    )
    write_reports([record], cfg.output_dir)
    return EXIT_OK


def cmd_grid(args) -> int:
    cfg = load_config(args.config)
    workers = args.workers if args.workers is not None else cfg.grid_workers
    if workers < 1:
        raise UsageError("--workers must be >= 1")
    cfg = replace(cfg, grid_workers=workers)
    records = run_grid(
        cfg, cfg.grid_datasets, cfg.grid_architectures, cfg.grid_feature_maps,
        cfg.grid_ansatze, cfg.grid_seeds, workers,
    )
    if not records:
        print("warning: empty grid, nothing was run", file=sys.stderr)
        return EXIT_OK
    write_reports(records, cfg.output_dir)
    failed = [r for r in records if not r.ok]
    print(f"{len(records) - len(failed)} runs succeeded, {len(failed)} failed; reports in {cfg.output_dir}")
    return EXIT_RUN if len(failed) == len(records) else EXIT_OK


def cmd_report(args) -> int:
    records = load_records(args.in_dir)
    if not records:
        raise DataError(f"no run records found in {args.in_dir}")
    paths = write_reports(records, args.out)
    print(f"wrote {len(paths)} files to {args.out}")
    return EXIT_OK


COMMANDS = {"preprocess": cmd_preprocess, "run": cmd_run, "grid": cmd_grid, "report": cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:
        log.debug("run failure", exc_info=True)
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
