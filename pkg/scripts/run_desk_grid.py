"""Run a reduced grid end to end and write the report tables.

Uses the synthetic CSVs from make_synthetic_data.py unless real ones are given.
Both datasets reduce to 7 features, so every circuit has 7 qubits. With 150
evaluations on the synthetic files the 72 cells finish in about two minutes on one core.

    python scripts/run_desk_grid.py --data data/synthetic --out runs/desk
"""

import argparse
import logging
import time
from dataclasses import replace
from pathlib import Path

from qmlfraud import dataprep
from qmlfraud.harness.config import ExperimentConfig
from qmlfraud.harness.report import write_reports
from qmlfraud.harness.runner import run_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", type=Path, default=Path("data/synthetic"))
    ap.add_argument("--banksim", type=Path, help="BankSim CSV (default: <data>/banksim.csv)")
    ap.add_argument("--european", type=Path, help="European CSV (default: <data>/creditcard.csv)")
    ap.add_argument("--out", type=Path, default=Path("runs/desk"))
    ap.add_argument("--max-evals", type=int, default=150)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    sources = {
        "banksim": args.banksim or args.data / "banksim.csv",
        "european": args.european or args.data / "creditcard.csv",
    }
    prepared = {}
    for name, path in sources.items():
        table = dataprep.load_raw(name, path)
        prep = dataprep.prepare(table, name, seed=0)
        prepared[name] = str(dataprep.save_prepared(prep, args.out / "prepared" / name))
        print(f"{name}: {len(prep.train)} train / {len(prep.test)} test rows")

    base = replace(
        ExperimentConfig(),
        optimizer_max_evals=args.max_evals,
        prepared=tuple(sorted(prepared.items())),
        output_dir=str(args.out),
    )
    start = time.perf_counter()
    records = run_grid(
        base, ("banksim", "european"), base.grid_architectures, base.grid_feature_maps, base.grid_ansatze,
        seeds=tuple(args.seeds), workers=args.workers,
    )
    paths = write_reports(records, args.out / "reports")
    failed = sum(not r.ok for r in records)
    print(f"{len(records)} runs, {failed} failed, {time.perf_counter() - start:.0f}s")
    for p in paths:
        if not p.name.startswith("loss_"):
            print(p)


if __name__ == "__main__":
    main()
