"""Summary CSV, fixed-width text tables and per-run loss histories."""

from __future__ import annotations

import csv
import statistics
from collections import defaultdict
from pathlib import Path

from qmlfraud.harness.runner import RunRecord

DATASET_ORDER = ("banksim", "european", "toy")
MODEL_ORDER = ("VQC", "SQNN", "EQNN")
FMAP_ORDER = ("Z", "ZZ", "Pauli")
ANSATZ_ORDER = ("RealAmplitudes", "TwoLocal", "EfficientSU2", "PauliTwoDesign")
ANSATZ_LABEL = {
    "RealAmplitudes": "Real Amplitudes",
    "TwoLocal": "Two Local",
    "EfficientSU2": "Efficient SU2",
    "PauliTwoDesign": "Pauli Two Design",
}
SUMMARY_HEADER = ["model", "feature_map", "ansatz", "dataset", "accuracy", "precision", "recall", "f1"]
METRICS = ("accuracy", "precision", "recall", "f1")


def _rank(order, value):
    return (order.index(value), "") if value in order else (len(order), value)


def sort_key(record: RunRecord):
    ds, model, fmap, ansatz = record.key()
    return (
        _rank(DATASET_ORDER, ds), _rank(MODEL_ORDER, model), _rank(FMAP_ORDER, fmap),
        _rank(ANSATZ_ORDER, ansatz), int(record.config.get("seed", 0)), record.run_id,
    )


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def summary_rows(records) -> list[list[str]]:
    rows = []
    for r in sorted((r for r in records if r.ok), key=sort_key):
        ds, model, fmap, ansatz = r.key()
        m = r.test_metrics
        rows.append([model, fmap, ansatz, ds] + [f"{getattr(m, k):.4f}" for k in METRICS])
    return rows


def format_table(model: str, dataset: str, records) -> str:
    """Aligned text table grouped by feature map, two decimals."""
    header = ["Model", "Feature Map", "Ansatz", "Accuracy", "Precision", "Recall", "F1_score"]
    body = []
    last_fmap = None
    for r in sorted(records, key=sort_key):
        _, _, fmap, ansatz = r.key()
        m = r.test_metrics
        body.append(
            [model if not body else "", fmap if fmap != last_fmap else "", ANSATZ_LABEL.get(ansatz, ansatz)]
            + [f"{getattr(m, k):.2f}" for k in METRICS]
        )
        last_fmap = fmap
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))

    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    title = f"Performance metrics of the {model} model on the {dataset} dataset (test split)"
    return "\n".join([title, rule, line(header), rule, *(line(b) for b in body), rule]) + "\n"


def write_reports(records, out_dir) -> list[Path]:
    records = list(records)
    if not records:
        raise ValueError("no records to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "summary.csv"
    _write_csv(path, SUMMARY_HEADER, summary_rows(records))
    written.append(path)

    groups = defaultdict(list)
    cells = defaultdict(list)
    for r in records:
        if r.ok:
            ds, model, fmap, ansatz = r.key()
            groups[(model, ds)].append(r)
            cells[(ds, model, fmap, ansatz)].append(r)
    for (model, ds), recs in sorted(groups.items()):
        path = out / f"table_{model}_{ds}.txt"
        path.write_text(format_table(model, ds, recs))
        written.append(path)

    if any(len(v) > 1 for v in cells.values()):
        # multi-seed medians are an addition of this harness, not reported figures
        rows = []
        for (ds, model, fmap, ansatz), recs in sorted(
            cells.items(), key=lambda kv: sort_key(kv[1][0])
        ):
            meds = [statistics.median(getattr(r.test_metrics, k) for r in recs) for k in METRICS]
            rows.append([model, fmap, ansatz, ds] + [f"{v:.4f}" for v in meds] + [str(len(recs))])
        path = out / "summary_median.csv"
        _write_csv(path, SUMMARY_HEADER + ["n_seeds"], rows)
        written.append(path)

    failed = sorted((r for r in records if not r.ok), key=sort_key)
    if failed:
        path = out / "errors.csv"
        _write_csv(path, ["run_id", "error"], [[r.run_id, r.error] for r in failed])
        written.append(path)

    for r in sorted(records, key=sort_key):
        if r.ok:
            path = out / f"loss_{r.run_id}.csv"
            path.write_text(r.history.to_csv())
            written.append(path)
    return written
