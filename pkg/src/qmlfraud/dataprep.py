"""Loading and preparing the BankSim and European card-fraud CSVs.

Pipeline (see :func:`prepare`): clean -> undersample to 50/50 -> PCA to 7
components (European only, fit on the balanced set) -> stratified 80/20 split
-> min-max scaling fit on the training rows.
"""

from __future__ import annotations

import csv
import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

BANKSIM_COLUMNS = (
    "step", "customer", "age", "gender", "zipcodeOri",
    "merchant", "zipMerchant", "category", "amount", "fraud",
)
BANKSIM_FEATURES = ("step", "customer", "age", "gender", "merchant", "category", "amount")
BANKSIM_CATEGORICAL = ("customer", "gender", "merchant", "category")
EUROPEAN_COLUMNS = ("Time",) + tuple(f"V{i}" for i in range(1, 29)) + ("Amount", "Class")
UNKNOWN_AGE = 7
PCA_COMPONENTS = 7


class DataError(ValueError):
    """Malformed or unusable input data."""


@dataclass
class DataTable:
    column_names: list[str]
    features: np.ndarray
    labels: np.ndarray
    label_column: str = "label"
    row_ids: np.ndarray | None = None
    encodings: dict[str, dict[str, int]] = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels).astype(int)
        if self.features.ndim != 2 or self.features.shape[1] != len(self.column_names):
            raise DataError(
                f"feature matrix shape {self.features.shape} does not match "
                f"{len(self.column_names)} columns"
            )
        if self.labels.shape != (self.features.shape[0],):
            raise DataError("one label per row required")
        if not np.all(np.isin(self.labels, (0, 1))):
            raise DataError("labels must be 0 or 1")
        if np.isnan(self.features).any():
            raise DataError("NaN in feature matrix")
        if self.row_ids is None:
            self.row_ids = np.arange(len(self.labels))
        self.row_ids = np.asarray(self.row_ids, dtype=np.int64)

    def __len__(self):
        return len(self.labels)

    def take(self, idx) -> DataTable:
        return DataTable(
            list(self.column_names), self.features[idx], self.labels[idx],
            self.label_column, self.row_ids[idx], self.encodings,
        )

    def with_features(self, features, column_names) -> DataTable:
        return DataTable(
            list(column_names), features, self.labels, self.label_column,
            self.row_ids, self.encodings,
        )

    def class_counts(self) -> tuple[int, int]:
        ones = int(self.labels.sum())
        return len(self.labels) - ones, ones

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["row_id", *self.column_names, self.label_column])
            for rid, row, lab in zip(self.row_ids, self.features, self.labels):
                w.writerow([int(rid), *(repr(float(v)) for v in row), int(lab)])

    @classmethod
    def from_csv(cls, path) -> DataTable:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise DataError(f"{path}: empty file")
        header = rows[0]
        if header[0] != "row_id" or len(header) < 3:
            raise DataError(f"{path}: expected header row_id,<features...>,<label>")
        body = _numeric_rows(rows[1:], len(header), path)
        return cls(header[1:-1], body[:, 1:-1], body[:, -1], header[-1], body[:, 0].astype(np.int64))


def _numeric_rows(rows, width, path, first_line=2) -> np.ndarray:
    out = np.empty((len(rows), width))
    for k, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}:{k + first_line}: expected {width} fields, got {len(row)}")
        try:
            out[k] = [float(v) for v in row]
        except ValueError as exc:
            raise DataError(f"{path}:{k + first_line}: {exc}") from None
    return out


def _read_header(reader, path, required):
    try:
        header = [h.strip().strip("'\"") for h in next(reader)]
    except StopIteration:
        raise DataError(f"{path}: empty file") from None
    missing = [c for c in required if c not in header]
    if missing:
        raise DataError(f"{path}: missing columns {missing}")
    return header


_DIGITS = re.compile(r"\d+")


def parse_age(raw: str) -> int:
    value = raw.strip().strip("'\"")
    if value.upper() == "U":
        return UNKNOWN_AGE
    m = _DIGITS.search(value)
    if m is None:
        raise ValueError(f"unparseable age {raw!r}")
    return int(m.group())


def load_banksim(path) -> DataTable:
    """Read the BankSim CSV and encode it to 7 numeric features plus ``fraud``.

    Categorical columns are coded by their sorted vocabulary; the zip-code
    columns are dropped.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = _read_header(reader, path, BANKSIM_COLUMNS)
        pos = {c: header.index(c) for c in BANKSIM_COLUMNS}
        raw = {c: [] for c in BANKSIM_FEATURES}
        labels = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            cell = {c: row[pos[c]].strip().strip("'\"") for c in BANKSIM_COLUMNS}
            try:
                raw["step"].append(float(cell["step"]))
                raw["amount"].append(float(cell["amount"]))
                raw["age"].append(parse_age(cell["age"]))
                fraud = int(cell["fraud"])
            except ValueError as exc:
                raise DataError(f"{path}:{line}: {exc}") from None
            if fraud not in (0, 1):
                raise DataError(f"{path}:{line}: fraud must be 0 or 1, got {fraud}")
            for c in BANKSIM_CATEGORICAL:
                raw[c].append(cell[c])
            labels.append(fraud)

    encodings = {}
    columns = []
    for c in BANKSIM_FEATURES:
        if c in BANKSIM_CATEGORICAL:
            vocab = {v: i for i, v in enumerate(sorted(set(raw[c])))}
            encodings[c] = vocab
            columns.append(np.array([vocab[v] for v in raw[c]], dtype=float))
        else:
            columns.append(np.asarray(raw[c], dtype=float))
    encodings["age"] = {**{str(i): i for i in range(7)}, "U": UNKNOWN_AGE}
    features = np.column_stack(columns) if labels else np.empty((0, len(BANKSIM_FEATURES)))
    return DataTable(list(BANKSIM_FEATURES), features, labels, "fraud", encodings=encodings)


def load_european(path) -> DataTable:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = _read_header(reader, path, EUROPEAN_COLUMNS)
        order = [header.index(c) for c in EUROPEAN_COLUMNS]
        rows = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(row[i].strip().strip("'\"")) for i in order])
            except ValueError as exc:
                raise DataError(f"{path}:{line}: {exc}") from None
    body = np.asarray(rows, dtype=float).reshape(-1, len(EUROPEAN_COLUMNS))
    labels = body[:, -1]
    if not np.all(np.isin(labels, (0, 1))):
        raise DataError(f"{path}: Class must be 0 or 1")
    return DataTable(list(EUROPEAN_COLUMNS[:-1]), body[:, :-1], labels, "Class")


def write_mappings(table: DataTable, out_dir) -> list[Path]:
    """One ``<column>_mapping.csv`` (raw_value, code) per encoded column."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for col, vocab in sorted(table.encodings.items()):
        p = out_dir / f"{col}_mapping.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["raw_value", "code"])
            for raw, code in sorted(vocab.items(), key=lambda kv: (kv[1], kv[0])):
                w.writerow([raw, code])
        paths.append(p)
    return paths


def undersample_balanced(table: DataTable, seed: int) -> DataTable:
    """Keep every minority row, draw as many majority rows, shuffle."""
    n0, n1 = table.class_counts()
    if n0 == 0 or n1 == 0:
        raise DataError("undersampling needs both classes present")
    minority = 1 if n1 <= n0 else 0
    rng = np.random.default_rng(seed)
    min_idx = np.flatnonzero(table.labels == minority)
    maj_idx = np.flatnonzero(table.labels != minority)
    keep = np.concatenate([min_idx, rng.choice(maj_idx, size=len(min_idx), replace=False)])
    return table.take(rng.permutation(keep))


def _write_kv(path, items) -> None:
    with open(path, "w") as fh:
        for key, value in items:
            fh.write(f"{key} = {value}\n")


def _read_kv(path) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _parse(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split()]) if text else np.array([])


@dataclass
class PcaState:
    input_columns: list[str]
    means: np.ndarray
    components: np.ndarray  # (k, d), orthonormal rows
    explained_variance: np.ndarray

    @property
    def k(self) -> int:
        return self.components.shape[0]

    @property
    def output_columns(self) -> list[str]:
        return [f"V{i + 1}" for i in range(self.k)]

    def transform(self, table: DataTable) -> DataTable:
        if list(table.column_names) != list(self.input_columns):
            raise DataError("table columns do not match the fitted PCA")
        scores = (table.features - self.means) @ self.components.T
        return table.with_features(scores, self.output_columns)

    def inverse(self, scores: np.ndarray) -> np.ndarray:
        return scores @ self.components + self.means

    def save(self, path) -> None:
        items = [("columns", " ".join(self.input_columns)), ("k", self.k), ("mean", _fmt(self.means))]
        items += [("explained_variance", _fmt(self.explained_variance))]
        items += [(f"component.{i}", _fmt(c)) for i, c in enumerate(self.components)]
        _write_kv(path, items)

    @classmethod
    def load(cls, path) -> PcaState:
        kv = _read_kv(path)
        k = int(kv["k"])
        comps = np.array([_parse(kv[f"component.{i}"]) for i in range(k)])
        return cls(kv["columns"].split(), _parse(kv["mean"]), comps, _parse(kv["explained_variance"]))


def pca_fit_transform(table: DataTable, k: int = PCA_COMPONENTS) -> tuple[DataTable, PcaState]:
    """Project onto the top-``k`` eigenvectors of the sample covariance."""
    X = table.features
    d = X.shape[1]
    if k > d:
        raise DataError(f"cannot keep {k} components of {d} features")
    if X.shape[0] < k + 1:
        raise DataError(f"need at least {k + 1} rows for {k} components")
    means = X.mean(axis=0)
    centered = X - means
    cov = centered.T @ centered / (X.shape[0] - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:k]
    comps = evecs[:, order].T
    # deterministic sign: largest-magnitude loading positive
    flip = np.sign(comps[np.arange(k), np.argmax(np.abs(comps), axis=1)])
    comps = comps * np.where(flip == 0, 1.0, flip)[:, None]
    state = PcaState(list(table.column_names), means, comps, np.clip(evals[order], 0.0, None))
    return state.transform(table), state


@dataclass
class ScalerState:
    columns: list[str]
    mins: np.ndarray
    maxs: np.ndarray

    def save(self, path) -> None:
        _write_kv(path, [("columns", " ".join(self.columns)), ("min", _fmt(self.mins)), ("max", _fmt(self.maxs))])

    @classmethod
    def load(cls, path) -> ScalerState:
        kv = _read_kv(path)
        return cls(kv["columns"].split(), _parse(kv["min"]), _parse(kv["max"]))


def minmax_fit(table: DataTable) -> ScalerState:
    if len(table) == 0:
        raise DataError("cannot fit a scaler on an empty table")
    X = table.features
    return ScalerState(list(table.column_names), X.min(axis=0), X.max(axis=0))


def minmax_apply(state: ScalerState, table: DataTable) -> DataTable:
    """Map each column to [0, 1]; constant columns go to 0, unseen values are clamped."""
    if list(table.column_names) != list(state.columns):
        raise DataError("table columns do not match the fitted scaler")
    span = state.maxs - state.mins
    safe = np.where(span > 0, span, 1.0)
    scaled = (table.features - state.mins) / safe
    scaled = np.where(span > 0, scaled, 0.0)
    return table.with_features(np.clip(scaled, 0.0, 1.0), table.column_names)


def split_train_test(table: DataTable, test_fraction: float = 0.2, seed: int = 0):
    """Stratified split; each class contributes round(test_fraction * count) test rows."""
    if not 0 < test_fraction < 1:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for cls in (0, 1):
        idx = np.flatnonzero(table.labels == cls)
        if len(idx) < 2:
            raise DataError(f"class {cls} has {len(idx)} rows; need at least 2")
        idx = rng.permutation(idx)
        n_test = int(np.floor(test_fraction * len(idx) + 0.5))
        n_test = min(max(n_test, 1), len(idx) - 1)
        test_idx.append(idx[:n_test])
        train_idx.append(idx[n_test:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return table.take(train), table.take(test)


def pearson_correlations(table: DataTable) -> tuple[list[str], np.ndarray]:
    """Correlation matrix over features and label (label last)."""
    cols = list(table.column_names) + [table.label_column]
    data = np.column_stack([table.features, table.labels.astype(float)])
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(data, rowvar=False)
    return cols, np.nan_to_num(corr)


@dataclass
class PreparedData:
    train: DataTable
    test: DataTable
    scaler: ScalerState
    pca: PcaState | None
    meta: dict[str, str]


PIPELINE_ORDER = "clean>undersample>pca(european)>split>scale(train)"


def prepare(table: DataTable, dataset: str, seed: int, test_fraction: float = 0.2) -> PreparedData:
    balanced = undersample_balanced(table, seed)
    pca = None
    if dataset == "european":
        balanced, pca = pca_fit_transform(balanced, PCA_COMPONENTS)
    train, test = split_train_test(balanced, test_fraction, seed)
    scaler = minmax_fit(train)
    train, test = minmax_apply(scaler, train), minmax_apply(scaler, test)
    meta = {
        "dataset": dataset,
        "seed": str(seed),
        "pipeline": PIPELINE_ORDER,
        "test_fraction": repr(test_fraction),
        "rows_train": str(len(train)),
        "rows_test": str(len(test)),
    }
    return PreparedData(train, test, scaler, pca, meta)


def file_digest(path, chunk=1 << 20) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        while block := fh.read(chunk):
            h.update(block)
    return h.hexdigest()


def save_prepared(prep: PreparedData, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    prep.train.to_csv(out_dir / "train.csv")
    prep.test.to_csv(out_dir / "test.csv")
    prep.scaler.save(out_dir / "scaler.txt")
    if prep.pca is not None:
        prep.pca.save(out_dir / "pca.txt")
    if prep.train.encodings:
        write_mappings(prep.train, out_dir / "mappings")
    meta = dict(prep.meta)
    meta["content_hash"] = hashlib.sha256(
        (out_dir / "train.csv").read_bytes() + (out_dir / "test.csv").read_bytes()
    ).hexdigest()
    _write_kv(out_dir / "meta.txt", sorted(meta.items()))
    return out_dir


def load_prepared(in_dir) -> PreparedData:
    in_dir = Path(in_dir)
    for name in ("train.csv", "test.csv", "scaler.txt", "meta.txt"):
        if not (in_dir / name).exists():
            raise DataError(f"prepared data missing {in_dir / name}")
    pca = PcaState.load(in_dir / "pca.txt") if (in_dir / "pca.txt").exists() else None
    return PreparedData(
        DataTable.from_csv(in_dir / "train.csv"),
        DataTable.from_csv(in_dir / "test.csv"),
        ScalerState.load(in_dir / "scaler.txt"),
        pca,
        _read_kv(in_dir / "meta.txt"),
    )


LOADERS = {"banksim": load_banksim, "european": load_european}


def load_raw(dataset: str, path) -> DataTable:
    try:
        loader = LOADERS[dataset]
    except KeyError:
        raise DataError(f"unknown dataset {dataset!r}; expected one of {sorted(LOADERS)}") from None
    return loader(path)


def make_separable(n_samples: int = 200, seed: int = 0, margin: float = 0.05) -> DataTable:
    """Two-feature toy set in [0, 1]^2 split by the line x0 + x1 = 1 with a margin."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n_samples:
        p = rng.uniform(0.0, 1.0, 2)
        if abs(p.sum() - 1.0) >= margin * np.sqrt(2.0):
            pts.append(p)
    X = np.array(pts)
    y = (X.sum(axis=1) > 1.0).astype(int)
    return DataTable(["x0", "x1"], X, y, "label")
