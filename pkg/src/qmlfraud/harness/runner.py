"""Single experiments and the dataset x architecture x map x ansatz grid."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from pathlib import Path

import numpy as np

from qmlfraud import dataprep
from qmlfraud.dataprep import DataError, PreparedData
from qmlfraud.harness.config import ExperimentConfig
from qmlfraud.harness.metrics import MetricSet, compute_metrics
from qmlfraud.models import compiled
from qmlfraud.optim import LossHistory, train

log = logging.getLogger(__name__)


class RunError(RuntimeError):
    pass


def derive_seed(*parts) -> int:
    """Stable 32-bit seed from the run identity; independent of execution order."""
    text = "|".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:4], "little")


def run_id(cfg: ExperimentConfig) -> str:
    return (
        f"{cfg.dataset}-{cfg.model_architecture}-{cfg.feature_map_kind}-{cfg.ansatz_kind}-s{cfg.seed}"
    )


@dataclass
class RunRecord:
    run_id: str
    config: dict[str, str]
    seeds: dict[str, int]
    history: LossHistory = field(default_factory=LossHistory)
    train_metrics: MetricSet | None = None
    test_metrics: MetricSet | None = None
    wall_seconds: float = 0.0
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error

    def key(self) -> tuple[str, str, str, str]:
        c = self.config
        return c["dataset"], c["model.architecture"], c["feature_map.kind"], c["ansatz.kind"]

    def to_json(self) -> str:
        payload = {
            "run_id": self.run_id,
            "config": self.config,
            "seeds": self.seeds,
            "history": [[i, v] for i, v in self.history.entries],
            "train_metrics": self.train_metrics.as_dict() if self.train_metrics else None,
            "test_metrics": self.test_metrics.as_dict() if self.test_metrics else None,
            "wall_seconds": self.wall_seconds,
            "error": self.error,
        }
        return json.dumps(payload, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> RunRecord:
        d = json.loads(text)
        metrics = {k: MetricSet(**d[k]) if d[k] else None for k in ("train_metrics", "test_metrics")}
        return cls(
            d["run_id"], d["config"], d["seeds"],
            LossHistory([(int(i), float(v)) for i, v in d["history"]]),
            metrics["train_metrics"], metrics["test_metrics"],
            d["wall_seconds"], d["error"],
        )

    def save(self, out_dir) -> Path:
        path = Path(out_dir) / "runs" / f"{self.run_id}.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())
        return path


def load_records(in_dir) -> list[RunRecord]:
    in_dir = Path(in_dir)
    runs = in_dir / "runs" if (in_dir / "runs").is_dir() else in_dir
    return [RunRecord.from_json(p.read_text()) for p in sorted(runs.glob("*.json"))]


def _cache_dir(cfg: ExperimentConfig, dataset: str, raw_path: Path) -> Path:
    key = f"{dataprep.file_digest(raw_path)}|{cfg.seed}|{cfg.data_test_fraction!r}"
    digest = hashlib.sha256(key.encode()).hexdigest()[:16]
    return Path(cfg.output_dir) / "cache" / f"{dataset}-{digest}"


def load_dataset(cfg: ExperimentConfig) -> PreparedData:
    """Prepared train/test tables for ``cfg.dataset`` and ``cfg.seed``.

    Raw CSVs are prepared once into ``<output_dir>/cache`` keyed by content
    hash, seed and split fraction.
    """
    if cfg.dataset == "toy":
        table = dataprep.make_separable(cfg.data_toy_samples, cfg.seed)
        train, test = dataprep.split_train_test(table, cfg.data_test_fraction, cfg.seed)
        scaler = dataprep.minmax_fit(train)
        return PreparedData(
            dataprep.minmax_apply(scaler, train), dataprep.minmax_apply(scaler, test),
            scaler, None, {"dataset": "toy", "pipeline": "generate>split>scale(train)"},
        )
    prepared = cfg.prepared_for(cfg.dataset)
    if prepared:
        return dataprep.load_prepared(prepared)
    raw = cfg.input_for(cfg.dataset)
    if not raw:
        raise DataError(f"no data.input or data.prepared given for dataset {cfg.dataset!r}")
    raw_path = Path(raw)
    if not raw_path.exists():
        raise DataError(f"data file not found: {raw_path}")
    cache = _cache_dir(cfg, cfg.dataset, raw_path)
    if (cache / "meta.txt").exists():
        return dataprep.load_prepared(cache)
    table = dataprep.load_raw(cfg.dataset, raw_path)
    prep = dataprep.prepare(table, cfg.dataset, cfg.seed, cfg.data_test_fraction)
    dataprep.save_prepared(prep, cache)
    return dataprep.load_prepared(cache)


def resolve_seeds(cfg: ExperimentConfig) -> dict[str, int]:
    init = derive_seed(cfg.seed, cfg.dataset, cfg.model_architecture, cfg.feature_map_kind, cfg.ansatz_kind)
    return {
        "data": cfg.seed,
        "init": init,
        "shots": derive_seed(init, "shots"),
        "ansatz": cfg.ansatz_seed,
    }


def run_experiment(cfg: ExperimentConfig, data: PreparedData | None = None, persist: bool = True) -> RunRecord:
    """Prepare data, train, evaluate on train and test, and save the record."""
    cfg.validate()
    start = time.perf_counter()
    seeds = resolve_seeds(cfg)
    if data is None:
        data = load_dataset(cfg)
    train_t, test_t = data.train, data.test
    n_features = train_t.features.shape[1]
    if n_features != cfg.qubits:
        raise DataError(f"prepared data has {n_features} features but qubits = {cfg.qubits}")
    if np.intersect1d(train_t.row_ids, test_t.row_ids).size:
        raise RunError("train and test tables share row ids")

    spec = cfg.model_spec()
    params, history = train(spec, train_t, cfg.optimizer_config(seeds["init"]))
    model = compiled(spec)

    def labels(table, salt):
        p1 = model.predict_proba(table.features, params, seed=(seeds["shots"], salt))
        return (p1 >= 0.5).astype(int)

    record = RunRecord(
        run_id(cfg),
        dict(cfg.to_items()),
        seeds,
        history,
        compute_metrics(train_t.labels, labels(train_t, 0)),
        compute_metrics(test_t.labels, labels(test_t, 1)),
        time.perf_counter() - start,
    )
    if persist:
        record.save(cfg.output_dir)
    return record


def _guarded_run(cfg: ExperimentConfig) -> RunRecord:
    try:
        return run_experiment(cfg)
    except Exception as exc:  # recorded, the grid carries on
        log.warning("run %s failed: %s", run_id(cfg), exc)
        record = RunRecord(run_id(cfg), dict(cfg.to_items()), resolve_seeds(cfg), error=f"{type(exc).__name__}: {exc}")
        record.save(cfg.output_dir)
        return record


def grid_configs(base: ExperimentConfig, datasets, architectures, feature_maps, ansatze, seeds=None):
    seeds = base.grid_seeds if seeds is None else seeds
    out = []
    for ds, arch, fm, an, seed in product(datasets, architectures, feature_maps, ansatze, seeds):
        out.append(
            replace(
                base, dataset=ds, model_architecture=arch, feature_map_kind=fm,
                ansatz_kind=an, seed=seed, data_input="", data_prepared="",
                inputs=base.inputs + (((ds, base.input_for(ds)),) if base.input_for(ds) else ()),
                prepared=base.prepared + (((ds, base.prepared_for(ds)),) if base.prepared_for(ds) else ()),
            )
        )
    return out


def _warm_cache(cfgs) -> None:
    # prepare each (dataset, seed) once before fanning out to workers
    seen = set()
    for cfg in cfgs:
        key = (cfg.dataset, cfg.seed)
        if key in seen:
            continue
        seen.add(key)
        try:
            load_dataset(replace(cfg, model_architecture="VQC"))
        except Exception as exc:
            log.warning("could not prepare %s (seed %s): %s", cfg.dataset, cfg.seed, exc)


def run_grid(
    base_cfg: ExperimentConfig, datasets, architectures, feature_maps, ansatze,
    seeds=None, workers: int = 1,
) -> list[RunRecord]:
    """Run every combination; failed runs come back as records with ``error`` set."""
    cfgs = grid_configs(base_cfg, datasets, architectures, feature_maps, ansatze, seeds)
    if not cfgs:
        log.warning("empty grid: nothing to run")
        return []
    _warm_cache(cfgs)
    if workers <= 1:
        return [_guarded_run(c) for c in cfgs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_guarded_run, cfgs))
