"""Experiment configuration as a flat ``key = value`` text file.

Lines starting with ``#`` are comments. List values are comma separated.
Every key has a default matching the bold Table-I style setting (7 qubits,
COBYLA, 350 evaluations, one repetition of map and ansatz, 20% test split).
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from qmlfraud.ansatz import ANSATZ_KINDS, ENTANGLEMENTS, AnsatzSpec
from qmlfraud.featuremaps import DEFAULT_PAULIS, FEATURE_MAP_KINDS, FeatureMapSpec
from qmlfraud.models import ARCHITECTURES, READOUTS, ModelSpec
from qmlfraud.optim import OptimizerConfig

DATASETS = ("banksim", "european", "toy")


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in _list(text))


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "european"
    data_input: str = ""
    data_prepared: str = ""
    data_test_fraction: float = 0.2
    data_toy_samples: int = 200
    qubits: int = 7
    model_architecture: str = "VQC"
    model_shots: int = 1024
    model_readout: str = "parity"
    model_shot_training: bool = False
    feature_map_kind: str = "ZZ"
    feature_map_reps: int = 1
    feature_map_paulis: tuple[str, ...] = DEFAULT_PAULIS
    feature_map_entanglement: str = "full"
    ansatz_kind: str = "RealAmplitudes"
    ansatz_reps: int = 1
    ansatz_entanglement: str = "linear"
    ansatz_seed: int = 0
    optimizer_method: str = "cobyla"
    optimizer_max_evals: int = 350
    optimizer_rho_begin: float = 1.0
    optimizer_rho_end: float = 1e-4
    seed: int = 0
    output_dir: str = "runs"
    # per-dataset data sources for grids: {"banksim": "...", ...}
    inputs: tuple[tuple[str, str], ...] = ()
    prepared: tuple[tuple[str, str], ...] = ()
    grid_datasets: tuple[str, ...] = ("banksim", "european")
    grid_architectures: tuple[str, ...] = ARCHITECTURES
    grid_feature_maps: tuple[str, ...] = FEATURE_MAP_KINDS
    grid_ansatze: tuple[str, ...] = ("RealAmplitudes", "TwoLocal", "EfficientSU2", "PauliTwoDesign")
    grid_seeds: tuple[int, ...] = (0,)
    grid_workers: int = 1

    def validate(self) -> ExperimentConfig:
        checks = [
            ("dataset", self.dataset, DATASETS),
            ("model.architecture", self.model_architecture, ARCHITECTURES),
            ("model.readout", self.model_readout, READOUTS),
            ("feature_map.kind", self.feature_map_kind, FEATURE_MAP_KINDS),
            ("feature_map.entanglement", self.feature_map_entanglement, ("full", "linear")),
            ("ansatz.kind", self.ansatz_kind, ANSATZ_KINDS),
            ("ansatz.entanglement", self.ansatz_entanglement, ENTANGLEMENTS),
        ]
        for key, value, allowed in checks:
            if value not in allowed:
                raise ConfigError(f"{key} = {value!r}; expected one of {', '.join(allowed)}")
        if self.qubits < 1:
            raise ConfigError("qubits must be >= 1")
        return self

    def input_for(self, dataset: str) -> str:
        if dataset == self.dataset and self.data_input:
            return self.data_input
        return dict(self.inputs).get(dataset, "")

    def prepared_for(self, dataset: str) -> str:
        if dataset == self.dataset and self.data_prepared:
            return self.data_prepared
        return dict(self.prepared).get(dataset, "")

    def model_spec(self) -> ModelSpec:
        fmap = FeatureMapSpec(
            self.feature_map_kind, self.qubits, self.feature_map_reps,
            self.feature_map_paulis, self.feature_map_entanglement,
        )
        ans = AnsatzSpec(self.ansatz_kind, self.qubits, self.ansatz_reps, self.ansatz_entanglement, self.ansatz_seed)
        return ModelSpec(
            self.model_architecture, fmap, ans, self.model_shots, self.model_readout, self.model_shot_training
        )

    def optimizer_config(self, seed: int) -> OptimizerConfig:
        return OptimizerConfig(
            self.optimizer_max_evals, self.optimizer_rho_begin, self.optimizer_rho_end, seed, self.optimizer_method
        )

    def to_items(self) -> list[tuple[str, str]]:
        """Flat (key, value) pairs in file syntax, for run metadata."""
        out = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ("inputs", "prepared"):
                for ds, path in value:
                    out.append((f"data.{ds}.{'input' if f.name == 'inputs' else 'prepared'}", path))
                continue
            key = _KEY_OF[f.name]
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            out.append((key, str(value)))
        return out


_KEYS = {
    "dataset": ("dataset", str),
    "data.input": ("data_input", str),
    "data.prepared": ("data_prepared", str),
    "data.test_fraction": ("data_test_fraction", float),
    "data.toy_samples": ("data_toy_samples", int),
    "qubits": ("qubits", int),
    "model.architecture": ("model_architecture", str),
    "model.shots": ("model_shots", int),
    "model.readout": ("model_readout", str),
    "model.shot_training": ("model_shot_training", _bool),
    "feature_map.kind": ("feature_map_kind", str),
    "feature_map.reps": ("feature_map_reps", int),
    "feature_map.paulis": ("feature_map_paulis", _list),
    "feature_map.entanglement": ("feature_map_entanglement", str),
    "ansatz.kind": ("ansatz_kind", str),
    "ansatz.reps": ("ansatz_reps", int),
    "ansatz.entanglement": ("ansatz_entanglement", str),
    "ansatz.seed": ("ansatz_seed", int),
    "optimizer.method": ("optimizer_method", str),
    "optimizer.max_evals": ("optimizer_max_evals", int),
    "optimizer.rho_begin": ("optimizer_rho_begin", float),
    "optimizer.rho_end": ("optimizer_rho_end", float),
    "seed": ("seed", int),
    "output_dir": ("output_dir", str),
    "grid.datasets": ("grid_datasets", _list),
    "grid.architectures": ("grid_architectures", _list),
    "grid.feature_maps": ("grid_feature_maps", _list),
    "grid.ansatze": ("grid_ansatze", _list),
    "grid.seeds": ("grid_seeds", _int_list),
    "grid.workers": ("grid_workers", int),
}
_KEY_OF = {name: key for key, (name, _) in _KEYS.items()}


def parse_config(text: str, base: ExperimentConfig | None = None, source: str = "<config>") -> ExperimentConfig:
    updates: dict = {}
    inputs = dict(base.inputs) if base else {}
    prepared = dict(base.prepared) if base else {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, value = (s.strip() for s in line.partition("="))
        parts = key.split(".")
        if len(parts) == 3 and parts[0] == "data" and parts[2] in ("input", "prepared"):
            (inputs if parts[2] == "input" else prepared)[parts[1]] = value
            continue
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        name, conv = _KEYS[key]
        try:
            updates[name] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    updates["inputs"] = tuple(sorted(inputs.items()))
    updates["prepared"] = tuple(sorted(prepared.items()))
    return replace(base or ExperimentConfig(), **updates).validate()


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))


def dump_config(cfg: ExperimentConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.to_items())


__all__ = ["ConfigError", "ExperimentConfig", "dump_config", "load_config", "parse_config"]
