"""Forward passes and loss for the VQC, SQNN and EQNN architectures.

All three share feature map -> ansatz -> measurement. VQC and SQNN decode the
basis distribution into a class probability (parity by default); SQNN may
replace the exact distribution by shot frequencies. EQNN feeds the per-qubit
``<Z>`` values into a dense ``n -> 1`` sigmoid head whose weights sit at the
end of the flat parameter vector: ``[theta | W | b]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from qmlfraud.ansatz import AnsatzSpec, build_ansatz, parameter_count
from qmlfraud.circuit import ParamCircuit, compose, run_ops, simulate_batch
from qmlfraud.featuremaps import FeatureMapSpec, build_feature_map, input_names
from qmlfraud.simcore import BasisDistribution, z_signs

ARCHITECTURES = ("VQC", "SQNN", "EQNN")
READOUTS = ("parity", "qubit0")


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    architecture: str = "VQC"
    feature_map: FeatureMapSpec = field(default_factory=FeatureMapSpec)
    ansatz: AnsatzSpec = field(default_factory=AnsatzSpec)
    shots: int = 1024
    readout: str = "parity"
    # whether the training objective also uses shot sampling (SQNN only)
    shot_training: bool = False

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ModelError(f"unknown architecture {self.architecture!r}")
        if self.readout not in READOUTS:
            raise ModelError(f"unknown readout {self.readout!r}")
        if self.feature_map.n_features != self.ansatz.n_qubits:
            raise ModelError(
                f"feature map has {self.feature_map.n_features} features but ansatz has "
                f"{self.ansatz.n_qubits} qubits"
            )
        if self.shots < 0:
            raise ModelError("shots must be >= 0")

    @property
    def n_qubits(self) -> int:
        return self.ansatz.n_qubits

    @property
    def n_quantum_params(self) -> int:
        return parameter_count(self.ansatz)

    @property
    def n_params(self) -> int:
        extra = self.n_qubits + 1 if self.architecture == "EQNN" else 0
        return self.n_quantum_params + extra


class Prediction(NamedTuple):
    p1: float
    label: int


def parity_mask(n_qubits: int) -> np.ndarray:
    idx = np.arange(2**n_qubits)
    pop = np.zeros_like(idx)
    for q in range(n_qubits):
        pop += (idx >> q) & 1
    return (pop % 2).astype(bool)


def readout_mask(n_qubits: int, readout: str) -> np.ndarray:
    if readout == "parity":
        return parity_mask(n_qubits)
    return (np.arange(2**n_qubits) & 1).astype(bool)


def parity_interpret(dist: BasisDistribution) -> tuple[float, float]:
    p1 = float(dist.probabilities[parity_mask(dist.n_qubits)].sum())
    return 1.0 - p1, p1


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))


class CompiledModel:
    """Circuits for a ModelSpec, built once and reused across evaluations."""

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.feature_map: ParamCircuit = build_feature_map(spec.feature_map)
        self.ansatz: ParamCircuit = build_ansatz(spec.ansatz)
        self.mask = readout_mask(spec.n_qubits, spec.readout)
        self._zsigns = z_signs(spec.n_qubits)

    @property
    def circuit(self) -> ParamCircuit:
        return compose(self.feature_map, self.ansatz)

    def check_params(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.spec.n_params,):
            raise ModelError(f"expected {self.spec.n_params} parameters, got shape {params.shape}")
        if not np.all(np.isfinite(params)):
            raise ModelError("parameters must be finite")
        return params

    def encode(self, X) -> np.ndarray:
        """Feature-map states for every row of ``X``, shape (rows, 2**n)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = self.spec.n_qubits
        if X.shape[1] != n:
            raise ModelError(f"expected {n} features, got {X.shape[1]}")
        values = dict(zip(input_names(n), X.T))
        return simulate_batch(self.feature_map, values, X.shape[0])

    def evolve(self, encoded: np.ndarray, params) -> np.ndarray:
        params = self.check_params(params)
        theta = params[: self.spec.n_quantum_params]
        values = dict(zip(self.ansatz.parameter_names, theta))
        dim = 2**self.spec.n_qubits
        if encoded.shape[0] <= dim:
            return run_ops(encoded, self.ansatz, values)
        # Large batches: build the ansatz unitary once. Row k of the result is
        # U e_k, i.e. the result is U^T, so each state row maps to row @ U^T.
        u_t = run_ops(np.eye(dim, dtype=complex), self.ansatz, values)
        return encoded @ u_t

    def p1_from_states(self, states: np.ndarray, params, seed=None, shots=None) -> np.ndarray:
        spec = self.spec
        params = self.check_params(params)
        probs = np.abs(states) ** 2
        probs /= probs.sum(axis=1, keepdims=True)
        if spec.architecture == "EQNN":
            z = probs @ self._zsigns
            k = spec.n_quantum_params
            w, b = params[k : k + spec.n_qubits], params[-1]
            return sigmoid(z @ w + b)
        if shots is None:
            shots = spec.shots if spec.architecture == "SQNN" else 0
        if shots > 0:
            rng = np.random.default_rng(seed)
            counts = rng.multinomial(shots, probs)
            probs = counts / shots
        return probs[:, self.mask].sum(axis=1)

    def predict_proba(self, X, params, seed=None, shots=None) -> np.ndarray:
        return self.p1_from_states(self.evolve(self.encode(X), params), params, seed, shots)


_CACHE: dict[ModelSpec, CompiledModel] = {}


def compiled(spec: ModelSpec) -> CompiledModel:
    if spec not in _CACHE:
        _CACHE[spec] = CompiledModel(spec)
    return _CACHE[spec]


def _predict(p1: float) -> Prediction:
    p1 = float(min(max(p1, 0.0), 1.0))
    return Prediction(p1, int(p1 >= 0.5))


def vqc_forward(spec: ModelSpec, params, x) -> Prediction:
    if spec.architecture != "VQC":
        raise ModelError("vqc_forward needs a VQC spec")
    return _predict(compiled(spec).predict_proba(x, params, shots=0)[0])


def sqnn_forward(spec: ModelSpec, params, x, seed=None) -> Prediction:
    if spec.architecture != "SQNN":
        raise ModelError("sqnn_forward needs an SQNN spec")
    return _predict(compiled(spec).predict_proba(x, params, seed=seed, shots=spec.shots)[0])


def eqnn_forward(spec: ModelSpec, params, x) -> Prediction:
    if spec.architecture != "EQNN":
        raise ModelError("eqnn_forward needs an EQNN spec")
    return _predict(compiled(spec).predict_proba(x, params)[0])


def forward(spec: ModelSpec, params, x, seed=None) -> Prediction:
    if spec.architecture == "VQC":
        return vqc_forward(spec, params, x)
    if spec.architecture == "SQNN":
        return sqnn_forward(spec, params, x, seed)
    return eqnn_forward(spec, params, x)


EPS = 1e-12


def binary_cross_entropy(predictions, labels) -> float:
    p = np.asarray(predictions, dtype=float)
    y = np.asarray(labels, dtype=float)
    if p.size == 0:
        raise ValueError("binary cross-entropy of an empty batch")
    if p.shape != y.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {y.shape}")
    p = np.clip(p, EPS, 1.0 - EPS)
    loss = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    return float(loss.mean())
