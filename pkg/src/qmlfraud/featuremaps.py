"""Angle-encoding feature maps: Z, ZZ and general Pauli.

Every repetition is a Hadamard layer followed by Pauli evolutions
``exp(i * phi_S(x) * P_S)``, one per term, in a fixed order. The single-qubit
data map is ``phi_{i}(x) = x_i`` and for a subset ``S`` of two or more qubits
``phi_S(x) = prod_{j in S} (pi - x_j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from qmlfraud.circuit import CircuitError, ParamCircuit, ParamExpr, append_pauli_evolution, pi_minus, sym

FEATURE_MAP_KINDS = ("Z", "ZZ", "Pauli")
DEFAULT_PAULIS = ("Z", "Y", "ZZ")


@dataclass(frozen=True)
class FeatureMapSpec:
    kind: str = "ZZ"
    n_features: int = 7
    reps: int = 1
    pauli_strings: tuple[str, ...] = DEFAULT_PAULIS
    entanglement: str = "full"

    def __post_init__(self):
        if self.kind not in FEATURE_MAP_KINDS:
            raise CircuitError(f"unknown feature map kind {self.kind!r}")
        if self.reps < 1:
            raise CircuitError("feature map reps must be >= 1")
        if self.entanglement not in ("full", "linear"):
            raise CircuitError(f"unknown entanglement {self.entanglement!r}")
        object.__setattr__(self, "pauli_strings", tuple(self.pauli_strings))


def input_names(n: int) -> list[str]:
    return [f"x{i}" for i in range(n)]


def data_map_phi(subset, x) -> float:
    subset = list(subset)
    if not subset:
        raise ValueError("data map needs a nonempty subset")
    if any(not 0 <= i < len(x) for i in subset):
        raise ValueError(f"subset {subset} out of range for {len(x)} features")
    if len(subset) == 1:
        return float(x[subset[0]])
    return math.prod(math.pi - x[j] for j in subset)


def phi_expr(subset) -> ParamExpr:
    """Symbolic form of :func:`data_map_phi` over the input symbols."""
    subset = list(subset)
    if len(subset) == 1:
        return sym(f"x{subset[0]}")
    expr = pi_minus(f"x{subset[0]}")
    for j in subset[1:]:
        expr = expr * pi_minus(f"x{j}")
    return expr


def entangled_pairs(n: int, entanglement: str) -> list[tuple[int, int]]:
    if entanglement == "full":
        return list(combinations(range(n), 2))
    if entanglement == "linear":
        return [(i, i + 1) for i in range(n - 1)]
    raise CircuitError(f"unknown entanglement {entanglement!r}")


def _check_label(label: str) -> str:
    label = label.upper()
    if not 1 <= len(label) <= 2:
        raise CircuitError(f"Pauli label {label!r} must have length 1 or 2")
    if any(c not in "XYZ" for c in label):
        raise CircuitError(f"Pauli label {label!r} may only contain X, Y, Z")
    return label


def _pauli_layers(n: int, reps: int, labels, entanglement: str) -> ParamCircuit:
    labels = [_check_label(lab) for lab in labels]
    circ = ParamCircuit(n)
    circ.declare(*input_names(n))
    pairs = entangled_pairs(n, entanglement)
    for _ in range(reps):
        for q in range(n):
            circ.add("H", q)
        for label in labels:
            if len(label) == 1:
                for q in range(n):
                    append_pauli_evolution(circ, {q: label}, phi_expr([q]))
            else:
                for i, j in pairs:
                    append_pauli_evolution(circ, {i: label[0], j: label[1]}, phi_expr([i, j]))
    return circ


def build_z_map(spec: FeatureMapSpec) -> ParamCircuit:
    if spec.n_features < 1:
        raise CircuitError("Z feature map needs at least one feature")
    return _pauli_layers(spec.n_features, spec.reps, ["Z"], spec.entanglement)


def build_zz_map(spec: FeatureMapSpec) -> ParamCircuit:
    if spec.n_features < 2:
        raise CircuitError("ZZ feature map needs at least two features")
    return _pauli_layers(spec.n_features, spec.reps, ["Z", "ZZ"], spec.entanglement)


def build_pauli_map(spec: FeatureMapSpec) -> ParamCircuit:
    if spec.n_features < 1:
        raise CircuitError("Pauli feature map needs at least one feature")
    if not spec.pauli_strings:
        raise CircuitError("Pauli feature map needs at least one label")
    labels = [_check_label(lab) for lab in spec.pauli_strings]
    if spec.n_features < 2 and any(len(lab) == 2 for lab in labels):
        raise CircuitError("two-qubit Pauli labels need at least two features")
    return _pauli_layers(spec.n_features, spec.reps, labels, spec.entanglement)


def build_feature_map(spec: FeatureMapSpec) -> ParamCircuit:
    builders = {"Z": build_z_map, "ZZ": build_zz_map, "Pauli": build_pauli_map}
    return builders[spec.kind](spec)
