"""Trainable circuits: RealAmplitudes, EfficientSU2, TwoLocal, PauliTwoDesign.

Parameters are named ``theta0 ... theta{k-1}`` in the order the rotations are
laid down, layer by layer and qubit by qubit within a layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from qmlfraud.circuit import CircuitError, ParamCircuit, sym

ANSATZ_KINDS = ("RealAmplitudes", "EfficientSU2", "TwoLocal", "PauliTwoDesign")
ENTANGLEMENTS = ("linear", "full", "circular")


@dataclass(frozen=True)
class AnsatzSpec:
    kind: str = "RealAmplitudes"
    n_qubits: int = 7
    reps: int = 1
    entanglement: str = "linear"
    seed: int = 0
    # TwoLocal only
    rotation_kinds: tuple[str, ...] = ("RY",)
    entangle_kind: str = "CX"

    def __post_init__(self):
        if self.kind not in ANSATZ_KINDS:
            raise CircuitError(f"unknown ansatz kind {self.kind!r}")
        if self.n_qubits < 1:
            raise CircuitError("ansatz needs at least one qubit")
        if self.reps < 1:
            raise CircuitError("ansatz reps must be >= 1")
        if self.entanglement not in ENTANGLEMENTS:
            raise CircuitError(f"unknown entanglement {self.entanglement!r}")
        object.__setattr__(self, "rotation_kinds", tuple(self.rotation_kinds))
        if any(r not in ("RX", "RY", "RZ") for r in self.rotation_kinds) or not self.rotation_kinds:
            raise CircuitError(f"rotation kinds must be RX/RY/RZ, got {self.rotation_kinds}")
        if self.entangle_kind not in ("CX", "CZ"):
            raise CircuitError(f"entangling gate must be CX or CZ, got {self.entangle_kind}")


def parameter_count(spec: AnsatzSpec) -> int:
    n, r = spec.n_qubits, spec.reps
    if spec.kind == "EfficientSU2":
        return 2 * n * (r + 1)
    if spec.kind == "TwoLocal":
        return len(spec.rotation_kinds) * n * (r + 1)
    return n * (r + 1)


def entangler_pairs(n: int, entanglement: str) -> list[tuple[int, int]]:
    if n < 2:
        return []
    if entanglement == "linear":
        return [(i, i + 1) for i in range(n - 1)]
    if entanglement == "full":
        return list(combinations(range(n), 2))
    if entanglement == "circular":
        linear = [(i, i + 1) for i in range(n - 1)]
        return linear if n == 2 else [(n - 1, 0)] + linear
    raise CircuitError(f"unknown entanglement {entanglement!r}")


class _Namer:
    def __init__(self):
        self.k = 0

    def __call__(self):
        name = f"theta{self.k}"
        self.k += 1
        return sym(name)


def _rotation_entangler(spec: AnsatzSpec, rotations, entangle_kind: str) -> ParamCircuit:
    n = spec.n_qubits
    circ = ParamCircuit(n)
    nxt = _Namer()
    pairs = entangler_pairs(n, spec.entanglement)

    def rotation_block():
        for kind in rotations:
            for q in range(n):
                circ.add(kind, q, angle=nxt())

    rotation_block()
    for _ in range(spec.reps):
        for a, b in pairs:
            circ.add(entangle_kind, a, b)
        rotation_block()
    return circ


def build_real_amplitudes(spec: AnsatzSpec) -> ParamCircuit:
    return _rotation_entangler(spec, ("RY",), "CX")


def build_efficient_su2(spec: AnsatzSpec) -> ParamCircuit:
    return _rotation_entangler(spec, ("RY", "RZ"), "CX")


def build_two_local(spec: AnsatzSpec, rotation_kind=None, entangle_kind=None) -> ParamCircuit:
    if rotation_kind is None:
        rotations = spec.rotation_kinds
    elif isinstance(rotation_kind, str):
        rotations = (rotation_kind,)
    else:
        rotations = tuple(rotation_kind)
    return _rotation_entangler(spec, rotations, entangle_kind or spec.entangle_kind)


def pauli_two_design_axes(spec: AnsatzSpec) -> np.ndarray:
    """(reps + 1, n) array of rotation kinds drawn uniformly from RX/RY/RZ."""
    rng = np.random.default_rng(spec.seed)
    choice = rng.integers(0, 3, size=(spec.reps + 1, spec.n_qubits))
    return np.array(["RX", "RY", "RZ"])[choice]


def build_pauli_two_design(spec: AnsatzSpec) -> ParamCircuit:
    # brick-wall CZ layers; the entanglement field is not used here
    n = spec.n_qubits
    circ = ParamCircuit(n)
    nxt = _Namer()
    axes = pauli_two_design_axes(spec)
    for q in range(n):
        circ.add("RY", q, angle=math.pi / 4)
    for block in range(spec.reps):
        for q in range(n):
            circ.add(str(axes[block, q]), q, angle=nxt())
        for a in range(block % 2, n - 1, 2):
            circ.add("CZ", a, a + 1)
    for q in range(n):
        circ.add(str(axes[spec.reps, q]), q, angle=nxt())
    return circ


def build_ansatz(spec: AnsatzSpec) -> ParamCircuit:
    builders = {
        "RealAmplitudes": build_real_amplitudes,
        "EfficientSU2": build_efficient_su2,
        "TwoLocal": build_two_local,
        "PauliTwoDesign": build_pauli_two_design,
    }
    circ = builders[spec.kind](spec)
    assert len(circ.parameter_names) == parameter_count(spec)
    return circ
