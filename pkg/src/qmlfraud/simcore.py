"""Dense statevector simulator.

Qubit ``q`` corresponds to bit ``q`` of the basis index (little-endian), so
``|q1 q0>`` with ``q0 = 1`` is index 1. Two-qubit gate matrices are written in
the basis ``|t0 t1>`` where the first target is the most significant bit, which
makes ``CX(0, 1)`` the usual control-first CNOT matrix.

The kernels work on arrays of shape ``(batch, 2**n)`` so that the models can
push a whole data set through a circuit at once; :class:`StateVector` is the
single-state wrapper used by the public operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 20

SINGLE_QUBIT_KINDS = frozenset({"I", "X", "Y", "Z", "H", "S", "T", "RX", "RY", "RZ", "P"})
TWO_QUBIT_KINDS = frozenset({"CX", "CZ", "SWAP"})
ROTATION_KINDS = frozenset({"RX", "RY", "RZ", "P"})
GATE_KINDS = SINGLE_QUBIT_KINDS | TWO_QUBIT_KINDS

_SQ2 = 1.0 / np.sqrt(2.0)

_FIXED = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "CX": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


class SimulationError(ValueError):
    """Invalid state, gate or target specification."""


@dataclass(frozen=True)
class GateOp:
    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise SimulationError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        arity = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.targets) != arity:
            raise SimulationError(f"{self.kind} takes {arity} target(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise SimulationError(f"repeated target in {self.targets}")
        if min(self.targets) < 0:
            raise SimulationError(f"negative target in {self.targets}")
        if self.kind in ROTATION_KINDS:
            if self.angle is None:
                raise SimulationError(f"{self.kind} requires an angle")
        elif self.angle is not None:
            raise SimulationError(f"{self.kind} takes no angle")

    @property
    def matrix(self) -> np.ndarray:
        return gate_matrix(self.kind, self.angle)

    def inverse(self) -> GateOp:
        if self.kind in ROTATION_KINDS:
            return GateOp(self.kind, self.targets, -self.angle)
        if self.kind == "S":
            # S^dagger = P(-pi/2)
            return GateOp("P", self.targets, -np.pi / 2)
        if self.kind == "T":
            return GateOp("P", self.targets, -np.pi / 4)
        return self


def gate_matrix(kind: str, angle=None) -> np.ndarray:
    """Matrix of a gate kind.

    ``angle`` may be a scalar or a 1-d array, in which case a stack of
    matrices with shape ``(len(angle), d, d)`` is returned.
    """
    if kind in _FIXED:
        return _FIXED[kind]
    if kind not in ROTATION_KINDS:
        raise SimulationError(f"unknown gate kind {kind!r}")
    if angle is None:
        raise SimulationError(f"{kind} requires an angle")
    theta = np.asarray(angle, dtype=float)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    out = np.zeros(theta.shape + (2, 2), dtype=complex)
    if kind == "RX":
        out[..., 0, 0] = c
        out[..., 0, 1] = -1j * s
        out[..., 1, 0] = -1j * s
        out[..., 1, 1] = c
    elif kind == "RY":
        out[..., 0, 0] = c
        out[..., 0, 1] = -s
        out[..., 1, 0] = s
        out[..., 1, 1] = c
    elif kind == "RZ":
        out[..., 0, 0] = np.exp(-0.5j * theta)
        out[..., 1, 1] = np.exp(0.5j * theta)
    else:  # P
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = np.exp(1j * theta)
    return out


def apply_matrix(amps: np.ndarray, matrix: np.ndarray, targets, n_qubits: int) -> np.ndarray:
    """Apply a 1- or 2-qubit matrix to a batch of states.

    ``amps`` has shape ``(batch, 2**n_qubits)``; ``matrix`` is either a single
    ``(d, d)`` matrix or a per-state stack ``(batch, d, d)``. Each output slice
    is a linear combination of input slices with zero entries skipped, so
    permutation and diagonal gates cost a few copies.
    """
    targets = tuple(targets)
    batch = amps.shape[0]
    k = len(targets)
    psi = amps.reshape((batch,) + (2,) * n_qubits)
    axes = [1 + (n_qubits - 1 - t) for t in targets]
    matrix = np.asarray(matrix)
    stacked = matrix.ndim == 3
    dim = 2**k

    def slot(sub):
        idx = [slice(None)] * (n_qubits + 1)
        for pos, ax in enumerate(axes):
            idx[ax] = (sub >> (k - 1 - pos)) & 1
        return tuple(idx)

    def coeff(r, c):
        if stacked:
            return matrix[:, r, c].reshape((batch,) + (1,) * (n_qubits - k))
        return matrix[r, c]

    nonzero = np.abs(matrix).reshape(-1, dim, dim).max(axis=0) > 0
    out = np.empty_like(psi)
    for r in range(dim):
        acc = None
        for c in range(dim):
            if not nonzero[r, c]:
                continue
            term = psi[slot(c)]
            if stacked or matrix[r, c] != 1:
                term = coeff(r, c) * term
            acc = term.copy() if acc is None else acc + term
        out[slot(r)] = 0 if acc is None else acc
    return out.reshape(batch, 2**n_qubits)


def _check_targets(op: GateOp, n_qubits: int) -> None:
    if max(op.targets) >= n_qubits:
        raise SimulationError(f"target {max(op.targets)} out of range for {n_qubits} qubits")


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise SimulationError(
                f"expected {2**self.n_qubits} amplitudes, got shape {self.amplitudes.shape}"
            )

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def fidelity(self, other: StateVector) -> float:
        """|<self|other>|^2, blind to global phase."""
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


@dataclass
class BasisDistribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0 or (p.size & (p.size - 1)):
            raise SimulationError("distribution length must be a power of two")
        if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-10:
            raise SimulationError("probabilities must be nonnegative and sum to 1")
        self.probabilities = np.clip(p, 0.0, 1.0)

    @property
    def n_qubits(self) -> int:
        return self.probabilities.size.bit_length() - 1


def new_zero_state(n_qubits: int) -> StateVector:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise SimulationError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    _check_targets(op, state.n_qubits)
    out = apply_matrix(state.amplitudes[None, :], op.matrix, op.targets, state.n_qubits)
    return StateVector(state.n_qubits, out[0])


def probabilities(state: StateVector) -> BasisDistribution:
    p = np.abs(state.amplitudes) ** 2
    return BasisDistribution(p / p.sum())


def sample_counts(dist: BasisDistribution, shots: int, seed: int) -> dict[int, int]:
    """Draw ``shots`` basis outcomes; returns only the nonzero counts."""
    if shots < 1:
        raise SimulationError(f"shots must be >= 1, got {shots}")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, dist.probabilities)
    return {int(i): int(c) for i, c in enumerate(counts) if c}


def z_signs(n_qubits: int) -> np.ndarray:
    """(2**n, n) matrix with +1 where bit q of the index is 0, else -1."""
    idx = np.arange(2**n_qubits)[:, None]
    bits = (idx >> np.arange(n_qubits)[None, :]) & 1
    return 1.0 - 2.0 * bits


def expectation_z_each(state: StateVector) -> np.ndarray:
    p = np.abs(state.amplitudes) ** 2
    return p @ z_signs(state.n_qubits)
