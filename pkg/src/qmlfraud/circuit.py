"""Parameterized circuit representation.

A :class:`ParamCircuit` is an ordered list of gate entries. Each rotation
angle is either a plain float (a :class:`~qmlfraud.simcore.GateOp`) or a
:class:`ParamExpr`, a scaled product of ``(offset + sign * symbol)`` factors.
That family covers ``2*x0``, ``theta3`` and ``(pi - x0)(pi - x1)`` and nothing
else, which keeps binding trivially correct.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from qmlfraud.simcore import (
    ROTATION_KINDS,
    GateOp,
    SimulationError,
    StateVector,
    apply_matrix,
    gate_matrix,
    new_zero_state,
)

MAX_UNITARY_QUBITS = 4


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class ParamExpr:
    """``coeff * prod(offset + sign * symbol)`` over the factors."""

    coeff: float = 1.0
    factors: tuple[tuple[float, float, str], ...] = ()

    @property
    def symbols(self) -> tuple[str, ...]:
        seen = []
        for _, _, name in self.factors:
            if name not in seen:
                seen.append(name)
        return tuple(seen)

    def scaled(self, k: float) -> ParamExpr:
        return ParamExpr(self.coeff * k, self.factors)

    def __mul__(self, other):
        if isinstance(other, ParamExpr):
            return ParamExpr(self.coeff * other.coeff, self.factors + other.factors)
        return self.scaled(float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.scaled(-1.0)

    def evaluate(self, values: Mapping[str, float | np.ndarray]):
        """Evaluate with scalar or per-sample array values (broadcasts)."""
        out = self.coeff
        for offset, sign, name in self.factors:
            try:
                v = values[name]
            except KeyError:
                raise CircuitError(f"no value for symbol {name!r}") from None
            out = out * (offset + sign * v)
        return out

    def __str__(self):
        parts = []
        for offset, sign, name in self.factors:
            if offset == 0 and sign == 1:
                parts.append(name)
            elif offset == 0:
                parts.append(f"({sign:g}*{name})")
            else:
                op = "-" if sign < 0 else "+"
                mag = "" if abs(sign) == 1 else f"{abs(sign):g}*"
                parts.append(f"({offset:.6g}{op}{mag}{name})")
        body = "*".join(parts) if parts else "1"
        return body if self.coeff == 1 else f"{self.coeff:g}*{body}"


def sym(name: str) -> ParamExpr:
    return ParamExpr(1.0, ((0.0, 1.0, name),))


def pi_minus(name: str) -> ParamExpr:
    return ParamExpr(1.0, ((math.pi, -1.0, name),))


def const(value: float) -> ParamExpr:
    return ParamExpr(float(value), ())


@dataclass(frozen=True)
class SymbolicOp:
    kind: str
    targets: tuple[int, ...]
    expr: ParamExpr

    def __post_init__(self):
        if self.kind not in ROTATION_KINDS:
            raise CircuitError(f"only rotations can be parameterized, not {self.kind}")
        # reuse GateOp target validation
        GateOp(self.kind, self.targets, 0.0)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))


@dataclass
class ParamCircuit:
    n_qubits: int
    ops: list = field(default_factory=list)
    parameter_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise CircuitError(f"n_qubits must be >= 1, got {self.n_qubits}")

    def declare(self, *names: str) -> None:
        for name in names:
            if name not in self.parameter_names:
                self.parameter_names.append(name)

    def add(self, kind: str, *targets: int, angle=None) -> None:
        """Append a gate; ``angle`` may be a float or a ParamExpr."""
        if max(targets) >= self.n_qubits:
            raise CircuitError(f"target {max(targets)} out of range for {self.n_qubits} qubits")
        if isinstance(angle, ParamExpr):
            if not angle.factors:
                self.ops.append(GateOp(kind, targets, angle.coeff))
                return
            self.declare(*angle.symbols)
            self.ops.append(SymbolicOp(kind, targets, angle))
        else:
            self.ops.append(GateOp(kind, targets, None if angle is None else float(angle)))

    @property
    def is_bound(self) -> bool:
        return not self.parameter_names and not any(isinstance(op, SymbolicOp) for op in self.ops)

    def gate_ops(self) -> list[GateOp]:
        if not self.is_bound:
            raise CircuitError(f"circuit has free symbols {self.parameter_names}")
        return list(self.ops)

    def count(self, kind: str) -> int:
        return sum(op.kind == kind for op in self.ops)

    def dump(self) -> str:
        """Plain-text gate list, one ``kind target(s) [angle]`` per line."""
        lines = []
        for op in self.ops:
            targets = " ".join(str(t) for t in op.targets)
            if isinstance(op, SymbolicOp):
                lines.append(f"{op.kind} {targets} {op.expr}")
            elif op.angle is not None:
                lines.append(f"{op.kind} {targets} {op.angle!r}")
            else:
                lines.append(f"{op.kind} {targets}")
        return "\n".join(lines) + ("\n" if lines else "")


def compose(front: ParamCircuit, back: ParamCircuit) -> ParamCircuit:
    if front.n_qubits != back.n_qubits:
        raise CircuitError(f"qubit count mismatch: {front.n_qubits} vs {back.n_qubits}")
    clash = set(front.parameter_names) & set(back.parameter_names)
    if clash:
        raise CircuitError(f"parameter name collision: {sorted(clash)}")
    return ParamCircuit(
        front.n_qubits,
        list(front.ops) + list(back.ops),
        list(front.parameter_names) + list(back.parameter_names),
    )


def _check_assignment(names, assignment: Mapping[str, float]) -> None:
    missing = [n for n in names if n not in assignment]
    if missing:
        raise CircuitError(f"missing values for {missing}")
    for n in names:
        if not np.all(np.isfinite(assignment[n])):
            raise CircuitError(f"non-finite value for {n!r}")


def bind(circ: ParamCircuit, assignment: Mapping[str, float]) -> ParamCircuit:
    _check_assignment(circ.parameter_names, assignment)
    ops = []
    for op in circ.ops:
        if isinstance(op, SymbolicOp):
            ops.append(GateOp(op.kind, op.targets, float(op.expr.evaluate(assignment))))
        else:
            ops.append(op)
    return ParamCircuit(circ.n_qubits, ops, [])


def run_ops(amps: np.ndarray, circ: ParamCircuit, values: Mapping[str, np.ndarray] | None = None):
    """Apply ``circ`` to a batch of states ``(batch, 2**n)``.

    Symbol values may be scalars (shared by the batch) or arrays of length
    ``batch`` (one angle per state).
    """
    if values is None:
        values = {}
    _check_assignment(circ.parameter_names, values)
    n = circ.n_qubits
    for op in circ.ops:
        if isinstance(op, SymbolicOp):
            mat = gate_matrix(op.kind, op.expr.evaluate(values))
        else:
            mat = op.matrix
        amps = apply_matrix(amps, mat, op.targets, n)
    return amps


def simulate(circ: ParamCircuit) -> StateVector:
    if not circ.is_bound:
        raise CircuitError(f"cannot simulate with free symbols {circ.parameter_names}")
    state = new_zero_state(circ.n_qubits)
    amps = run_ops(state.amplitudes[None, :], circ)
    return StateVector(circ.n_qubits, amps[0])


def simulate_batch(circ: ParamCircuit, values: Mapping[str, np.ndarray], batch: int) -> np.ndarray:
    amps = np.zeros((batch, 2**circ.n_qubits), dtype=complex)
    amps[:, 0] = 1.0
    return run_ops(amps, circ, values)


def embed(matrix: np.ndarray, targets, n_qubits: int) -> np.ndarray:
    """Full-space matrix of a gate acting on ``targets``, built index by index."""
    dim = 2**n_qubits
    k = len(targets)
    full = np.zeros((dim, dim), dtype=complex)
    mask = 0
    for t in targets:
        mask |= 1 << t
    for col in range(dim):
        sub_col = 0
        for t in targets:
            sub_col = (sub_col << 1) | ((col >> t) & 1)
        rest = col & ~mask
        for sub_row in range(2**k):
            row = rest
            for pos, t in enumerate(targets):
                if (sub_row >> (k - 1 - pos)) & 1:
                    row |= 1 << t
            full[row, col] = matrix[sub_row, sub_col]
    return full


def to_unitary(circ: ParamCircuit) -> np.ndarray:
    if circ.n_qubits > MAX_UNITARY_QUBITS:
        raise CircuitError(f"to_unitary limited to {MAX_UNITARY_QUBITS} qubits")
    u = np.eye(2**circ.n_qubits, dtype=complex)
    for op in circ.gate_ops():
        u = embed(op.matrix, op.targets, circ.n_qubits) @ u
    return u


_BASIS_IN = {"X": ("H", None), "Y": ("RX", math.pi / 2), "Z": None}
_BASIS_OUT = {"X": ("H", None), "Y": ("RX", -math.pi / 2), "Z": None}


def append_pauli_evolution(
    circ: ParamCircuit, pauli_string: Mapping[int, str], angle_expr: ParamExpr | float
) -> None:
    """Append ``exp(i * angle * P)`` for a Pauli product ``P``.

    Basis change into Z, a CX ladder onto the last qubit of the string,
    ``RZ(-2 * angle)`` there, then the ladder and basis change undone.
    """
    if not pauli_string:
        raise CircuitError("empty Pauli string")
    qubits = [int(q) for q in pauli_string]
    if len(set(qubits)) != len(qubits):
        raise CircuitError(f"duplicate qubit in Pauli string {pauli_string}")
    for q in qubits:
        if not 0 <= q < circ.n_qubits:
            raise CircuitError(f"qubit {q} out of range")
    labels = [pauli_string[q].upper() for q in pauli_string]
    if any(p not in "XYZ" or len(p) != 1 for p in labels):
        raise CircuitError(f"Pauli labels must be X, Y or Z, got {labels}")
    if not isinstance(angle_expr, ParamExpr):
        angle_expr = const(angle_expr)

    for q, p in zip(qubits, labels):
        change = _BASIS_IN[p]
        if change:
            circ.add(change[0], q, angle=change[1])
    for a, b in zip(qubits, qubits[1:]):
        circ.add("CX", a, b)
    circ.add("RZ", qubits[-1], angle=angle_expr.scaled(-2.0))
    for a, b in reversed(list(zip(qubits, qubits[1:]))):
        circ.add("CX", a, b)
    for q, p in zip(qubits, labels):
        change = _BASIS_OUT[p]
        if change:
            circ.add(change[0], q, angle=change[1])


__all__ = [
    "CircuitError",
    "ParamCircuit",
    "ParamExpr",
    "SymbolicOp",
    "SimulationError",
    "append_pauli_evolution",
    "bind",
    "compose",
    "const",
    "embed",
    "pi_minus",
    "run_ops",
    "simulate",
    "simulate_batch",
    "sym",
    "to_unitary",
]
