"""Ideal gate-level backend: exact distributions for physical circuits
and theory distributions straight from the logical unitaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import InitialState, LogicalCircuit, PhysicalCircuit, logical_unitary
from .errors import DomainError

_SQ = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0),
}

_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


@dataclass(frozen=True)
class Distribution:
    """Probabilities over bitstrings.

    probs[int(bits, 2)] is the probability of the outcome string `bits`,
    whose i-th character is the outcome of the i-th measured qubit
    (leftmost = first measured qubit, q0 for encoded and q3 for bare runs).
    """

    width: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (2**self.width,):
            raise DomainError(f"probs must have length 2^{self.width}, got {p.shape}")
        if np.any(p < -1e-12):
            raise DomainError("probabilities must be non-negative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise DomainError(f"probabilities must sum to 1, got {p.sum()!r}")
        object.__setattr__(self, "probs", p)

    def key(self, index: int) -> str:
        return format(index, f"0{self.width}b")

    def to_dict(self) -> dict[str, float]:
        return {self.key(i): float(p) for i, p in enumerate(self.probs) if p != 0.0}

    @classmethod
    def from_dict(cls, width: int, mapping: dict[str, float]) -> "Distribution":
        probs = np.zeros(2**width)
        for bits, p in mapping.items():
            if len(bits) != width or any(c not in "01" for c in bits):
                raise DomainError(f"bad bitstring {bits!r} for width {width}")
            probs[int(bits, 2)] += p
        return cls(width=width, probs=probs)


def _apply_1q(state: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(u, state, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def _apply_2q(state: np.ndarray, u4: np.ndarray, axis_a: int, axis_b: int) -> np.ndarray:
    u = u4.reshape(2, 2, 2, 2)
    out = np.tensordot(u, state, axes=([2, 3], [axis_a, axis_b]))
    return np.moveaxis(out, (0, 1), (axis_a, axis_b))


def run_ideal(pc: PhysicalCircuit) -> Distribution:
    """Exact measurement distribution over pc.measured_qubits."""
    touched = {q for op in pc.ops for q in op.qubits}
    sim_qubits = sorted(touched | set(pc.measured_qubits))
    pos = {q: i for i, q in enumerate(sim_qubits)}
    n = len(sim_qubits)

    state = np.zeros((2,) * n, dtype=complex)
    state[(0,) * n] = 1.0
    for op in pc.ops:
        if op.name == "CNOT":
            state = _apply_2q(state, _CNOT, pos[op.qubits[0]], pos[op.qubits[1]])
        else:
            state = _apply_1q(state, _SQ[op.name], pos[op.qubits[0]])

    prob = np.abs(state) ** 2
    measured_axes = [pos[q] for q in pc.measured_qubits]
    other_axes = tuple(i for i in range(n) if i not in measured_axes)
    if other_axes:
        prob = prob.sum(axis=other_axes)
        # surviving axes keep simulation order; bring them into measured order
        kept = [a for a in range(n) if a not in other_axes]
        prob = np.transpose(prob, [kept.index(a) for a in measured_axes])
    else:
        prob = np.transpose(prob, measured_axes)
    return Distribution(width=len(pc.measured_qubits), probs=prob.reshape(-1))


_INITIAL_2Q = {
    InitialState.ZERO_ZERO: np.array([1.0, 0.0, 0.0, 0.0], dtype=complex),
    InitialState.ZERO_PLUS: np.array([1.0, 1.0, 0.0, 0.0], dtype=complex) / np.sqrt(2.0),
    InitialState.PHI_PLUS: np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0),
}


def theory_distribution(c: LogicalCircuit) -> Distribution:
    """Ideal two-bit distribution (bit order q3 q4) from the logical unitaries."""
    psi = _INITIAL_2Q[c.init].copy()
    for g in c.gates:
        psi = logical_unitary(g) @ psi
    return Distribution(width=2, probs=np.abs(psi) ** 2)
