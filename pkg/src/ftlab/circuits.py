"""Logical circuits on the [[4,2,2]] code and their physical lowerings.

A logical circuit is an initial two-qubit state plus a sequence from the
gate set {X1, X2, Z1, Z2, HHS, CZ}. lower_bare maps it onto the two
physical qubits q3, q4; lower_encoded maps it onto q1..q4 (plus the
ancilla q0 for the |00> preparation) using the transversal gate
implementations of the code.

Suite text grammar, one entry per line:

    171-173 CZ X1 X2 Z1 Z1 X1 X1 Z1 Z1 Z2 |i>

The id range covers the three initial states |00>, |0+>, |Phi+>
(id mod 3 = 0, 1, 2). The rightmost mnemonic is applied first
(operator notation); parsed gate tuples are already reversed into
application order.
"""

from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass
from importlib import resources

from .errors import DataIntegrityError, DomainError, ParseError

#: sha256 of the shipped suite file; load_suite refuses to run on a mismatch
SUITE_SHA256 = "231d915a0938b99709a469bc12e984fa9d50e144f2273ebba24bab7695a0921f"
SUITE_SIZE = 465

# suite-generation metadata (the generating procedure itself is not part of
# this package): maximum sequence length, repetition parameter, periodicity
SUITE_T = 10
SUITE_RP = 6
SUITE_P = 3

#: representative circuits used for the expensive backends (five id triples)
SELECTED_15 = (0, 1, 2, 240, 241, 242, 216, 217, 218, 171, 172, 173, 270, 271, 272)


class LogicalGate(enum.Enum):
    X1 = "X1"
    X2 = "X2"
    Z1 = "Z1"
    Z2 = "Z2"
    HHS = "HHS"
    CZ = "CZ"


class InitialState(enum.Enum):
    ZERO_ZERO = "|00>"
    ZERO_PLUS = "|0+>"
    PHI_PLUS = "|Phi+>"


#: id mod 3 -> initial state
INIT_BY_RESIDUE = (InitialState.ZERO_ZERO, InitialState.ZERO_PLUS, InitialState.PHI_PLUS)


@dataclass(frozen=True)
class LogicalCircuit:
    init: InitialState
    gates: tuple[LogicalGate, ...]
    id: int | None = None


@dataclass(frozen=True)
class PhysicalOp:
    name: str  # X, Z, S, H, CNOT
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.name not in ("X", "Z", "S", "H", "CNOT"):
            raise DomainError(f"unknown physical op {self.name!r}")
        n_expected = 2 if self.name == "CNOT" else 1
        if len(self.qubits) != n_expected:
            raise DomainError(f"{self.name} takes {n_expected} qubit(s), got {self.qubits}")
        if any(not 0 <= q <= 4 for q in self.qubits):
            raise DomainError(f"qubit labels must be in 0..4, got {self.qubits}")
        if self.name == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise DomainError("CNOT control and target must differ")


def _x(q):
    return PhysicalOp("X", (q,))


def _z(q):
    return PhysicalOp("Z", (q,))


def _s(q):
    return PhysicalOp("S", (q,))


def _h(q):
    return PhysicalOp("H", (q,))


def _cnot(c, t):
    return PhysicalOp("CNOT", (c, t))


@dataclass(frozen=True)
class PhysicalCircuit:
    ops: tuple[PhysicalOp, ...]
    measured_qubits: tuple[int, ...]
    width: int


_LINE_RE = re.compile(r"^(?:(\d+)-(\d+)\s+)?(.*?)\s*\|i>$")


def _parse_tokens(text: str):
    """Split a suite line into (id_lo, id_hi, gates in application order)."""
    stripped = text.rstrip("\n")
    m = _LINE_RE.match(stripped.strip())
    if m is None:
        pos = stripped.find("|i>")
        raise ParseError(f"line does not end in '|i>': {stripped!r}", position=max(pos, 0))
    lo, hi, middle = m.group(1), m.group(2), m.group(3)
    gates = []
    for tok in middle.split():
        try:
            gates.append(LogicalGate(tok))
        except ValueError:
            raise ParseError(f"unknown gate mnemonic {tok!r}", position=stripped.index(tok)) from None
    gates.reverse()  # rightmost gate acts first
    ids = (int(lo), int(hi)) if lo is not None else None
    return ids, tuple(gates)


def parse_circuit(text: str, init: InitialState = InitialState.ZERO_ZERO) -> LogicalCircuit:
    """Parse one circuit line; a leading id range, if present, is ignored."""
    _, gates = _parse_tokens(text)
    return LogicalCircuit(init=init, gates=gates)


def format_circuit(circuits: list[LogicalCircuit]) -> str:
    """Canonical suite line for a consecutive id triple (inverse of the loader)."""
    ids = [c.id for c in circuits]
    if len(ids) != 3 or None in ids or ids != [ids[0], ids[0] + 1, ids[0] + 2]:
        raise DomainError("format_circuit needs a consecutive id triple")
    gate_text = " ".join(g.value for g in reversed(circuits[0].gates))
    middle = f"{gate_text} " if gate_text else ""
    return f"{ids[0]}-{ids[2]} {middle}|i>"


def _suite_text() -> str:
    return resources.files("ftlab.data").joinpath("circuit_suite.txt").read_text("utf-8")


def load_suite(source: str | None = None) -> list[LogicalCircuit]:
    """Load the 465-circuit suite (the shipped file unless source is given).

    The shipped file's sha256 is pinned; a user-supplied source skips the
    hash but still must produce ids 0..464 in consecutive triples.
    """
    if source is None:
        text = _suite_text()
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        if digest != SUITE_SHA256:
            raise DataIntegrityError(f"suite file sha256 mismatch: {digest}")
    else:
        with open(source, encoding="utf-8") as f:
            text = f.read()

    circuits: list[LogicalCircuit] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        ids, gates = _parse_tokens(line)
        if ids is None or ids[1] - ids[0] != 2:
            raise DataIntegrityError(f"suite line must carry a 3-wide id range: {line!r}")
        for cid in range(ids[0], ids[1] + 1):
            circuits.append(LogicalCircuit(init=INIT_BY_RESIDUE[cid % 3], gates=gates, id=cid))
    if [c.id for c in circuits] != list(range(SUITE_SIZE)):
        raise DataIntegrityError(f"suite must contain ids 0..{SUITE_SIZE - 1}, got {len(circuits)}")
    return circuits


def load_selected_15() -> list[LogicalCircuit]:
    suite = load_suite()
    return [suite[i] for i in SELECTED_15]


# bare lowering: logical qubit 1 lives on q3, logical qubit 2 on q4
_BARE_PREP = {
    InitialState.ZERO_ZERO: (),
    InitialState.ZERO_PLUS: (_h(4),),
    InitialState.PHI_PLUS: (_h(3), _cnot(3, 4)),
}

_BARE_GATE = {
    LogicalGate.X1: (_x(3),),
    LogicalGate.X2: (_x(4),),
    LogicalGate.Z1: (_z(3),),
    LogicalGate.Z2: (_z(4),),
    # HHS has no native two-qubit primitive here: H H CNOT three times
    LogicalGate.HHS: (_h(3), _h(4), _cnot(3, 4)) * 3,
    LogicalGate.CZ: (_h(4), _cnot(3, 4), _h(4)),
}

# encoded preparations; the |00> prep entangles the ancilla q0, whose
# measurement is deferred to the terminal readout
_ENCODED_PREP = {
    InitialState.ZERO_ZERO: (_h(3), _cnot(3, 2), _cnot(2, 1), _cnot(3, 4), _cnot(1, 0), _cnot(4, 0)),
    InitialState.ZERO_PLUS: (_h(2), _cnot(2, 1), _h(3), _cnot(3, 4)),
    InitialState.PHI_PLUS: (_h(3), _cnot(3, 2), _h(1), _cnot(1, 4)),
}

# transversal encoded gates on the code qubits q1..q4
_ENCODED_GATE = {
    LogicalGate.X1: (_x(1), _x(3)),
    LogicalGate.X2: (_x(1), _x(2)),
    LogicalGate.Z1: (_z(1), _z(2)),
    LogicalGate.Z2: (_z(1), _z(3)),
    LogicalGate.HHS: (_h(1), _h(2), _h(3), _h(4)),
    LogicalGate.CZ: (_s(1), _s(2), _s(3), _s(4), _z(2), _z(3)),
}


def lower_bare(c: LogicalCircuit) -> PhysicalCircuit:
    ops = list(_BARE_PREP[c.init])
    for g in c.gates:
        ops.extend(_BARE_GATE[g])
    return PhysicalCircuit(ops=tuple(ops), measured_qubits=(3, 4), width=2)


def lower_encoded(c: LogicalCircuit) -> PhysicalCircuit:
    ops = list(_ENCODED_PREP[c.init])
    for g in c.gates:
        ops.extend(_ENCODED_GATE[g])
    return PhysicalCircuit(ops=tuple(ops), measured_qubits=(0, 1, 2, 3, 4), width=5)


def logical_unitary(g: LogicalGate):
    """Exact 4x4 unitary of a logical gate (qubit 1 = most significant bit)."""
    import numpy as np

    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
    eye = np.eye(2, dtype=complex)
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    table = {
        LogicalGate.X1: np.kron(x, eye),
        LogicalGate.X2: np.kron(eye, x),
        LogicalGate.Z1: np.kron(z, eye),
        LogicalGate.Z2: np.kron(eye, z),
        LogicalGate.HHS: swap @ np.kron(h, h),
        LogicalGate.CZ: np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex),
    }
    return table[g]
