import numpy as np
import pytest

from ftlab.circuits import (
    SELECTED_15,
    InitialState,
    LogicalCircuit,
    LogicalGate,
    PhysicalOp,
    format_circuit,
    load_selected_15,
    load_suite,
    lower_bare,
    lower_encoded,
    logical_unitary,
    parse_circuit,
    _suite_text,
)
from ftlab.errors import DataIntegrityError, DomainError, ParseError


def test_parse_basic():
    c = parse_circuit("X1 |i>")
    assert c.init is InitialState.ZERO_ZERO
    assert c.gates == (LogicalGate.X1,)
    assert parse_circuit("|i>").gates == ()


def test_parse_reverses_to_application_order():
    c = parse_circuit("HHS CZ |i>")
    assert c.gates == (LogicalGate.CZ, LogicalGate.HHS)


def test_parse_ignores_id_prefix():
    c = parse_circuit("258-260 HHS CZ |i>", init=InitialState.PHI_PLUS)
    assert c.gates == (LogicalGate.CZ, LogicalGate.HHS)
    assert c.init is InitialState.PHI_PLUS


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as ei:
        parse_circuit("X1 FOO |i>")
    assert ei.value.position == 3
    with pytest.raises(ParseError):
        parse_circuit("X1 X2")  # missing terminal |i>


def test_load_suite_structure():
    suite = load_suite()
    assert len(suite) == 465
    assert [c.id for c in suite] == list(range(465))
    for c in suite:
        assert c.init is (InitialState.ZERO_ZERO, InitialState.ZERO_PLUS, InitialState.PHI_PLUS)[c.id % 3]
        assert len(c.gates) <= 10
    # spot checks against the printed table
    assert suite[0].gates == ()
    assert suite[216].gates == (LogicalGate.CZ,) * 5
    assert suite[171].gates == tuple(
        LogicalGate(g) for g in ["Z2", "Z1", "Z1", "X1", "X1", "Z1", "Z1", "X2", "X1", "CZ"]
    )


def test_roundtrip_format_matches_file():
    suite = load_suite()
    file_lines = [
        ln.strip() for ln in _suite_text().splitlines() if ln.strip() and not ln.startswith("#")
    ]
    regenerated = [format_circuit(suite[i : i + 3]) for i in range(0, 465, 3)]
    assert regenerated == file_lines


def test_load_suite_rejects_tampering(tmp_path):
    bad = tmp_path / "suite.txt"
    bad.write_text("0-2 |i>\n")
    with pytest.raises(DataIntegrityError):
        load_suite(str(bad))


def test_selected_15():
    sel = load_selected_15()
    assert tuple(c.id for c in sel) == SELECTED_15
    assert sel[3].gates == (LogicalGate.X1,) * 5


def test_physical_op_validation():
    with pytest.raises(DomainError):
        PhysicalOp("CNOT", (2, 2))
    with pytest.raises(DomainError):
        PhysicalOp("X", (7,))
    with pytest.raises(DomainError):
        PhysicalOp("T", (0,))


def test_lower_bare():
    pc = lower_bare(LogicalCircuit(InitialState.PHI_PLUS, ()))
    assert [(op.name, op.qubits) for op in pc.ops] == [("H", (3,)), ("CNOT", (3, 4))]
    assert pc.measured_qubits == (3, 4) and pc.width == 2

    pc = lower_bare(LogicalCircuit(InitialState.ZERO_ZERO, ()))
    assert pc.ops == ()

    pc = lower_bare(LogicalCircuit(InitialState.ZERO_ZERO, (LogicalGate.CZ,)))
    assert [op.name for op in pc.ops] == ["H", "CNOT", "H"]
    assert [op.qubits for op in pc.ops] == [(4,), (3, 4), (4,)]

    pc = lower_bare(LogicalCircuit(InitialState.ZERO_ZERO, (LogicalGate.HHS,)))
    assert [op.name for op in pc.ops] == ["H", "H", "CNOT"] * 3
    assert {q for op in pc.ops for q in op.qubits} == {3, 4}


def test_lower_encoded():
    pc = lower_encoded(LogicalCircuit(InitialState.ZERO_ZERO, ()))
    assert [(op.name, op.qubits) for op in pc.ops] == [
        ("H", (3,)),
        ("CNOT", (3, 2)),
        ("CNOT", (2, 1)),
        ("CNOT", (3, 4)),
        ("CNOT", (1, 0)),
        ("CNOT", (4, 0)),
    ]
    assert pc.measured_qubits == (0, 1, 2, 3, 4) and pc.width == 5

    pc = lower_encoded(LogicalCircuit(InitialState.ZERO_PLUS, ()))
    assert [(op.name, op.qubits) for op in pc.ops] == [
        ("H", (2,)),
        ("CNOT", (2, 1)),
        ("H", (3,)),
        ("CNOT", (3, 4)),
    ]

    pc = lower_encoded(LogicalCircuit(InitialState.ZERO_ZERO, (LogicalGate.CZ,)))
    assert [(op.name, op.qubits) for op in pc.ops[6:]] == [
        ("S", (1,)),
        ("S", (2,)),
        ("S", (3,)),
        ("S", (4,)),
        ("Z", (2,)),
        ("Z", (3,)),
    ]
    # q0 appears only in the |00> preparation CNOT targets
    for init in InitialState:
        for gate in LogicalGate:
            pc = lower_encoded(LogicalCircuit(init, (gate,)))
            uses_q0 = [op for op in pc.ops if 0 in op.qubits]
            if init is InitialState.ZERO_ZERO:
                assert all(op.name == "CNOT" and op.qubits[1] == 0 for op in uses_q0)
            else:
                assert not uses_q0


def test_logical_unitaries():
    assert np.allclose(logical_unitary(LogicalGate.CZ), np.diag([1, 1, 1, -1]))
    x = np.array([[0, 1], [1, 0]])
    assert np.allclose(logical_unitary(LogicalGate.X1), np.kron(x, np.eye(2)))
    hhs = logical_unitary(LogicalGate.HHS)
    assert np.allclose(hhs @ hhs, np.eye(4), atol=1e-15)
    for g in LogicalGate:
        u = logical_unitary(g)
        assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-15)
