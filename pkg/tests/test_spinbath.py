import math

import numpy as np
import pytest

from ftlab.circuits import PhysicalOp, load_suite, lower_bare, lower_encoded
from ftlab.errors import ConfigError, DomainError
from ftlab.spinbath import (
    GateSegment,
    SpinBathConfig,
    build_segment,
    circuit_duration,
    environment_action,
    estimate_t2,
    hamiltonian_action,
    run_circuit,
    thermal_environment,
)
from ftlab.statevector import run_ideal

_I = np.eye(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.diag([1.0, -1.0]).astype(complex)
_PAULI = {"x": _X, "y": _Y, "z": _Z}


def _op_at(placed, n_sites):
    mats = [_I] * n_sites
    for site, m in placed:
        mats[site] = m
    out = np.eye(1)
    for m in mats:
        out = np.kron(out, m)
    return out


def _dense_h(cfg, seg):
    """Direct kron assembly of the full Hamiltonian, site 0 leftmost."""
    n = 5 + cfg.n_env
    h = np.zeros((2**n, 2**n), dtype=complex)
    for q in range(5):
        if seg.h_x[q]:
            h -= seg.h_x[q] * _op_at([(q, _X)], n)
        if seg.h_z[q]:
            h -= seg.h_z[q] * _op_at([(q, _Z)], n)
    for a in range(5):
        for b in range(a + 1, 5):
            if seg.g_x[a][b]:
                h -= seg.g_x[a][b] * _op_at([(a, _X), (b, _X)], n)
    for bond, js in enumerate(cfg.env_couplings):
        u, v = 5 + bond, 5 + (bond + 1) % cfg.n_env
        for coef, ax in zip(js, "xyz"):
            h -= coef * _op_at([(u, _PAULI[ax]), (v, _PAULI[ax])], n)
    for q, ks in enumerate(cfg.qubit_env_couplings):
        j = cfg.defect_map[q]
        for coef, ax in zip(ks, "xyz"):
            h -= cfg.lam * coef * _op_at([(q, _PAULI[ax]), (j, _PAULI[ax])], n)
    return h


def _expm(h, t):
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * t * vals)) @ vecs.conj().T


def _segment_qubit_unitary(seg, qubits):
    """Small-register exponential of the qubit part of one segment."""
    n = len(qubits)
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i, q in enumerate(qubits):
        h -= seg.h_x[q] * _op_at([(i, _X)], n) + seg.h_z[q] * _op_at([(i, _Z)], n)
    for a in range(len(qubits)):
        for b in range(a + 1, len(qubits)):
            h -= seg.g_x[qubits[a]][qubits[b]] * _op_at([(a, _X), (b, _X)], n)
    return _expm(h, seg.duration)


# ---- configuration ----


def test_config_validation():
    with pytest.raises(ConfigError):
        SpinBathConfig(lam=-0.1)
    with pytest.raises(ConfigError):
        SpinBathConfig(lam=0.1, n_env=4)
    with pytest.raises(ConfigError):
        SpinBathConfig(lam=0.1, n_env=28)
    with pytest.raises(ConfigError):
        SpinBathConfig(lam=0.1, beta=-1.0)
    with pytest.raises(ConfigError):
        SpinBathConfig(lam=0.1, k_mode="gauss")
    with pytest.raises(ConfigError):
        SpinBathConfig(lam=0.1, n_thermal_samples=0)


def test_config_derived_couplings():
    cfg = SpinBathConfig(lam=0.2, n_env=8, seed=5)
    assert cfg == SpinBathConfig(lam=0.2, n_env=8, seed=5)
    assert len(set(cfg.defect_map)) == 5
    assert all(5 <= j < 13 for j in cfg.defect_map)
    assert len(cfg.env_couplings) == 8
    assert all(abs(j) <= 2.0 for row in cfg.env_couplings for j in row)
    assert all(abs(k) == 2.0 for row in cfg.qubit_env_couplings for k in row)
    assert cfg != SpinBathConfig(lam=0.2, n_env=8, seed=6)

    uni = SpinBathConfig(lam=0.2, n_env=8, seed=5, k_mode="uniform")
    mags = [abs(k) for row in uni.qubit_env_couplings for k in row]
    assert all(1.8 <= m <= 2.2 for m in mags)
    assert len(set(mags)) > 1


def test_config_thermal_sample_default():
    assert SpinBathConfig(lam=0.1, n_env=5).n_thermal_samples == 10
    assert SpinBathConfig(lam=0.1, n_env=12).n_thermal_samples == 1
    assert SpinBathConfig(lam=0.1, n_env=5, n_thermal_samples=3).n_thermal_samples == 3


def test_config_dict_roundtrip():
    cfg = SpinBathConfig(lam=0.05, beta=0.5, n_env=6, seed=9, k_mode="uniform")
    doc = cfg.to_dict()
    assert doc["defect_map"] == list(cfg.defect_map)
    assert SpinBathConfig.from_dict(doc) == cfg
    with pytest.raises(ConfigError):
        SpinBathConfig.from_dict({"lam": 0.1, "lambda": 0.1})
    with pytest.raises(ConfigError):
        SpinBathConfig.from_dict({"beta": 1.0})


# ---- gate segments ----


def test_segment_tables():
    (seg,) = build_segment(PhysicalOp("X", (0,)))
    assert seg.h_x[0] == 1.0 and seg.duration == math.pi / 2
    assert seg.h_z == (0.0,) * 5 and not any(v for row in seg.g_x for v in row)

    (seg,) = build_segment(PhysicalOp("Z", (2,)))
    assert seg.h_z[2] == 16.0 and seg.duration == pytest.approx(math.pi / 32)

    (seg,) = build_segment(PhysicalOp("S", (1,)))
    assert seg.h_z[1] == 15.5 and seg.duration == pytest.approx(math.pi / 62)

    (seg,) = build_segment(PhysicalOp("H", (3,)))
    assert seg.h_x[3] == seg.h_z[3] == 16.5
    assert seg.duration == pytest.approx(math.pi / math.sqrt(2) / 33)

    segs = build_segment(PhysicalOp("CNOT", (1, 0)))
    assert len(segs) == 3
    assert segs[0] == segs[2] == build_segment(PhysicalOp("H", (1,)))[0]
    mid = segs[1]
    assert mid.duration == pytest.approx(10 * math.pi)
    assert mid.h_x[1] == mid.h_x[0] == -0.025
    assert mid.g_x[1][0] == mid.g_x[0][1] == 0.025


def test_segment_validation():
    with pytest.raises(DomainError):
        GateSegment((0.0,) * 5, (0.0,) * 5, ((0.0,) * 5,) * 5, duration=0.0)
    bad_g = [[0.0] * 5 for _ in range(5)]
    bad_g[0][1] = 0.5  # not symmetric
    with pytest.raises(DomainError):
        GateSegment((0.0,) * 5, (0.0,) * 5, tuple(map(tuple, bad_g)), duration=1.0)


def test_segment_targets_up_to_phase():
    # qubit-register exponentials of the Table rows against the named gates
    hadamard = (_X + _Z) / math.sqrt(2)
    targets = [
        (PhysicalOp("X", (2,)), _X),
        (PhysicalOp("Z", (4,)), _Z),
        (PhysicalOp("S", (0,)), np.diag([1.0, -1j])),
        (PhysicalOp("H", (1,)), hadamard),
    ]
    for op, want in targets:
        (seg,) = build_segment(op)
        u = _segment_qubit_unitary(seg, list(op.qubits))
        assert abs(np.trace(u.conj().T @ want)) / 2 == pytest.approx(1.0, abs=1e-10)

    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    u = np.eye(4, dtype=complex)
    for seg in build_segment(PhysicalOp("CNOT", (2, 3))):
        u = _segment_qubit_unitary(seg, [2, 3]) @ u
    assert abs(np.trace(u.conj().T @ cnot)) / 4 == pytest.approx(1.0, abs=1e-10)


# ---- Hamiltonian action ----


def test_action_matches_dense_oracle():
    cfg = SpinBathConfig(lam=0.3, n_env=5, seed=2)
    seg = build_segment(PhysicalOp("CNOT", (0, 3)))[1]
    act = hamiltonian_action(cfg, seg)
    dense = _dense_h(cfg, seg)
    assert np.max(np.abs(dense - dense.conj().T)) < 1e-12

    rng = np.random.default_rng(0)
    for _ in range(5):
        v = rng.standard_normal(1024) + 1j * rng.standard_normal(1024)
        assert np.max(np.abs(act.apply(v) - dense @ v)) < 1e-10

    vals = np.linalg.eigvalsh(dense)
    assert act.lo <= vals[0] and vals[-1] <= act.hi


def test_action_zero_lambda_leaves_qubits_alone():
    cfg = SpinBathConfig(lam=0.0, n_env=5, seed=2)
    idle = GateSegment((0.0,) * 5, (0.0,) * 5, ((0.0,) * 5,) * 5, duration=1.0)
    act = hamiltonian_action(cfg, idle)
    rng = np.random.default_rng(1)
    env = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    v = np.zeros(1024, dtype=np.complex128)
    v[7 * 32 : 8 * 32] = env  # qubit basis state 7, arbitrary env vector
    out = act.apply(v)
    out = out.reshape(32, 32)
    assert np.max(np.abs(out[[q for q in range(32) if q != 7]])) == 0.0


# ---- thermal environment ----


def test_thermal_beta_zero_is_normalized_random():
    cfg = SpinBathConfig(lam=0.1, beta=0.0, n_env=6, seed=4)
    v = thermal_environment(cfg, 0)
    assert v.shape == (64,)
    assert abs(np.linalg.norm(v) - 1.0) < 1e-12
    assert np.array_equal(v, thermal_environment(cfg, 0))

    others = [thermal_environment(cfg, k) for k in range(1, 9)]
    ov2 = np.mean([abs(np.vdot(v, w)) ** 2 for w in others])
    assert 2.0**-6 / 4 < ov2 < 2.0**-6 * 4


def test_thermal_large_beta_projects_to_ground_state():
    cfg = SpinBathConfig(lam=0.1, beta=50.0, n_env=6, seed=4)
    v = thermal_environment(cfg, 0)
    h = np.zeros((64, 64), dtype=complex)
    for bond, js in enumerate(cfg.env_couplings):
        u, w = bond, (bond + 1) % 6
        for coef, ax in zip(js, "xyz"):
            h -= coef * _op_at([(u, _PAULI[ax]), (w, _PAULI[ax])], 6)
    vals, vecs = np.linalg.eigh(h)
    assert abs(np.vdot(vecs[:, 0], v)) > 0.999

    act = environment_action(cfg)
    assert act.lo <= vals[0] and vals[-1] <= act.hi


# ---- circuits ----


def test_lambda_zero_matches_ideal_backend():
    cfg = SpinBathConfig(lam=0.0, beta=1.0, n_env=5, seed=3, n_thermal_samples=1)
    suite = load_suite()
    for cid in (2, 5, 16, 217, 241):
        c = suite[cid]
        for lower in (lower_bare, lower_encoded):
            pc = lower(c)
            got = run_circuit(cfg, pc)
            want = run_ideal(pc)
            assert np.max(np.abs(got.probs - want.probs)) < 1e-10, (cid, pc.width)


def test_norm_conservation_with_coupling():
    cfg = SpinBathConfig(lam=0.2, beta=1.0, n_env=5, seed=3, n_thermal_samples=2)
    pc = lower_encoded(load_suite()[4])
    d = run_circuit(cfg, pc)
    assert abs(d.probs.sum() - 1.0) < 1e-9


def test_seed_determinism():
    a = SpinBathConfig(lam=0.15, beta=1.0, n_env=5, seed=8, n_thermal_samples=2)
    pc = lower_bare(load_suite()[2])
    d1 = run_circuit(a, pc)
    d2 = run_circuit(a, pc)
    assert np.array_equal(d1.probs, d2.probs)
    b = SpinBathConfig(lam=0.15, beta=1.0, n_env=5, seed=9, n_thermal_samples=2)
    assert not np.array_equal(run_circuit(b, pc).probs, d1.probs)


def test_circuit_duration():
    pc = lower_bare(load_suite()[2])  # H(3), CNOT(3,4)
    t_h = math.pi / math.sqrt(2) / 33
    assert circuit_duration(pc) == pytest.approx(3 * t_h + 10 * math.pi)


# ---- decoherence probe ----


def test_t2_decoupled_reports_no_decay():
    cfg = SpinBathConfig(lam=0.0, beta=0.0, n_env=5, seed=3, n_thermal_samples=1)
    assert estimate_t2(cfg, qubit=0, window=10.0, n_samples=10) == math.inf


def test_t2_finite_at_strong_coupling():
    cfg = SpinBathConfig(lam=0.5, beta=0.0, n_env=5, seed=5, n_thermal_samples=1)
    t2 = estimate_t2(cfg, qubit=0, window=10.0, n_samples=24)
    assert 0.0 < t2 < 100.0


def test_t2_validation():
    cfg = SpinBathConfig(lam=0.1, n_env=5)
    with pytest.raises(DomainError):
        estimate_t2(cfg, qubit=5, window=10.0, n_samples=10)
    with pytest.raises(DomainError):
        estimate_t2(cfg, qubit=0, window=-1.0, n_samples=10)
    with pytest.raises(DomainError):
        estimate_t2(cfg, qubit=0, window=10.0, n_samples=4)
