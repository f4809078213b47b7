"""Circuit execution and realized gate matrices on the pulse model."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, NumericsError
from ..statevector import Distribution
from .compile import compile_to_pulses
from .device import N_LEVELS, TransmonDevice, TruncatedBasis
from .evolve import trotter_evolve

_TWO_PI = 2.0 * math.pi


def _level_probabilities(device, psi):
    """Per-transmon-level joint probabilities, resonators traced out."""
    n_tr = len(device.transmon_ids)
    p = np.abs(psi) ** 2
    p = p.reshape((N_LEVELS,) * device.n_sites)
    return p.sum(axis=tuple(range(n_tr, device.n_sites)))


def run_circuit(device: TransmonDevice, basis: TruncatedBasis, lib, pc, tau=0.001):
    """Evolve the ground state through pc's pulses.

    Returns (Distribution over pc.measured_qubits, leakage). Leakage is
    the probability of ending with any transmon outside its two qubit
    levels; the returned distribution is renormalized without it.
    """
    for op in pc.ops:
        for q in op.qubits:
            if q not in device.transmon_ids:
                raise ConfigError(f"circuit touches transmon {q} absent from device")
    for q in pc.measured_qubits:
        if q not in device.transmon_ids:
            raise ConfigError(f"measured transmon {q} absent from device")

    schedule = compile_to_pulses(pc.ops, lib)
    psi = trotter_evolve(device, basis, schedule, tau=tau)
    levels = _level_probabilities(device, psi)

    n_tr = len(device.transmon_ids)
    comp = levels[(slice(0, 2),) * n_tr]
    kept = float(comp.sum())
    leakage = float(levels.sum() - kept)
    if kept <= 0.0:
        raise NumericsError("all probability leaked out of the qubit subspace")

    order = [device.transmon_ids.index(q) for q in pc.measured_qubits]
    rest = [s for s in range(n_tr) if s not in order]
    comp = comp.transpose(order + rest)
    if rest:
        comp = comp.sum(axis=tuple(range(len(order), n_tr)))
    probs = comp.reshape(-1) / kept
    return Distribution(len(pc.measured_qubits), probs), leakage


def _computational_indices(device, qubits):
    """State indices of the 2^k computational states of the given qubits."""
    strides = [device.site_stride(device.site_of_transmon(q)) for q in qubits]
    k = len(qubits)
    idx = []
    for j in range(2**k):
        bits = [(j >> (k - 1 - b)) & 1 for b in range(k)]
        idx.append(sum(bit * s for bit, s in zip(bits, strides)))
    return np.array(idx), strides


def gate_matrix(device: TransmonDevice, basis: TruncatedBasis, lib, op, tau=0.001) -> np.ndarray:
    """Realized matrix of one op on its computational subspace.

    Columns are evolved from the computational basis (everything else
    in the ground state); rows are projected back onto it, rephased
    into the per-qubit rotating frames, and closed with the residual
    virtual-Z rotations. The result is sub-unitary when population
    leaks or entangles with the resonators.
    """
    schedule = compile_to_pulses((op,), lib)
    return matrix_for_schedule(device, basis, schedule, op.qubits, tau=tau)


def matrix_for_schedule(device, basis, schedule, qubits, tau=0.001) -> np.ndarray:
    idx, _ = _computational_indices(device, qubits)
    d = idx.size
    psi = np.zeros((device.dim, d), dtype=np.complex128)
    for j, i in enumerate(idx):
        psi[i, j] = 1.0
    psi = trotter_evolve(device, basis, schedule, tau=tau, state=psi)
    m = psi[idx, :]

    k = len(qubits)
    t_final = schedule.duration
    row_phase = np.zeros(d)
    for b, q in enumerate(qubits):
        freq = schedule.frame_freq.get(q, 0.0)
        frame = schedule.frames.get(q, 0.0)
        for i in range(d):
            if (i >> (k - 1 - b)) & 1:
                row_phase[i] += _TWO_PI * freq * t_final + frame
    return np.exp(1j * row_phase)[:, None] * m
