"""Figures of merit for realized gate matrices.

The realized matrix m is the projection of the evolved computational
basis onto the computational subspace, so it is generally sub-unitary.
With d the subspace dimension, T1 = tr(m^H m) and V = |tr(target^H m)|:

    delta     = (T1 + d - 2 V) / (2 d)
        the global-phase-minimized squared Frobenius distance; zero
        exactly when m equals the target up to a phase,
    f_avg     = (T1 + V^2) / (d (d + 1))
        the average gate fidelity of the map rho -> m rho m^H,
    unitarity = (d T1^2 - T2) / (d (d - 1) (d + 1)),  T2 = tr((m^H m)^2)
        the variance-based coherence measure of that map, 1 for any
        unitary m and 0 for the zero matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class GateMetrics:
    delta: float
    f_avg: float
    unitarity: float

    def __post_init__(self):
        if self.delta < -1e-12:
            raise DomainError("delta must be nonnegative")
        if not -1e-9 <= self.f_avg <= 1.0 + 1e-9:
            raise DomainError("f_avg must lie in [0, 1]")


def gate_metrics(m, target) -> GateMetrics:
    m = np.asarray(m, dtype=complex)
    target = np.asarray(target, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError("gate matrix must be square")
    if m.shape != target.shape:
        raise DomainError(f"shape mismatch: {m.shape} vs {target.shape}")
    d = m.shape[0]
    if d < 2:
        raise DomainError("gate matrices must act on at least one qubit")

    gram = m.conj().T @ m
    t1 = float(np.trace(gram).real)
    t2 = float(np.trace(gram @ gram).real)
    overlap = abs(np.trace(target.conj().T @ m))
    return GateMetrics(
        delta=(t1 + d - 2.0 * overlap) / (2.0 * d),
        f_avg=(t1 + overlap**2) / (d * (d + 1.0)),
        unitarity=(d * t1**2 - t2) / (d * (d - 1.0) * (d + 1.0)),
    )
