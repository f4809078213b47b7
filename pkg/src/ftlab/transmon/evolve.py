"""Second-order split-step propagation of the driven device model.

One time step applies

    exp(-i tau A / 2) C_1 ... C_k  D(t_mid)  C_k ... C_1 exp(-i tau A / 2)

where A collects all diagonal energies, each C_j is the exact
exponential of one transmon-resonator coupling over tau/2, and D(t_mid)
is the exact exponential of the drive terms -8 E_C n_g(t_mid) n for the
midpoint of the step. Every factor is unitary, so norm is conserved to
rounding regardless of tau; the palindromic order keeps the splitting
second-order accurate.
"""

from __future__ import annotations

import numba
import numpy as np

from ..errors import ConfigError, DomainError
from .compile import DriveSchedule
from .device import N_LEVELS, TransmonDevice, TruncatedBasis, fock_ladder
from .pulses import pulse_waveform


@numba.njit(cache=True)
def _scale_rows(psi, phases):
    for i in range(psi.shape[0]):
        p = phases[i]
        for c in range(psi.shape[1]):
            psi[i, c] *= p


@numba.njit(cache=True)
def _one_site(psi, u, stride, bases):
    for bi in range(bases.shape[0]):
        b = bases[bi]
        for c in range(psi.shape[1]):
            v0 = psi[b, c]
            v1 = psi[b + stride, c]
            v2 = psi[b + 2 * stride, c]
            v3 = psi[b + 3 * stride, c]
            psi[b, c] = u[0, 0] * v0 + u[0, 1] * v1 + u[0, 2] * v2 + u[0, 3] * v3
            psi[b + stride, c] = u[1, 0] * v0 + u[1, 1] * v1 + u[1, 2] * v2 + u[1, 3] * v3
            psi[b + 2 * stride, c] = u[2, 0] * v0 + u[2, 1] * v1 + u[2, 2] * v2 + u[2, 3] * v3
            psi[b + 3 * stride, c] = u[3, 0] * v0 + u[3, 1] * v1 + u[3, 2] * v2 + u[3, 3] * v3


@numba.njit(cache=True)
def _two_site(psi, u, stride_a, stride_b, bases):
    vec = np.empty(16, dtype=np.complex128)
    for bi in range(bases.shape[0]):
        b = bases[bi]
        for c in range(psi.shape[1]):
            for la in range(4):
                for lb in range(4):
                    vec[4 * la + lb] = psi[b + la * stride_a + lb * stride_b, c]
            for ra in range(4):
                for rb in range(4):
                    acc = 0.0 + 0.0j
                    row = 4 * ra + rb
                    for k in range(16):
                        acc += u[row, k] * vec[k]
                    psi[b + ra * stride_a + rb * stride_b, c] = acc


@numba.njit(cache=True)
def _run_steps(psi, half_phase, coup_u, coup_sa, coup_sb, coup_bases, dr_v, dr_lam, dr_stride, dr_bases, dr_coef, tau):
    n_steps = dr_coef.shape[0]
    n_coup = coup_u.shape[0]
    n_drv = dr_v.shape[0]
    u4 = np.empty((4, 4), dtype=np.complex128)
    ph = np.empty(4, dtype=np.complex128)
    for s in range(n_steps):
        _scale_rows(psi, half_phase)
        for k in range(n_coup):
            _two_site(psi, coup_u[k], coup_sa[k], coup_sb[k], coup_bases[k])
        for d in range(n_drv):
            cf = dr_coef[s, d]
            if cf != 0.0:
                for k in range(4):
                    ph[k] = np.exp(-1j * tau * cf * dr_lam[d, k])
                for a in range(4):
                    for b in range(4):
                        acc = 0.0 + 0.0j
                        for k in range(4):
                            acc += dr_v[d, a, k] * ph[k] * dr_v[d, b, k]
                        u4[a, b] = acc
                _one_site(psi, u4, dr_stride[d], dr_bases[d])
        for k in range(n_coup - 1, -1, -1):
            _two_site(psi, coup_u[k], coup_sa[k], coup_sb[k], coup_bases[k])
        _scale_rows(psi, half_phase)


def _digit(index, stride):
    return (index // stride) % N_LEVELS


def _bases_for(dim, strides):
    idx = np.arange(dim)
    keep = np.ones(dim, dtype=bool)
    for s in strides:
        keep &= _digit(idx, s) == 0
    return idx[keep].astype(np.int64)


class _StepTables:
    """Precomputed per-step factors for one (device, basis, tau) triple."""

    __slots__ = ("half_phase", "coup_u", "coup_sa", "coup_sb", "coup_bases", "drive_sites")

    def __init__(self, device, basis, tau):
        dim = device.dim
        n_tr = len(device.transmon_ids)

        energy = np.zeros(dim)
        idx = np.arange(dim)
        for s in range(n_tr):
            energy += basis.energies[s][_digit(idx, device.site_stride(s))]
        for r in range(len(device.resonator_ids)):
            site = n_tr + r
            energy += device.res_omega[r] * _digit(idx, device.site_stride(site))
        self.half_phase = np.exp(-0.5j * tau * energy)

        ladder = fock_ladder()
        factors = []
        for r in range(len(device.resonator_ids)):
            r_stride = device.site_stride(n_tr + r)
            for q in device.couplings[r]:
                s = device.site_of_transmon(q)
                k16 = device.res_g[r] * np.kron(basis.n_mats[s], ladder)
                vals, vecs = np.linalg.eigh(k16)
                u = (vecs * np.exp(-0.5j * tau * vals)) @ vecs.T.conj()
                t_stride = device.site_stride(s)
                factors.append((u, t_stride, r_stride, _bases_for(dim, (t_stride, r_stride))))
        if factors:
            self.coup_u = np.stack([f[0] for f in factors]).astype(np.complex128)
            self.coup_sa = np.array([f[1] for f in factors], dtype=np.int64)
            self.coup_sb = np.array([f[2] for f in factors], dtype=np.int64)
            self.coup_bases = np.stack([f[3] for f in factors])
        else:
            self.coup_u = np.zeros((0, 16, 16), dtype=np.complex128)
            self.coup_sa = np.zeros(0, dtype=np.int64)
            self.coup_sb = np.zeros(0, dtype=np.int64)
            self.coup_bases = np.zeros((0, dim // 16), dtype=np.int64)

        # drive diagonalizations for every transmon; used on demand
        self.drive_sites = {}
        for s in range(n_tr):
            lam, v = np.linalg.eigh(basis.n_mats[s])
            stride = device.site_stride(s)
            self.drive_sites[device.transmon_ids[s]] = (
                v.astype(np.float64),
                lam.astype(np.float64),
                stride,
                _bases_for(dim, (stride,)),
            )


def _sample_drives(device, schedule, driven, n_steps, tau):
    """Midpoint drive coefficients -8 E_C n_g(t) per driven transmon."""
    coef = np.zeros((n_steps, max(len(driven), 1)))
    t_mid = (np.arange(n_steps) + 0.5) * tau
    col = {q: j for j, q in enumerate(driven)}
    for entry in schedule.entries:
        j = col[entry.transmon]
        scale = -8.0 * device.e_c[device.site_of_transmon(entry.transmon)]
        lo = np.searchsorted(t_mid, entry.t0, side="left")
        hi = np.searchsorted(t_mid, entry.t0 + entry.pulse.duration, side="right")
        if hi > lo:
            coef[lo:hi, j] += scale * pulse_waveform(entry.pulse, t_mid[lo:hi] - entry.t0)
    return coef


def trotter_evolve(
    device: TransmonDevice,
    basis: TruncatedBasis,
    schedule: DriveSchedule,
    t_span=None,
    tau=0.001,
    state=None,
) -> np.ndarray:
    """Propagate through the schedule and return the final state.

    state defaults to the joint ground state (one column); a (dim,) or
    (dim, n) array propagates in place semantics-free (a copy is made).
    """
    if tau <= 0.0:
        raise DomainError("tau must be positive")
    if t_span is None:
        t_span = schedule.duration
    if t_span < 0.0:
        raise DomainError("t_span must be nonnegative")
    n_steps = int(round(t_span / tau))
    if abs(n_steps * tau - t_span) > 1e-6 * max(tau, t_span):
        raise DomainError(f"t_span {t_span} is not a multiple of tau {tau}")
    for entry in schedule.entries:
        if entry.transmon not in device.transmon_ids:
            raise ConfigError(f"schedule drives transmon {entry.transmon} absent from device")

    if state is None:
        psi = np.zeros((device.dim, 1), dtype=np.complex128)
        psi[0, 0] = 1.0
    else:
        psi = np.array(state, dtype=np.complex128)
        squeeze = psi.ndim == 1
        if squeeze:
            psi = psi[:, None]
        if psi.shape[0] != device.dim:
            raise ConfigError(f"state dimension {psi.shape[0]} != device dimension {device.dim}")
    if n_steps == 0:
        return psi[:, 0] if (state is None or squeeze) else psi

    tables = _StepTables(device, basis, tau)
    driven = sorted({e.transmon for e in schedule.entries})
    coef = _sample_drives(device, schedule, driven, n_steps, tau)
    if driven:
        dr_v = np.stack([tables.drive_sites[q][0] for q in driven])
        dr_lam = np.stack([tables.drive_sites[q][1] for q in driven])
        dr_stride = np.array([tables.drive_sites[q][2] for q in driven], dtype=np.int64)
        dr_bases = np.stack([tables.drive_sites[q][3] for q in driven])
    else:
        dr_v = np.zeros((1, 4, 4))
        dr_lam = np.zeros((1, 4))
        dr_stride = np.ones(1, dtype=np.int64)
        dr_bases = np.zeros((1, device.dim // 4), dtype=np.int64)

    _run_steps(
        psi,
        tables.half_phase,
        tables.coup_u,
        tables.coup_sa,
        tables.coup_sb,
        tables.coup_bases,
        dr_v,
        dr_lam,
        dr_stride,
        dr_bases,
        coef,
        tau,
    )
    if state is None or squeeze:
        return psi[:, 0]
    return psi
