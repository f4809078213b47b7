"""Transmon/resonator device model in a truncated eigenbasis.

Each transmon is diagonalized once in the charge basis and kept as its
four lowest eigenstates; resonators keep four Fock states. All couplings
and energies are stored in rad/ns (2*pi times the GHz values found in
device files), while carrier and qubit frequencies stay in GHz because
they multiply 2*pi*t in pulse waveforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from ..errors import ConfigError, DomainError

TWO_PI = 2.0 * math.pi

#: kept transmon eigenstates / Fock states per resonator
N_LEVELS = 4
#: charge states on each side of zero used for diagonalization
N_CHARGE = 35

#: largest joint dimension for which dense static operators are built
_DENSE_LIMIT = 4**8


def transmon_eigensystem(e_c, e_j, n_charge_max=N_CHARGE, n_levels=N_LEVELS):
    """Lowest eigenpairs of 4 E_C n^2 - E_J cos(phi) in the charge basis.

    Returns (energies, n_matrix). Energies are shifted so E_0 = 0; the
    charge operator is projected into the kept eigenbasis with signs
    fixed so that n_matrix[m, m+1] > 0.
    """
    if e_c <= 0.0 or e_j <= 0.0:
        raise DomainError("E_C and E_J must be positive")
    if n_charge_max < 10:
        raise DomainError(f"need at least 10 charge states per side, got {n_charge_max}")
    dim = 2 * n_charge_max + 1
    if not 0 < n_levels <= dim:
        raise DomainError(f"n_levels must be in 1..{dim}, got {n_levels}")

    charge = np.arange(-n_charge_max, n_charge_max + 1, dtype=float)
    h = np.diag(4.0 * e_c * charge**2)
    off = np.full(dim - 1, -0.5 * e_j)
    h += np.diag(off, 1) + np.diag(off, -1)
    vals, vecs = np.linalg.eigh(h)

    kept = vecs[:, :n_levels]
    n_mat = kept.T @ (charge[:, None] * kept)
    for m in range(n_levels - 1):
        if n_mat[m, m + 1] < 0.0:
            n_mat[:, m + 1] *= -1.0
            n_mat[m + 1, :] *= -1.0
    return vals[:n_levels] - vals[0], n_mat


def fock_ladder(n_levels=N_LEVELS):
    """a + a^dagger on the truncated Fock space."""
    a = np.diag(np.sqrt(np.arange(1.0, n_levels)), 1)
    return a + a.T


@dataclass(frozen=True)
class TransmonDevice:
    """Static parameters of a set of transmons and coupling resonators.

    Transmons and resonators keep their full-device labels, so reduced
    models still address circuit qubits and library pulses by the same
    numbering. couplings[r] lists the partner transmon labels of
    resonator r that are present in this device.
    """

    transmon_ids: tuple[int, ...]
    e_c: tuple[float, ...]
    e_j: tuple[float, ...]
    qubit_freq: tuple[float, ...]
    drive_freq: tuple[float, ...]
    resonator_ids: tuple[int, ...]
    res_omega: tuple[float, ...]
    res_g: tuple[float, ...]
    couplings: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n_tr, n_res = len(self.transmon_ids), len(self.resonator_ids)
        if n_tr == 0:
            raise ConfigError("device needs at least one transmon")
        if len(set(self.transmon_ids)) != n_tr or len(set(self.resonator_ids)) != n_res:
            raise ConfigError("duplicate transmon or resonator labels")
        for name, seq, want in (
            ("e_c", self.e_c, n_tr),
            ("e_j", self.e_j, n_tr),
            ("qubit_freq", self.qubit_freq, n_tr),
            ("drive_freq", self.drive_freq, n_tr),
            ("res_omega", self.res_omega, n_res),
            ("res_g", self.res_g, n_res),
            ("couplings", self.couplings, n_res),
        ):
            if len(seq) != want:
                raise ConfigError(f"{name} must have {want} entries, got {len(seq)}")
        for ec, ej in zip(self.e_c, self.e_j):
            if ec <= 0.0 or ej <= 0.0:
                raise ConfigError("E_C and E_J must be positive")
            if ej / ec <= 20.0:
                raise ConfigError(f"E_J/E_C = {ej / ec:.1f} is outside the transmon regime")
        for partners in self.couplings:
            for q in partners:
                if q not in self.transmon_ids:
                    raise ConfigError(f"coupling references transmon {q} absent from device")

    @property
    def n_sites(self):
        return len(self.transmon_ids) + len(self.resonator_ids)

    @property
    def dim(self):
        return N_LEVELS**self.n_sites

    def site_of_transmon(self, transmon_id):
        try:
            return self.transmon_ids.index(transmon_id)
        except ValueError:
            raise ConfigError(f"transmon {transmon_id} not in device") from None

    def site_of_resonator(self, resonator_id):
        try:
            return len(self.transmon_ids) + self.resonator_ids.index(resonator_id)
        except ValueError:
            raise ConfigError(f"resonator {resonator_id} not in device") from None

    def site_stride(self, site):
        return N_LEVELS ** (self.n_sites - 1 - site)


def _device_text(source):
    if source is not None:
        with open(source, "r", encoding="utf-8") as fh:
            return fh.read()
    return resources.files("ftlab.data").joinpath("transmon_device.json").read_text("utf-8")


def load_device(source=None) -> TransmonDevice:
    """Build the device from a parameter file (packaged file by default)."""
    try:
        doc = json.loads(_device_text(source))
        tr, res = doc["transmons"], doc["resonators"]
        e_c = [TWO_PI * v for v in tr["E_C/2pi"]]
        e_j = [TWO_PI * v for v in tr["E_J/2pi"]]
        omega = [TWO_PI * v for v in res["Omega/2pi"]]
        g = [TWO_PI * v for v in res["G/2pi"]]
        pairs = [tuple(p) for p in res["coupled_to"]]
        qubit_freq = list(tr["omega/2pi"])
        drive_freq = list(tr["omega_dr/2pi"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed device file: {exc}") from exc
    return TransmonDevice(
        transmon_ids=tuple(range(len(e_c))),
        e_c=tuple(e_c),
        e_j=tuple(e_j),
        qubit_freq=tuple(qubit_freq),
        drive_freq=tuple(drive_freq),
        resonator_ids=tuple(range(len(omega))),
        res_omega=tuple(omega),
        res_g=tuple(g),
        couplings=tuple(pairs),
    )


def reduce_device(dev: TransmonDevice, transmons, resonators) -> TransmonDevice:
    """Sub-device keeping the named transmons and resonators.

    Couplings to dropped transmons disappear; a kept resonator whose
    partners are all dropped becomes an uncoupled mode.
    """
    transmons, resonators = tuple(transmons), tuple(resonators)
    for t in transmons:
        if t not in dev.transmon_ids:
            raise ConfigError(f"transmon {t} not in device")
    for r in resonators:
        if r not in dev.resonator_ids:
            raise ConfigError(f"resonator {r} not in device")
    t_pos = [dev.transmon_ids.index(t) for t in transmons]
    r_pos = [dev.resonator_ids.index(r) for r in resonators]
    return TransmonDevice(
        transmon_ids=transmons,
        e_c=tuple(dev.e_c[i] for i in t_pos),
        e_j=tuple(dev.e_j[i] for i in t_pos),
        qubit_freq=tuple(dev.qubit_freq[i] for i in t_pos),
        drive_freq=tuple(dev.drive_freq[i] for i in t_pos),
        resonator_ids=resonators,
        res_omega=tuple(dev.res_omega[i] for i in r_pos),
        res_g=tuple(dev.res_g[i] for i in r_pos),
        couplings=tuple(
            tuple(q for q in dev.couplings[i] if q in transmons) for i in r_pos
        ),
    )


class TruncatedBasis:
    """Kept eigenenergies and charge matrices, one entry per transmon."""

    __slots__ = ("energies", "n_mats")

    def __init__(self, energies, n_mats):
        if len(energies) != len(n_mats):
            raise ConfigError("energies and charge matrices must pair up")
        for e, m in zip(energies, n_mats):
            e, m = np.asarray(e), np.asarray(m)
            if np.any(np.diff(e) <= 0.0):
                raise DomainError("transmon energies must be strictly increasing")
            if np.max(np.abs(m - m.T)) > 1e-10 or np.max(np.abs(np.diag(m))) > 1e-10:
                raise DomainError("charge matrix must be symmetric with zero diagonal")
        self.energies = tuple(np.asarray(e, dtype=float) for e in energies)
        self.n_mats = tuple(np.asarray(m, dtype=float) for m in n_mats)


def build_basis(device: TransmonDevice, n_charge_max=N_CHARGE) -> TruncatedBasis:
    pairs = [transmon_eigensystem(ec, ej, n_charge_max) for ec, ej in zip(device.e_c, device.e_j)]
    return TruncatedBasis([p[0] for p in pairs], [p[1] for p in pairs])


def _embed(site_mats, device):
    out = np.eye(1)
    for s in range(device.n_sites):
        out = np.kron(out, site_mats.get(s, np.eye(N_LEVELS)))
    return out


def static_hamiltonian(device: TransmonDevice, basis: TruncatedBasis) -> np.ndarray:
    """Dense drive-free Hamiltonian of the joint model (small devices only)."""
    if device.dim > _DENSE_LIMIT:
        raise DomainError(f"dense form limited to dimension {_DENSE_LIMIT}, got {device.dim}")
    n_tr = len(device.transmon_ids)
    h = np.zeros((device.dim, device.dim))
    for s in range(n_tr):
        h += _embed({s: np.diag(basis.energies[s])}, device)
    ladder = fock_ladder()
    number = np.diag(np.arange(float(N_LEVELS)))
    for r in range(len(device.resonator_ids)):
        h += device.res_omega[r] * _embed({n_tr + r: number}, device)
        for q in device.couplings[r]:
            s = device.site_of_transmon(q)
            h += device.res_g[r] * _embed({s: basis.n_mats[s], n_tr + r: ladder}, device)
    return h


def dressed_qubit_freq(device: TransmonDevice, basis: TruncatedBasis, transmon_id) -> float:
    """0 -> 1 transition frequency (GHz) of one transmon in the coupled model.

    Diagonalizes the static joint Hamiltonian and pairs the two dressed
    eigenstates with the largest overlap onto the bare ground state and
    the bare one-excitation state of the given transmon.
    """
    site = device.site_of_transmon(transmon_id)
    vals, vecs = np.linalg.eigh(static_hamiltonian(device, basis))
    ground = int(np.argmax(np.abs(vecs[0, :])))
    excited = int(np.argmax(np.abs(vecs[device.site_stride(site), :])))
    if ground == excited:
        raise DomainError("could not separate dressed ground and excited states")
    return float(vals[excited] - vals[ground]) / TWO_PI
