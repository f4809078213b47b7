"""Spin-qubit register coupled to a random spin ring.

Five always-on qubits with tunable fields and xx couplings realize the
gate set through piecewise-constant Hamiltonian segments, one gate at a
time. N_E environment spins sit on a Heisenberg ring with random bond
couplings, and each qubit attaches to one distinct ring site with
strength scaled by lambda. Propagation uses the Chebyshev kernel, so the
integrator contributes no error; whatever deviation shows up against the
ideal backend is physics.

Bit layout: site 0 (qubit q0) is the most significant bit, ring sites
occupy positions 5..N_E+4, so the five-qubit marginal is a reshape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numba
import numpy as np

from .circuits import PhysicalCircuit, PhysicalOp
from .errors import ConfigError, DomainError
from .numerics import (
    HermitianAction,
    chebyshev_propagate,
    fit_damped_cosine,
    imaginary_time_apply,
)
from .statevector import Distribution

_N_QUBITS = 5
_K_MAGNITUDE = 2.0  # rad/ns
_K_UNIFORM_RANGE = (1.8, 2.2)

# sub-stream tags under the config seed
_STREAM_COUPLINGS = 0
_STREAM_THERMAL = 1


@dataclass(frozen=True)
class SpinBathConfig:
    """Environment realization plus run controls, all derived from seed.

    lam scales the qubit-environment coupling; beta (ns) sets the thermal
    state; bond couplings are uniform in [-j_scale, j_scale] per axis.
    k_mode "fixed" uses |K| = 2 with random signs, "uniform" draws the
    magnitude from [1.8, 2.2] as well.
    """

    lam: float
    beta: float = 1.0
    n_env: int = 5
    j_scale: float = 2.0
    seed: int = 7
    k_mode: str = "fixed"
    n_thermal_samples: int | None = None
    defect_map: tuple[int, ...] = field(init=False)
    env_couplings: tuple[tuple[float, float, float], ...] = field(init=False)
    qubit_env_couplings: tuple[tuple[float, float, float], ...] = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam >= 0.0):
            raise ConfigError(f"lam must be >= 0, got {self.lam!r}")
        if not (math.isfinite(self.beta) and self.beta >= 0.0):
            raise ConfigError(f"beta must be >= 0, got {self.beta!r}")
        if not isinstance(self.n_env, int) or not 5 <= self.n_env <= 27:
            raise ConfigError(f"n_env must be an integer in [5, 27], got {self.n_env!r}")
        if not (math.isfinite(self.j_scale) and self.j_scale > 0.0):
            raise ConfigError(f"j_scale must be > 0, got {self.j_scale!r}")
        if self.k_mode not in ("fixed", "uniform"):
            raise ConfigError(f"k_mode must be 'fixed' or 'uniform', got {self.k_mode!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.n_thermal_samples is None:
            object.__setattr__(
                self, "n_thermal_samples", 1 if self.n_env >= 10 else 10
            )
        if not isinstance(self.n_thermal_samples, int) or self.n_thermal_samples < 1:
            raise ConfigError(
                f"n_thermal_samples must be a positive integer, got {self.n_thermal_samples!r}"
            )

        rng = np.random.default_rng(np.random.SeedSequence([self.seed, _STREAM_COUPLINGS]))
        env = rng.uniform(-self.j_scale, self.j_scale, size=(self.n_env, 3))
        sites = rng.choice(np.arange(5, 5 + self.n_env), size=_N_QUBITS, replace=False)
        signs = 2.0 * rng.integers(0, 2, size=(_N_QUBITS, 3)) - 1.0
        if self.k_mode == "fixed":
            mags = np.full((_N_QUBITS, 3), _K_MAGNITUDE)
        else:
            mags = rng.uniform(*_K_UNIFORM_RANGE, size=(_N_QUBITS, 3))
        object.__setattr__(self, "defect_map", tuple(int(s) for s in sites))
        object.__setattr__(self, "env_couplings", tuple(map(tuple, env.tolist())))
        object.__setattr__(
            self, "qubit_env_couplings", tuple(map(tuple, (signs * mags).tolist()))
        )

    def to_dict(self) -> dict:
        return {
            "lam": self.lam,
            "beta": self.beta,
            "n_env": self.n_env,
            "j_scale": self.j_scale,
            "seed": self.seed,
            "k_mode": self.k_mode,
            "n_thermal_samples": self.n_thermal_samples,
            "defect_map": list(self.defect_map),
            "env_couplings": [list(row) for row in self.env_couplings],
            "qubit_env_couplings": [list(row) for row in self.qubit_env_couplings],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SpinBathConfig":
        """Build from primitive keys; derived arrays are recomputed, not read."""
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        derived = {"defect_map", "env_couplings", "qubit_env_couplings"}
        allowed = {f.name for f in fields(cls)} - derived
        unknown = set(doc) - allowed - derived
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "lam" not in doc:
            raise ConfigError("config needs 'lam'")
        return cls(**{k: v for k, v in doc.items() if k in allowed})


@dataclass(frozen=True)
class GateSegment:
    """One piecewise-constant Hamiltonian interval (fields in rad/ns, ns)."""

    h_x: tuple[float, ...]
    h_z: tuple[float, ...]
    g_x: tuple[tuple[float, ...], ...]
    duration: float

    def __post_init__(self):
        if len(self.h_x) != _N_QUBITS or len(self.h_z) != _N_QUBITS:
            raise DomainError("h_x and h_z must have one entry per qubit")
        if len(self.g_x) != _N_QUBITS or any(len(r) != _N_QUBITS for r in self.g_x):
            raise DomainError("g_x must be 5x5")
        for n in range(_N_QUBITS):
            if self.g_x[n][n] != 0.0:
                raise DomainError("g_x diagonal must vanish")
            for m in range(_N_QUBITS):
                if self.g_x[n][m] != self.g_x[m][n]:
                    raise DomainError("g_x must be symmetric")
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise DomainError(f"duration must be > 0, got {self.duration!r}")


def _segment(duration, h_x=(), h_z=(), g=None):
    hx = [0.0] * _N_QUBITS
    hz = [0.0] * _N_QUBITS
    gx = [[0.0] * _N_QUBITS for _ in range(_N_QUBITS)]
    for n, v in h_x:
        hx[n] = v
    for n, v in h_z:
        hz[n] = v
    if g is not None:
        n, m, v = g
        gx[n][m] = gx[m][n] = v
    return GateSegment(tuple(hx), tuple(hz), tuple(map(tuple, gx)), duration)


def build_segment(op: PhysicalOp) -> list[GateSegment]:
    """Field settings realizing one physical gate, in execution order.

    The single-qubit pulses rotate by pi/2 (pi/4 for S) about their axis;
    the CNOT is an H sandwich on the control around an xx interval of
    duration 10*pi that equals a CZ in the x basis.
    """
    if op.name == "X":
        (n,) = op.qubits
        return [_segment(math.pi / 2, h_x=[(n, 1.0)])]
    if op.name == "Z":
        (n,) = op.qubits
        return [_segment(math.pi / (30 + n), h_z=[(n, 15 + n / 2)])]
    if op.name == "S":
        (n,) = op.qubits
        return [_segment(math.pi / (60 + 2 * n), h_z=[(n, 15 + n / 2)])]
    if op.name == "H":
        (n,) = op.qubits
        h = 15 + n / 2
        return [_segment(math.pi / math.sqrt(2) / (30 + n), h_x=[(n, h)], h_z=[(n, h)])]
    if op.name == "CNOT":
        n, m = op.qubits
        had = build_segment(PhysicalOp("H", (n,)))
        mid = _segment(10 * math.pi, h_x=[(n, -0.025), (m, -0.025)], g=(n, m, 0.025))
        return had + [mid] + had
    raise DomainError(f"no segment table for {op.name!r}")


def circuit_duration(pc: PhysicalCircuit) -> float:
    """Total simulated time of the lowered circuit in ns."""
    return sum(seg.duration for op in pc.ops for seg in build_segment(op))


# ---------------------------------------------------------------------------
# matrix-free Hamiltonian application
#
# Every term is either diagonal (z fields, zz couplings) or a bit-flip
# term psi[i ^ mask] whose coefficient may depend on the parity of the
# two flipped bits (fused xx + yy pair). The overall minus sign of the
# Hamiltonian is folded into the coefficients.


@numba.njit(cache=True)
def _build_diag(dim, z_shift, z_coef, zz_shift_a, zz_shift_b, zz_coef):
    diag = np.zeros(dim)
    for i in range(dim):
        acc = 0.0
        for t in range(z_shift.shape[0]):
            b = (i >> z_shift[t]) & 1
            acc += z_coef[t] * (1.0 - 2.0 * b)
        for t in range(zz_coef.shape[0]):
            p = ((i >> zz_shift_a[t]) ^ (i >> zz_shift_b[t])) & 1
            acc += zz_coef[t] * (1.0 - 2.0 * p)
        diag[i] = acc
    return diag


@numba.njit(cache=True)
def _apply_terms(psi, out, diag, mask0, coef0, mask1, ca1, cb1, sa1, sb1):
    n = psi.shape[0]
    for i in range(n):
        acc = diag[i] * psi[i]
        for t in range(mask0.shape[0]):
            acc += coef0[t] * psi[i ^ mask0[t]]
        for t in range(mask1.shape[0]):
            p = ((i >> sa1[t]) ^ (i >> sb1[t])) & 1
            acc += (ca1[t] + cb1[t] * (2.0 * p - 1.0)) * psi[i ^ mask1[t]]
        out[i] = acc
    return out


class _TermTable:
    """Coefficient arrays for one Hamiltonian; callable as a matvec."""

    def __init__(self, nbits):
        self.nbits = nbits
        self.z = []  # (shift, coef)
        self.zz = []  # (shift_a, shift_b, coef)
        self.flip = []  # (mask, coef)
        self.pair = []  # (mask, shift_a, shift_b, xx_coef, yy_coef)
        self.l1 = 0.0

    def _shift(self, site):
        return self.nbits - 1 - site

    def add_x(self, site, coef):
        if coef != 0.0:
            self.flip.append((1 << self._shift(site), coef))
            self.l1 += abs(coef)

    def add_z(self, site, coef):
        if coef != 0.0:
            self.z.append((self._shift(site), coef))
            self.l1 += abs(coef)

    def add_xx(self, site_a, site_b, coef):
        if coef != 0.0:
            mask = (1 << self._shift(site_a)) | (1 << self._shift(site_b))
            self.flip.append((mask, coef))
            self.l1 += abs(coef)

    def add_pair(self, site_a, site_b, cx, cy, cz):
        """Full sigma.sigma coupling on a site pair, xx and yy fused."""
        sa, sb = self._shift(site_a), self._shift(site_b)
        if cx != 0.0 or cy != 0.0:
            self.pair.append(((1 << sa) | (1 << sb), sa, sb, cx, cy))
        if cz != 0.0:
            self.zz.append((sa, sb, cz))
        self.l1 += abs(cx) + abs(cy) + abs(cz)

    def freeze(self):
        dim = 1 << self.nbits
        z_shift = np.array([s for s, _ in self.z], dtype=np.int64)
        z_coef = np.array([c for _, c in self.z], dtype=np.float64)
        zz_a = np.array([a for a, _, _ in self.zz], dtype=np.int64)
        zz_b = np.array([b for _, b, _ in self.zz], dtype=np.int64)
        zz_c = np.array([c for _, _, c in self.zz], dtype=np.float64)
        diag = _build_diag(dim, z_shift, z_coef, zz_a, zz_b, zz_c)
        mask0 = np.array([m for m, _ in self.flip], dtype=np.int64)
        coef0 = np.array([c for _, c in self.flip], dtype=np.float64)
        mask1 = np.array([row[0] for row in self.pair], dtype=np.int64)
        sa1 = np.array([row[1] for row in self.pair], dtype=np.int64)
        sb1 = np.array([row[2] for row in self.pair], dtype=np.int64)
        ca1 = np.array([row[3] for row in self.pair], dtype=np.float64)
        cb1 = np.array([row[4] for row in self.pair], dtype=np.float64)

        def apply(v, out=None):
            if out is None:
                out = np.empty_like(v)
            return _apply_terms(v, out, diag, mask0, coef0, mask1, ca1, cb1, sa1, sb1)

        bound = self.l1 if self.l1 > 0.0 else 1.0
        return HermitianAction(apply=apply, lo=-bound, hi=bound)


def _add_environment_terms(table: _TermTable, cfg: SpinBathConfig, site_of):
    """Ring bonds, sites mapped through site_of for env-only registers."""
    for b, (jx, jy, jz) in enumerate(cfg.env_couplings):
        u = site_of(5 + b)
        v = site_of(5 + (b + 1) % cfg.n_env)
        table.add_pair(u, v, -jx, -jy, -jz)


def hamiltonian_action(cfg: SpinBathConfig, seg: GateSegment) -> HermitianAction:
    """Matrix-free H = H_Q + H_E + lam * H_QE for one segment.

    All terms enter with an overall minus sign; spectral bounds come from
    the coefficient l1 norm.
    """
    table = _TermTable(_N_QUBITS + cfg.n_env)
    for n in range(_N_QUBITS):
        table.add_x(n, -seg.h_x[n])
        table.add_z(n, -seg.h_z[n])
    for n in range(_N_QUBITS):
        for m in range(n + 1, _N_QUBITS):
            table.add_xx(n, m, -seg.g_x[n][m])
    _add_environment_terms(table, cfg, site_of=lambda s: s)
    if cfg.lam > 0.0:
        for n, (kx, ky, kz) in enumerate(cfg.qubit_env_couplings):
            table.add_pair(
                n, cfg.defect_map[n], -cfg.lam * kx, -cfg.lam * ky, -cfg.lam * kz
            )
    return table.freeze()


_IDLE_SEGMENT = _segment(1.0)


def environment_action(cfg: SpinBathConfig) -> HermitianAction:
    """H_E alone on the 2^N_E ring register (used for thermal preparation)."""
    table = _TermTable(cfg.n_env)
    _add_environment_terms(table, cfg, site_of=lambda s: s - 5)
    return table.freeze()


def thermal_environment(cfg: SpinBathConfig, sample_index: int, beta: float | None = None) -> np.ndarray:
    """Random-vector thermal state of the ring at inverse temperature beta.

    A Gaussian random vector filtered by exp(-beta H_E / 2) represents the
    canonical ensemble up to typicality error ~2^(-N_E/2); sample_index
    selects the realization.
    """
    if beta is None:
        beta = cfg.beta
    if beta < 0.0:
        raise DomainError(f"beta must be >= 0, got {beta!r}")
    rng = np.random.default_rng(
        np.random.SeedSequence([cfg.seed, _STREAM_THERMAL, sample_index])
    )
    dim = 1 << cfg.n_env
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    if beta == 0.0:
        return v
    return imaginary_time_apply(v, environment_action(cfg), beta / 2.0)


def _marginal(p5: np.ndarray, measured: tuple[int, ...]) -> np.ndarray:
    t = p5.reshape((2,) * _N_QUBITS)
    drop = tuple(q for q in range(_N_QUBITS) if q not in measured)
    if drop:
        t = t.sum(axis=drop)
    return t.reshape(-1)


def run_circuit(cfg: SpinBathConfig, pc: PhysicalCircuit) -> Distribution:
    """Run a lowered circuit on the full qubit+ring register.

    Bare circuits still run all five qubits; idle ones feel only their
    environment coupling. The result is the measured-qubit marginal
    averaged over thermal samples.
    """
    segments = [seg for op in pc.ops for seg in build_segment(op)]
    actions = [hamiltonian_action(cfg, seg) for seg in segments]
    dim_env = 1 << cfg.n_env
    acc = np.zeros(32)
    for sample in range(cfg.n_thermal_samples):
        env = thermal_environment(cfg, sample)
        psi = np.zeros(32 * dim_env, dtype=np.complex128)
        psi[:dim_env] = env
        for seg, act in zip(segments, actions):
            psi = chebyshev_propagate(psi, act, seg.duration)
        acc += (np.abs(psi.reshape(32, dim_env)) ** 2).sum(axis=1)
    return Distribution(pc.width, _marginal(acc / cfg.n_thermal_samples, pc.measured_qubits))


def _sigma_x_expectation(psi: np.ndarray, qubit: int, dim_env: int) -> float:
    rows = psi.reshape(32, dim_env)
    mask = 1 << (4 - qubit)
    lower = [q for q in range(32) if not q & mask]
    val = 0.0
    for q in lower:
        val += 2.0 * np.real(np.vdot(rows[q], rows[q ^ mask]))
    return val


def estimate_t2(cfg: SpinBathConfig, qubit: int, window: float, n_samples: int) -> float:
    """Dephasing time of one qubit prepared along +x, all gate fields off.

    Records <sigma_x(t)> at n_samples uniform times across the window,
    averaged over beta=0 thermal realizations, and fits a damped cosine.
    Returns inf when nothing decays (constant signal, or fitted time
    beyond 10x the window).
    """
    if not 0 <= qubit < _N_QUBITS:
        raise DomainError(f"qubit must be in [0, 5), got {qubit!r}")
    if not (math.isfinite(window) and window > 0.0):
        raise DomainError(f"window must be > 0, got {window!r}")
    if n_samples < 8:
        raise DomainError(f"need at least 8 samples, got {n_samples!r}")
    action = hamiltonian_action(cfg, _IDLE_SEGMENT)
    dim_env = 1 << cfg.n_env
    times = np.linspace(0.0, window, n_samples)
    dt = times[1] - times[0]
    signal = np.zeros(n_samples)
    mask = 1 << (4 - qubit)
    for sample in range(cfg.n_thermal_samples):
        env = thermal_environment(cfg, sample, beta=0.0)
        psi = np.zeros(32 * dim_env, dtype=np.complex128)
        psi[:dim_env] = env / math.sqrt(2.0)
        psi[mask * dim_env : (mask + 1) * dim_env] = env / math.sqrt(2.0)
        signal[0] += _sigma_x_expectation(psi, qubit, dim_env)
        for k in range(1, n_samples):
            psi = chebyshev_propagate(psi, action, dt)
            signal[k] += _sigma_x_expectation(psi, qubit, dim_env)
    signal /= cfg.n_thermal_samples
    if np.max(signal) - np.min(signal) < 1e-9:
        return math.inf
    t2 = fit_damped_cosine(times, signal).decay_time
    return math.inf if t2 >= 10.0 * window else t2
