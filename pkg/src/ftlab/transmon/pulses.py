"""Microwave pulse shapes and the per-gate parameter library.

A pulse drives the charge offset n_g(t) of one transmon. Gaussian pulses
carry an optional derivative quadrature (set by drag) that suppresses
leakage into the second excited level; flat-top pulses rise and fall on
half-Gaussians and are used for the cross-resonance segments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from ..errors import ConfigError, DomainError

#: flat-top rise/fall length and width, ns
FLATTOP_RAMP = 15.0
_FLATTOP_SIGMA = 5.0

_SHAPES = ("gaussian", "flattop")


@dataclass(frozen=True)
class Pulse:
    shape: str
    amplitude: float
    duration: float  # ns
    sigma: float  # ns
    freq: float  # GHz carrier
    phase: float = 0.0  # rad
    drag: float = 0.0  # ns, derivative-quadrature weight

    def __post_init__(self):
        if self.shape not in _SHAPES:
            raise DomainError(f"unknown pulse shape {self.shape!r}")
        if self.duration <= 0.0 or self.sigma <= 0.0:
            raise DomainError("pulse duration and width must be positive")
        if self.freq <= 0.0:
            raise DomainError("carrier frequency must be positive")
        if self.shape == "flattop":
            if self.drag != 0.0:
                raise DomainError("flat-top pulses carry no derivative quadrature")
            if self.duration <= 2.0 * FLATTOP_RAMP:
                raise DomainError("flat-top duration must exceed the two ramps")


def gaussian_pulse(amplitude, freq, duration=80.0, phase=0.0, drag=0.0, sigma=None) -> Pulse:
    if sigma is None:
        sigma = duration / 4.0
    return Pulse("gaussian", amplitude, duration, sigma, freq, phase, drag)


def flattop_pulse(amplitude, freq, t_flat, phase=0.0) -> Pulse:
    if t_flat <= 0.0:
        raise DomainError("flat-top hold time must be positive")
    return Pulse("flattop", amplitude, 2.0 * FLATTOP_RAMP + t_flat, _FLATTOP_SIGMA, freq, phase)


def envelope(p: Pulse, t):
    """Carrier-free envelope at time(s) t measured from pulse start."""
    t = np.asarray(t, dtype=float)
    if p.shape == "gaussian":
        # baseline-subtracted so the endpoints are zero, renormalized so
        # the peak stays at the nominal amplitude; tabulated amplitudes
        # assume this scaling (a quarter-period area at the listed value)
        base = math.exp(-p.duration**2 / (8.0 * p.sigma**2))
        peak = p.amplitude / (1.0 - base)
        return peak * (np.exp(-((t - 0.5 * p.duration) ** 2) / (2.0 * p.sigma**2)) - base)
    rise_end = FLATTOP_RAMP
    fall_start = p.duration - FLATTOP_RAMP
    out = np.ones_like(t)
    out = np.where(t < rise_end, np.exp(-((t - rise_end) ** 2) / (2.0 * p.sigma**2)), out)
    out = np.where(t > fall_start, np.exp(-((t - fall_start) ** 2) / (2.0 * p.sigma**2)), out)
    return p.amplitude * out


def envelope_dot(p: Pulse, t):
    t = np.asarray(t, dtype=float)
    if p.shape == "gaussian":
        base = math.exp(-p.duration**2 / (8.0 * p.sigma**2))
        peak = p.amplitude / (1.0 - base)
        center = t - 0.5 * p.duration
        return peak * (-center / p.sigma**2) * np.exp(-(center**2) / (2.0 * p.sigma**2))
    return np.zeros_like(t)


def pulse_waveform(p: Pulse, t):
    """n_g contribution of the pulse at time(s) t from its start."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > p.duration):
        raise DomainError("time outside the pulse window")
    carrier = 2.0 * math.pi * p.freq * t_arr - p.phase
    w = envelope(p, t_arr) * np.cos(carrier)
    if p.drag != 0.0:
        w = w + p.drag * envelope_dot(p, t_arr) * np.cos(carrier - 0.5 * math.pi)
    return w if isinstance(t, np.ndarray) else float(w)


@dataclass(frozen=True)
class CnotParams:
    """Echoed cross-resonance parameter set for one (control, target) pair."""

    f_c: float  # GHz
    f_t: float
    t_cr: float  # ns flat section
    t_x: float  # ns single-qubit pulse length
    omega_cr: float
    omega_c: float
    beta_c: float
    omega_t: float
    beta_t: float

    def __post_init__(self):
        if self.t_cr <= 0.0 or self.t_x <= 0.0:
            raise DomainError("pulse durations must be positive")


@dataclass(frozen=True)
class PulseLibrary:
    """Optimized pulse parameters keyed by transmon / transmon pair."""

    name: str
    xpih: dict
    cnot: dict

    def xpih_pulse(self, qubit) -> Pulse:
        if qubit not in self.xpih:
            raise ConfigError(f"no xpih entry for transmon {qubit} in set {self.name!r}")
        return self.xpih[qubit]

    def cnot_params(self, control, target) -> CnotParams:
        if (control, target) not in self.cnot:
            raise ConfigError(f"no cnot entry for pair {control}-{target} in set {self.name!r}")
        return self.cnot[(control, target)]


def _pulse_text(source):
    if source is not None:
        with open(source, "r", encoding="utf-8") as fh:
            return fh.read()
    return resources.files("ftlab.data").joinpath("transmon_pulses.json").read_text("utf-8")


def load_pulse_library(gate_set="plain", source=None) -> PulseLibrary:
    """Load one named gate set ("plain" or "withf") from a pulse file."""
    try:
        doc = json.loads(_pulse_text(source))
        block = doc[gate_set]
        xpih = {}
        for key, row in block["xpih"].items():
            xpih[int(key)] = gaussian_pulse(
                amplitude=row["Omega_X"],
                freq=row["f"],
                duration=row["T_X"],
                drag=row["beta_X"],
            )
        cnot = {}
        for key, row in block["cnot"].items():
            c, t = (int(v) for v in key.split("-"))
            cnot[(c, t)] = CnotParams(
                f_c=row["f_C"],
                f_t=row["f_T"],
                t_cr=row["T_CR"],
                t_x=row["T_X"],
                omega_cr=row["Omega_CR"],
                omega_c=row["Omega_C"],
                beta_c=row["beta_C"],
                omega_t=row["Omega_T"],
                beta_t=row["beta_T"],
            )
    except KeyError as exc:
        raise ConfigError(f"pulse file lacks entry {exc}") from exc
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed pulse file: {exc}") from exc
    # carrier consistency: CNOT rows must drive at the single-qubit frequencies
    for (c, t), par in cnot.items():
        if c in xpih and not math.isclose(par.f_c, xpih[c].freq, abs_tol=1e-9):
            raise ConfigError(f"cnot {c}-{t} control frequency disagrees with xpih-{c}")
        if t in xpih and not math.isclose(par.f_t, xpih[t].freq, abs_tol=1e-9):
            raise ConfigError(f"cnot {c}-{t} target frequency disagrees with xpih-{t}")
    return PulseLibrary(name=gate_set, xpih=xpih, cnot=cnot)


def with_phase(p: Pulse, phase) -> Pulse:
    return replace(p, phase=float(phase) % (2.0 * math.pi))
