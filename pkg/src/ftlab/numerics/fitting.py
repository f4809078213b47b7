"""Damped-cosine fitting for decoherence-time extraction.

Model: v(t) = A exp(-t/T2) cos(w t + phi) + c. The frequency landscape
is full of local minima, so the fit first scans 64 candidate
frequencies with a linear (undamped) least-squares solve, then refines
all five parameters with Nelder-Mead from the best candidate, trying
two initial decay scales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import FitError
from .neldermead import nelder_mead

_N_FREQ_CANDIDATES = 64


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    decay_time: float
    frequency: float
    phase: float
    offset: float
    residual: float  # RMS of model minus data


def _model(t, p):
    a, log_t2, w, phi, c = p
    return a * np.exp(-t / math.exp(log_t2)) * np.cos(w * t + phi) + c


def _scan_frequency(t, v):
    """Best (w, amplitude, phase, offset) over undamped linear fits."""
    span = t[-1] - t[0]
    dt = np.median(np.diff(t))
    w_max = math.pi / dt  # Nyquist
    best = None
    for w in np.linspace(0.0, w_max, _N_FREQ_CANDIDATES):
        basis = np.column_stack([np.cos(w * t), np.sin(w * t), np.ones_like(t)])
        coef, *_ = np.linalg.lstsq(basis, v, rcond=None)
        ssr = float(np.sum((basis @ coef - v) ** 2))
        if best is None or ssr < best[0]:
            best = (ssr, w, coef)
    _, w, (a_cos, a_sin, c) = best
    amp = math.hypot(a_cos, a_sin)
    phi = math.atan2(-a_sin, a_cos)
    if amp == 0.0:
        amp = float(np.std(v)) or 1.0
    return w, amp, phi, float(c), span


def fit_damped_cosine(times, values) -> FitResult:
    """Fit A exp(-t/T2) cos(w t + phi) + c to (times, values)."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise FitError("times and values must be 1-D arrays of equal length")
    if t.size < 8:
        raise FitError(f"need at least 8 samples, got {t.size}")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
        raise FitError("times and values must be finite")
    if np.ptp(t) <= 0.0:
        raise FitError("times must span a nonzero window")
    if np.ptp(v) == 0.0:
        raise FitError("values are constant; nothing to fit")

    order = np.argsort(t, kind="stable")
    t, v = t[order], v[order]
    w0, a0, phi0, c0, span = _scan_frequency(t, v)

    def objective(p):
        return float(np.sum((_model(t, p) - v) ** 2))

    best = None
    for t2_init in (span, span / 4.0):
        x0 = np.array([a0, math.log(t2_init), w0, phi0, c0])
        res = nelder_mead(
            objective,
            x0,
            max_iters=2000,
            simplex_init_scale=np.array([0.3, 0.4, 0.15 if w0 != 0.0 else 0.3, 0.4, 0.3]),
            tol_f=1e-16,
            tol_x=1e-10,
        )
        if best is None or res.fun < best.fun:
            best = res

    a, log_t2, w, phi, c = best.x
    # canonical form: positive amplitude, non-negative frequency, phase in (-pi, pi]
    if a < 0.0:
        a, phi = -a, phi + math.pi
    if w < 0.0:
        w, phi = -w, -phi
    phi = math.remainder(phi, 2.0 * math.pi)
    return FitResult(
        amplitude=float(a),
        decay_time=float(math.exp(log_t2)),
        frequency=float(w),
        phase=float(phi),
        offset=float(c),
        residual=float(math.sqrt(best.fun / t.size)),
    )
