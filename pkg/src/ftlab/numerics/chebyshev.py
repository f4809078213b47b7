"""Chebyshev expansion of exp(-i t H) and exp(-s H) for matrix-free H.

The Hamiltonian enters only through a matvec callback plus spectral
bounds [lo, hi]. With H~ = (2H - (hi+lo)) / (hi-lo) and z = t*(hi-lo)/2,

    exp(-i t H) = exp(-i t (hi+lo)/2) *
                  sum_k (2 - delta_k0) (-i sgn z)^k J_k(|z|) T_k(H~)

and the T_k(H~)|psi> follow from the two-term recurrence, one matvec per
order. Truncation: the sum stops at the first k >= |z| where
|J_k(|z|)| < tol/10 holds for 5 consecutive orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import DomainError, NumericsError
from .bessel import bessel_i_scaled_sequence, bessel_j_sequence

#: run length of below-threshold Bessel magnitudes required to truncate
_TAIL_RUN = 5


@dataclass(frozen=True)
class HermitianAction:
    """Matrix-free Hermitian operator: a matvec plus spectral bounds.

    apply(v, out=None) must return H v (writing into out when given).
    lo/hi bound the spectrum; looser bounds cost extra matvecs but not
    accuracy.
    """

    apply: Callable[..., np.ndarray]
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError("spectral bounds must be finite")
        if self.hi <= self.lo:
            raise DomainError(f"need hi > lo, got [{self.lo}, {self.hi}]")


def _truncation_order(coeffs: np.ndarray, scan_from: int, tol: float) -> int | None:
    """First k >= scan_from opening a run of _TAIL_RUN magnitudes below tol/10."""
    thresh = tol / 10.0
    run = 0
    for k in range(scan_from, coeffs.size):
        run = run + 1 if abs(coeffs[k]) < thresh else 0
        if run == _TAIL_RUN:
            return k - _TAIL_RUN + 1
    return None


def _bessel_tail(z: float, tol: float, kind: str) -> tuple[np.ndarray, int]:
    """Bessel sequence long enough to contain the truncation run.

    J_k(z) only starts decaying past the turning point k ~ z, so that scan
    starts at ceil(z); the scaled I_k(z) decrease monotonically from k = 0.
    """
    scan_from = int(math.ceil(z)) if kind == "j" else 0
    margin = max(40, int(8.0 * z ** (1.0 / 3.0)) + 20) if z > 0 else 40
    for _ in range(6):
        k_hi = int(math.ceil(z)) + margin
        seq = bessel_j_sequence(z, k_hi) if kind == "j" else bessel_i_scaled_sequence(z, k_hi)
        order = _truncation_order(seq, scan_from, tol)
        if order is not None:
            return seq, order
        margin *= 2
    raise NumericsError(f"Bessel tail did not fall below {tol / 10:g} (z={z:g})")


def chebyshev_propagate(state: np.ndarray, h: HermitianAction, t: float, tol: float = 1e-12) -> np.ndarray:
    """Return exp(-i t H) state without renormalizing.

    Unitarity of the result (norm drift below ~tol) is the accuracy
    check; callers asserting norms catch wrong spectral bounds.
    """
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t!r}")
    center = 0.5 * (h.hi + h.lo)
    half_width = 0.5 * (h.hi - h.lo)
    z = t * half_width
    sign = 1.0 if z >= 0.0 else -1.0

    psi = np.asarray(state, dtype=np.complex128).copy()
    if z == 0.0:
        return psi * np.exp(-1j * t * center)

    bess, order = _bessel_tail(abs(z), tol, "j")
    # c_k = (2 - delta_k0) (-i sign)^k J_k(|z|); fold in exp(-i t center) at the end
    phases = (-1j * sign) ** np.arange(order + 1)
    coeffs = 2.0 * phases * bess[: order + 1]
    coeffs[0] *= 0.5

    p_prev = psi                      # T_0 psi
    hp = h.apply(p_prev, out=np.empty_like(psi))
    p_cur = (hp - center * p_prev) / half_width   # T_1 psi
    result = coeffs[0] * p_prev + coeffs[1] * p_cur
    for k in range(2, order + 1):
        hp = h.apply(p_cur, out=hp)
        # p_next = (2/w)(H p_cur - c p_cur) - p_prev, reusing p_prev's buffer
        hp *= 2.0 / half_width
        if center != 0.0:
            hp -= (2.0 * center / half_width) * p_cur
        p_prev *= -1.0
        p_prev += hp
        p_prev, p_cur = p_cur, p_prev
        result += coeffs[k] * p_cur
    result *= np.exp(-1j * t * center)
    return result


def imaginary_time_apply(state: np.ndarray, h: HermitianAction, s: float, tol: float = 1e-12) -> np.ndarray:
    """Return exp(-s H) state / ||exp(-s H) state|| for s >= 0.

    Uses e^{-u y} = I_0(u) + 2 sum_k (-1)^k I_k(u) T_k(y) with scaled
    modified Bessel coefficients, so only the direction of the result is
    meaningful; the (positive) overall scale is divided out anyway.
    """
    if not math.isfinite(s) or s < 0.0:
        raise DomainError(f"imaginary time must be finite and >= 0, got {s!r}")
    psi = np.asarray(state, dtype=np.complex128).copy()
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise DomainError("cannot normalize the zero vector")
    if s == 0.0:
        return psi / norm

    psi /= norm
    # Split long imaginary times: one step of scaled time u suppresses the
    # top of the spectrum by e^{-2u}, which must stay well above float
    # noise or the renormalized direction is garbage.
    half_width = 0.5 * (h.hi - h.lo)
    steps = max(1, math.ceil(s * half_width / 12.0))
    for _ in range(steps):
        psi = _imaginary_step(psi, h, s / steps, tol)
    return psi


def _imaginary_step(psi: np.ndarray, h: HermitianAction, s: float, tol: float) -> np.ndarray:
    center = 0.5 * (h.hi + h.lo)
    half_width = 0.5 * (h.hi - h.lo)
    u = s * half_width
    bess, order = _bessel_tail(u, tol, "i")
    signs = (-1.0) ** np.arange(order + 1)
    coeffs = 2.0 * signs * bess[: order + 1]
    coeffs[0] *= 0.5

    p_prev = psi
    hp = h.apply(p_prev, out=np.empty_like(psi))
    p_cur = (hp - center * p_prev) / half_width
    result = coeffs[0] * p_prev + coeffs[1] * p_cur
    for k in range(2, order + 1):
        hp = h.apply(p_cur, out=hp)
        hp *= 2.0 / half_width
        if center != 0.0:
            hp -= (2.0 * center / half_width) * p_cur
        p_prev *= -1.0
        p_prev += hp
        p_prev, p_cur = p_cur, p_prev
        result += coeffs[k] * p_cur
    norm = np.linalg.norm(result)
    if not np.isfinite(norm) or norm < 1e-280:
        raise NumericsError("imaginary-time propagation underflowed; reduce s or tighten bounds")
    return result / norm
