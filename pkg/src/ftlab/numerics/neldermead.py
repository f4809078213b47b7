"""Deterministic Nelder-Mead simplex minimization.

Coefficients are fixed at (reflection, expansion, contraction, shrink) =
(1, 2, 0.5, 0.5). Vertices are ordered with a stable sort, so the result
is a pure function of x0 and the options.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError

_ALPHA, _GAMMA, _RHO, _SIGMA = 1.0, 2.0, 0.5, 0.5


@dataclass(frozen=True)
class NelderMeadResult:
    x: np.ndarray
    fun: float
    iterations: int
    n_evals: int
    converged: bool


def _call(f, x, counter):
    counter[0] += 1
    v = f(x)
    v = float(v)
    return v if np.isfinite(v) else np.inf


def nelder_mead(
    f,
    x0,
    *,
    max_iters: int = 1000,
    simplex_init_scale=0.1,
    tol_f: float = 1e-12,
    tol_x: float = 1e-12,
    callback=None,
) -> NelderMeadResult:
    """Minimize f from x0.

    The initial simplex offsets vertex i by simplex_init_scale[i] *
    max(|x0[i]|, 1) along coordinate i (scalar scale applies to every
    coordinate). Non-finite f during the search is treated as +inf; a
    non-finite f(x0) is an error. callback(iteration, x_best, f_best),
    when given, runs once per iteration.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1 or x0.size == 0:
        raise DomainError("x0 must be a non-empty 1-D array")
    if not np.all(np.isfinite(x0)):
        raise DomainError("x0 must be finite")
    n = x0.size
    scale = np.broadcast_to(np.asarray(simplex_init_scale, dtype=float), (n,))
    if not np.all(np.isfinite(scale)) or np.any(scale == 0.0):
        raise DomainError("simplex_init_scale must be finite and nonzero")

    counter = [0]
    f0 = _call(f, x0, counter)
    if not np.isfinite(f0):
        raise DomainError("f(x0) is not finite")

    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] += scale[i] * max(abs(x0[i]), 1.0)
    values = np.array([f0] + [_call(f, simplex[i + 1], counter) for i in range(n)])

    iterations = 0
    converged = False
    while iterations < max_iters:
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        if callback is not None:
            callback(iterations, simplex[0], values[0])
        # both must hold: equal values on opposite sides of a minimum would
        # otherwise stop the search with a wide simplex
        f_spread = values[-1] - values[0] if np.all(np.isfinite(values)) else np.inf
        x_spread = np.max(np.abs(simplex[1:] - simplex[0]))
        if f_spread <= tol_f and x_spread <= tol_x:
            converged = True
            break
        iterations += 1

        centroid = simplex[:-1].mean(axis=0)
        x_r = centroid + _ALPHA * (centroid - simplex[-1])
        f_r = _call(f, x_r, counter)
        if f_r < values[0]:
            x_e = centroid + _GAMMA * (x_r - centroid)
            f_e = _call(f, x_e, counter)
            if f_e < f_r:
                simplex[-1], values[-1] = x_e, f_e
            else:
                simplex[-1], values[-1] = x_r, f_r
        elif f_r < values[-2]:
            simplex[-1], values[-1] = x_r, f_r
        else:
            if f_r < values[-1]:
                x_c = centroid + _RHO * (x_r - centroid)
            else:
                x_c = centroid + _RHO * (simplex[-1] - centroid)
            f_c = _call(f, x_c, counter)
            if f_c < min(f_r, values[-1]):
                simplex[-1], values[-1] = x_c, f_c
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + _SIGMA * (simplex[i] - simplex[0])
                    values[i] = _call(f, simplex[i], counter)

    order = np.argsort(values, kind="stable")
    simplex, values = simplex[order], values[order]
    return NelderMeadResult(
        x=simplex[0].copy(),
        fun=float(values[0]),
        iterations=iterations,
        n_evals=counter[0],
        converged=converged,
    )
