"""Numerical workhorses: Bessel sequences, Chebyshev propagation,
Nelder-Mead minimization, and damped-cosine fitting."""

from .bessel import bessel_i_scaled_sequence, bessel_j_sequence
from .chebyshev import HermitianAction, chebyshev_propagate, imaginary_time_apply
from .fitting import FitResult, fit_damped_cosine
from .neldermead import NelderMeadResult, nelder_mead

__all__ = [
    "FitResult",
    "HermitianAction",
    "NelderMeadResult",
    "bessel_i_scaled_sequence",
    "bessel_j_sequence",
    "chebyshev_propagate",
    "fit_damped_cosine",
    "imaginary_time_apply",
    "nelder_mead",
]
