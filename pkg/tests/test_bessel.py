import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftlab.errors import DomainError
from ftlab.numerics import bessel_i_scaled_sequence, bessel_j_sequence

mpmath.mp.dps = 30


def _besselj_oracle(x, k):
    # power series summed in high-precision arithmetic, independent of any
    # recurrence; needs ~x extra digits to absorb the series' cancellation
    with mpmath.workdps(40 + int(x)):
        total = mpmath.mpf(0)
        term_k = 0
        while True:
            term = (-1) ** term_k * mpmath.mpf(x) ** (2 * term_k + k) / (
                mpmath.mpf(2) ** (2 * term_k + k)
                * mpmath.factorial(term_k)
                * mpmath.factorial(term_k + k)
            )
            total += term
            if abs(term) < mpmath.mpf(10) ** (-30) and term_k > x:
                return float(total)
            term_k += 1


def test_values_against_power_series_oracle():
    # frozen spot values (power-series oracle, 30 digits)
    assert bessel_j_sequence(1.0, 1)[0] == pytest.approx(0.7651976865579666, abs=1e-15)
    assert bessel_j_sequence(1.0, 1)[1] == pytest.approx(0.4400505857449335, abs=1e-15)
    for x in (0.1, 0.5, 2.0, 7.3, 20.0, 50.0):
        seq = bessel_j_sequence(x, 40)
        for k in (0, 1, 5, 17, 40):
            assert seq[k] == pytest.approx(_besselj_oracle(x, k), abs=1e-14), (x, k)


def test_large_order_and_argument():
    # propagation of circuit segments reaches z of a few thousand; check
    # against mpmath's asymptotic-series evaluation (independent algorithm)
    seq = bessel_j_sequence(300.0, 400)
    assert np.all(np.isfinite(seq))
    for k in (0, 3, 150, 330, 400):
        assert seq[k] == pytest.approx(float(mpmath.besselj(k, 300.0)), abs=1e-13), k
    seq = bessel_j_sequence(2000.0, 2100)
    for k in (0, 1999, 2100):
        assert seq[k] == pytest.approx(float(mpmath.besselj(k, 2000.0)), abs=1e-13), k


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.1, max_value=50.0))
def test_three_term_recurrence(x):
    seq = bessel_j_sequence(x, 25)
    k = np.arange(1, 25)
    lhs = seq[:-2] + seq[2:]
    rhs = 2.0 * k / x * seq[1:-1]
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_x_zero():
    seq = bessel_j_sequence(0.0, 5)
    assert seq[0] == 1.0
    assert np.all(seq[1:] == 0.0)


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_j_sequence(float("nan"), 3)
    with pytest.raises(DomainError):
        bessel_j_sequence(float("inf"), 3)
    with pytest.raises(DomainError):
        bessel_j_sequence(-1.0, 3)
    with pytest.raises(DomainError):
        bessel_j_sequence(1.0, -1)


def test_scaled_modified_bessel_against_mpmath():
    for x in (0.3, 1.0, 10.0, 120.0, 700.0):
        seq = bessel_i_scaled_sequence(x, 30)
        for k in (0, 1, 4, 15, 30):
            ref = float(mpmath.besseli(k, x) * mpmath.exp(-x))
            assert seq[k] == pytest.approx(ref, abs=1e-14), (x, k)


def test_scaled_modified_bessel_no_overflow():
    # e^-x I_k stays bounded even where I_k itself would overflow float64
    seq = bessel_i_scaled_sequence(50000.0, 10)
    assert np.all(np.isfinite(seq))
    assert 0.0 < seq[0] < 1.0
