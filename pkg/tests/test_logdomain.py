from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torus_cauchy.errors import OverflowGuard
from torus_cauchy.logdomain import OVERFLOW_GUARD, LogComplex, log_abs_sum, log_sum, wrap_phase

finite = st.floats(-1e3, 1e3, allow_nan=False)
cplx = st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False)


def test_zero_has_canonical_phase():
    z = LogComplex.from_complex(0)
    assert z.is_zero and z.logmag == -math.inf and z.phase == 0.0
    assert z.to_complex() == 0


def test_wrap_phase_range():
    ph = wrap_phase(np.array([-math.pi, math.pi, 3 * math.pi, -3 * math.pi + 1e-9]))
    assert np.all(ph > -math.pi) and np.all(ph <= math.pi)


def test_conversion_refused_past_guard():
    big = LogComplex(OVERFLOW_GUARD + 1.0, 0.0)
    assert not big.convertible
    with pytest.raises(OverflowGuard):
        big.to_complex()


@given(cplx, cplx)
def test_arithmetic_matches_complex(a, b):
    la, lb = LogComplex.from_complex(a), LogComplex.from_complex(b)
    assert cmath.isclose((la * lb).to_complex(), a * b, rel_tol=1e-12, abs_tol=1e-300)
    assert cmath.isclose((la + lb).to_complex(), a + b, rel_tol=1e-9, abs_tol=1e-6 * (abs(a) + abs(b)) + 1e-300)


def test_sum_of_huge_terms_stays_finite():
    lm = np.array([1e5, 1e5])
    ph = np.array([0.0, 0.0])
    got_lm, got_ph = log_sum(lm, ph)
    assert got_ph == 0.0
    assert got_lm == pytest.approx(1e5 + math.log(2), abs=1e-9)
    assert log_abs_sum(lm) == pytest.approx(1e5 + math.log(2), abs=1e-9)
