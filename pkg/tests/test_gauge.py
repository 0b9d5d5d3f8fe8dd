from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torus_cauchy.classifier import classify_spec
from torus_cauchy.errors import TorusCauchyError
from torus_cauchy.gauge import GaugePhase, gauge_forward, gauge_inverse, reduce_to_normal_form
from torus_cauchy.spectral_field import SpectralField, frequency_box
from torus_cauchy.symbol_ode import SymbolSpec, duhamel_coefficient
from torus_cauchy.time_coeffs import Polynomial, constant, zero

from suites import mixed_suite, random_spec


def random_field(rng, dimension=1, truncation=6, t=0.5) -> SpectralField:
    freqs = frequency_box(dimension, truncation)
    vals = rng.normal(size=len(freqs)) + 1j * rng.normal(size=len(freqs))
    return SpectralField.from_mapping(dimension, truncation, t, {tuple(x): v for x, v in zip(freqs, vals)})


def test_phase_vanishes_at_zero():
    rng = np.random.default_rng(1)
    J = GaugePhase(random_spec(rng, 2))(0.0, frequency_box(2, 3))
    assert not np.any(J)


def test_real_spec_keeps_magnitudes():
    spec = SymbolSpec.operator_form(Polynomial([1.0, 2.0]), [Polynomial([0.5, -1.0, 3.0])])
    fld = random_field(np.random.default_rng(2), t=0.7)
    out = gauge_forward(fld, spec)
    assert np.array_equal(out.logmag, fld.logmag)


def test_imaginary_potential_shifts_by_time():
    spec = SymbolSpec.operator_form(zero(), [zero()], constant(1j))
    fld = random_field(np.random.default_rng(3), t=1.0)
    out = gauge_forward(fld, spec)
    shift = float(np.imag(complex(spec.a0.primitive(1.0))))
    assert shift == 1.0
    assert np.max(np.abs(out.logmag - fld.logmag - 1.0)) <= 1e-15


def test_identity_at_time_zero():
    rng = np.random.default_rng(4)
    fld = random_field(rng, t=0.0)
    out = gauge_forward(fld, random_spec(rng))
    assert np.array_equal(out.logmag, fld.logmag) and np.array_equal(out.phase, fld.phase)


def test_zero_field_stays_zero():
    spec = random_spec(np.random.default_rng(5), 2)
    fld = SpectralField.zeros(2, 3, 0.4)
    assert gauge_inverse(gauge_forward(fld, spec), spec).is_zero


def test_single_mode_round_trip():
    spec = SymbolSpec.operator_form(zero(), [zero()], constant(1j))
    fld = SpectralField.from_mapping(1, 4, 0.5, {(3,): 2.0 - 1j})
    back = gauge_inverse(gauge_forward(fld, spec), spec)
    assert abs(back[(3,)].to_complex() - (2.0 - 1j)) <= 1e-13


@given(st.integers(0, 2**31), st.sampled_from([1, 2]), st.floats(0.0, 1.0))
def test_round_trip_identity(seed, dimension, t):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, dimension)
    fld = random_field(rng, dimension, 5, t)
    back = gauge_inverse(gauge_forward(fld, spec), spec)
    assert np.max(np.abs(back.logmag - fld.logmag)) <= 1e-12
    dph = np.angle(np.exp(1j * (back.phase - fld.phase)))
    assert np.max(np.abs(dph)) <= 1e-12


@given(st.integers(0, 2**31), st.sampled_from([1, 2]), st.floats(0.0, 1.0))
def test_magnitude_law(seed, dimension, t):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, dimension)
    fld = random_field(rng, dimension, 5, t)
    out = gauge_forward(fld, spec)
    c0 = GaugePhase(spec).log_shift(t)
    assert c0 == pytest.approx(float(np.imag(complex(spec.a0.primitive(t)))), abs=1e-15)
    assert np.max(np.abs(out.logmag - fld.logmag - c0)) <= 1e-12


def test_reduce_componentwise():
    spec = SymbolSpec.operator_form(constant(3 - 1j), [constant(2 + 5j)], constant(7j))
    nf = reduce_to_normal_form(spec)
    assert complex(nf.a2.eval(0.3)) == -1j
    assert complex(nf.a1[0].eval(0.3)) == 5j
    assert nf.a0.is_zero


def test_reduce_heat_unchanged():
    spec = SymbolSpec.operator_form(constant(-1j), [zero()])
    nf = reduce_to_normal_form(spec)
    for t in np.linspace(0, 1, 5):
        assert complex(nf.a2.eval(t)) == -1j and complex(nf.a1[0].eval(t)) == 0


def _verdict_or_error(spec):
    try:
        return classify_spec(spec)
    except TorusCauchyError as exc:
        return type(exc)


def test_verdict_invariance_random_suite():
    for spec in mixed_suite(42, 50):
        assert _verdict_or_error(spec) == _verdict_or_error(reduce_to_normal_form(spec))


@given(st.integers(0, 2**31), st.integers(-16, 16), st.floats(0.05, 1.0))
def test_conjugation_law(seed, xi, t):
    # u_spec(t) = exp(iJ(t)) u_nf(t) when the normal form is driven by exp(-iJ) f
    rng = np.random.default_rng(seed)
    spec = random_spec(rng)
    nf = reduce_to_normal_form(spec)
    J = GaugePhase(spec)
    g = complex(*rng.normal(size=2))
    c, w = complex(*rng.normal(size=2)), float(rng.uniform(-2, 2))
    f = lambda s: c * np.exp(1j * w * np.asarray(s))  # noqa: E731

    def f_nf(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        phase = np.array([J(float(r), [[xi]])[0] for r in s])
        return f(s) * np.exp(-1j * phase)

    u = duhamel_coefficient(spec, g, f, t, (xi,)).to_complex()
    v = duhamel_coefficient(nf, g, f_nf, t, (xi,)).to_complex()
    mapped = np.exp(1j * J(t, [[xi]])[0]) * v
    assert abs(u - mapped) <= 1e-8 * max(abs(u), 1e-300)
