from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torus_cauchy.errors import InsufficientData, MalformedStructure
from torus_cauchy.logdomain import LogComplex
from torus_cauchy.spectral_field import (
    DataSpec,
    ExponentialDecay,
    GevreyDecay,
    SingleMode,
    SpectralField,
    Table,
    Zero,
    frequency_box,
    gevrey_fit,
    read_field_csv,
    sobolev_norm,
    solve_cauchy,
    synthesize,
    write_field_csv,
)
from torus_cauchy.symbol_ode import SymbolSpec
from torus_cauchy.time_coeffs import constant, zero


def heat1() -> SymbolSpec:
    return SymbolSpec.operator_form(constant(-1j), [zero()])


def random_field(seed: int, dimension: int = 1, truncation: int = 8) -> SpectralField:
    rng = np.random.default_rng(seed)
    freqs = frequency_box(dimension, truncation)
    vals = rng.normal(size=len(freqs)) + 1j * rng.normal(size=len(freqs))
    return SpectralField.from_mapping(dimension, truncation, 0.0, {tuple(x): v for x, v in zip(freqs, vals)})


def synthetic(s: float, delta: float, truncation: int = 256) -> SpectralField:
    return solve_cauchy(SymbolSpec.operator_form(zero(), [zero()]), DataSpec(GevreyDecay(delta, s)), [0.0],
                        truncation)[0]


# -- storage ---------------------------------------------------------------------


def test_frequency_box_is_lexicographic():
    box = frequency_box(2, 1)
    assert [tuple(x) for x in box][:3] == [(-1, -1), (-1, 0), (-1, 1)]
    assert len(box) == 9


def test_missing_entries_are_zero():
    fld = SpectralField.from_mapping(1, 4, 0.0, {(2,): 1.0})
    assert fld[(3,)].is_zero and fld[(2,)].to_complex() == 1.0


def test_truncation_enforced():
    with pytest.raises(MalformedStructure):
        SpectralField.from_mapping(1, 2, 0.0, {(3,): 1.0})


def test_field_is_read_only():
    fld = random_field(0)
    with pytest.raises(ValueError):
        fld.logmag[0] = 0.0


# -- solve_cauchy ----------------------------------------------------------------


def test_heat_solution():
    fld = solve_cauchy(heat1(), DataSpec(Table({(k,): 1.0 for k in range(-8, 9)})), [1.0], 8)[0]
    xi = fld.frequencies[:, 0].astype(float)
    assert np.allclose(fld.logmag, -(xi**2), atol=1e-13)


def test_parabolic_bound():
    spec = SymbolSpec.normal_form(constant(-1.0), [constant(1.0)])
    data = DataSpec(GevreyDecay(1.0, 1.0))
    fields = solve_cauchy(spec, data, [0.25, 0.5, 1.0], 32)
    g = data.g.log_values(fields[0].frequencies)[0]
    xi = np.abs(fields[0].frequencies[:, 0])
    L = float(np.max(-(xi**2) + xi))
    for fld in fields:
        assert np.max(fld.logmag) <= L * fld.timestamp + np.max(g) + 1e-12


def test_zero_data_gives_zero_field():
    for fld in solve_cauchy(heat1(), DataSpec(), [0.0, 0.5, 1.0], 6):
        assert fld.is_zero


@given(st.integers(0, 2**31))
def test_time_zero_reproduces_data(seed):
    rng = np.random.default_rng(seed)
    gen = GevreyDecay(float(rng.uniform(0.2, 3.0)), float(rng.uniform(1.0, 4.0)), amplitude=complex(*rng.normal(size=2)))
    spec = SymbolSpec.operator_form(constant(complex(*rng.normal(size=2))), [constant(complex(*rng.normal(size=2)))])
    fld = solve_cauchy(spec, DataSpec(gen, ExponentialDecay(1.0)), [0.0], 6)[0]
    lm, ph = gen.log_values(fld.frequencies)
    assert np.array_equal(fld.logmag, lm)
    assert np.array_equal(fld.phase, np.where(np.isfinite(lm), ph, 0.0))


def test_forced_solve_independent_of_workers():
    spec = SymbolSpec.normal_form(constant(-1.0), [constant(0.5)])
    data = DataSpec(SingleMode((3,), 1.0), ExponentialDecay(2.0))
    a = solve_cauchy(spec, data, [0.5], 6, workers=1)[0]
    b = solve_cauchy(spec, data, [0.5], 6, workers=4)[0]
    assert np.array_equal(a.logmag, b.logmag) and np.array_equal(a.phase, b.phase)


# -- sobolev_norm ------------------------------------------------------------------


def test_sobolev_single_mode():
    fld = SpectralField.from_mapping(2, 5, 0.0, {(3, 4): 2.0})
    assert sobolev_norm(fld, 1.0) == pytest.approx(12.0, rel=1e-15)


def test_sobolev_zero_field():
    assert sobolev_norm(SpectralField.zeros(2, 3), 2.5) == 0.0


def test_sobolev_matches_direct_sum():
    fld = solve_cauchy(heat1(), DataSpec(ExponentialDecay(1.0)), [0.0], 64)[0]
    direct = math.sqrt(sum(math.exp(-2 * abs(k)) for k in range(-64, 65)))
    assert sobolev_norm(fld, 0.0) == pytest.approx(direct, rel=1e-12)


def test_sobolev_overflow_is_infinite():
    fld = SpectralField(1, 1, 0.0, np.array([[1]]), np.array([1e6]), np.array([0.0]))
    assert sobolev_norm(fld, 0.0) == math.inf


@given(st.integers(0, 2**31), st.floats(-3, 3), st.floats(-3, 3))
def test_norm_monotone_in_r(seed, r1, r2):
    fld = random_field(seed, 2, 4)
    lo, hi = sorted((r1, r2))
    assert sobolev_norm(fld, hi) >= sobolev_norm(fld, lo) * (1 - 1e-14)


# -- gevrey_fit ------------------------------------------------------------------------


def test_fit_gevrey_two():
    fit = gevrey_fit(synthetic(2.0, 2.0))
    assert fit.s_hat == pytest.approx(2.0, abs=0.02)
    assert fit.delta_hat == pytest.approx(2.0, abs=0.04)
    assert fit.admissible


def test_fit_analytic():
    fit = gevrey_fit(synthetic(1.0, 3.0))
    assert fit.s_hat == pytest.approx(1.0, abs=0.02)
    assert fit.delta_hat == pytest.approx(3.0, abs=0.06)


def test_fit_heat_solution_clamps():
    fld = solve_cauchy(heat1(), DataSpec(ExponentialDecay(1.0)), [1.0], 64)[0]
    fit = gevrey_fit(fld)
    assert fit.s_hat == pytest.approx(1.0, abs=1e-6)
    assert not fit.admissible and fit.diagnostic == "clamped"


def test_fit_growing_field_flags_positive_slope():
    k = np.arange(-16, 17)
    fld = SpectralField(1, 16, 0.0, k[:, None], 0.5 * np.abs(k).astype(float), np.zeros(k.size))
    fit = gevrey_fit(fld)
    assert not fit.admissible and fit.diagnostic == "positive-slope"


def test_fit_needs_samples():
    with pytest.raises(InsufficientData):
        gevrey_fit(SpectralField.from_mapping(1, 4, 0.0, {(1,): 1.0, (2,): 0.5}))


def test_fit_reports_worst_ray():
    fld = solve_cauchy(SymbolSpec.operator_form(zero(), [zero(), zero()]),
                       DataSpec(Table({**{(k, 0): math.exp(-abs(k)) for k in range(-32, 33)},
                                       **{(0, k): math.exp(-abs(k) ** 0.5) for k in range(-32, 33) if k}})),
                       [0.0], 32)[0]
    fit = gevrey_fit(fld, rays=[(1, 0), (0, 1)])
    assert fit.ray == (0, 1) and fit.s_hat == pytest.approx(2.0, abs=0.02)


# -- synthesize ---------------------------------------------------------------------------


def test_synthesize_single_mode():
    fld = SpectralField.from_mapping(1, 1, 0.0, {(1,): 1.0})
    assert np.allclose(synthesize(fld, 4), [1, 1j, -1, -1j], atol=1e-15)


def test_synthesize_zero():
    assert not np.any(synthesize(SpectralField.zeros(2, 3), 8))


@given(st.integers(0, 2**31), st.sampled_from([1, 2]))
def test_parseval(seed, dimension):
    trunc = 8 if dimension == 1 else 5
    fld = random_field(seed, dimension, trunc)
    u = synthesize(fld, 64 if dimension == 1 else 16)
    assert np.mean(np.abs(u) ** 2) == pytest.approx(sobolev_norm(fld, 0.0) ** 2, rel=1e-10)


# -- CSV ------------------------------------------------------------------------------------


def test_csv_round_trip(tmp_path):
    fld = random_field(5, 2, 3)
    fld = fld.replace_values(np.where(np.arange(len(fld)) % 5 == 0, -np.inf, fld.logmag), fld.phase)
    path = tmp_path / "f.csv"
    write_field_csv(fld, path)
    text = path.read_text()
    assert text.splitlines()[0] == "xi_1,xi_2,logmag,phase"
    assert "-inf" in text and "\r" not in text
    back = read_field_csv(path)
    assert np.array_equal(back.frequencies, fld.frequencies)
    assert np.array_equal(back.logmag, fld.logmag) and np.array_equal(back.phase, fld.phase)


def test_logcomplex_values_compare():
    fld = random_field(2)
    for xi, v in fld.items():
        assert isinstance(v, LogComplex)
        assert v == fld[xi]
    assert isinstance(Zero().value((1,)), LogComplex)
