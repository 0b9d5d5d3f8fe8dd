"""Per-frequency gauge that strips real parts of the symbol.

With ``B`` the primitives of the real parts of ``a2, a1_j`` and ``A0`` the
full primitive of ``a0``, the phase

    J(t, xi) = -B2(t)|xi|^2 - sum_j B1_j(t) xi_j - A0(t)

satisfies ``u_spec = exp(iJ) u_nf`` when ``u_nf`` solves the normal-form
problem with forcing ``exp(-iJ) f``.  Only ``A0`` has an imaginary part, so
``|exp(iJ)| = exp(C0(t))`` independently of ``xi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral_field import SpectralField
from .symbol_ode import SymbolSpec
from .time_coeffs import TimeCoefficient, zero


def _real_primitive(coef: TimeCoefficient, t: float) -> float:
    return float(np.real(coef.primitive(t)))


@dataclass(frozen=True)
class GaugePhase:
    """The closure ``J(t, xi)`` of a spec.

    One-dimensional extra monomials ``a_m xi^m`` are treated like the drift:
    their real primitives enter ``J`` with weight ``xi^m``.
    """

    spec: SymbolSpec

    def __call__(self, t: float, freqs) -> np.ndarray:
        """``J(t, xi)`` for each row of ``freqs`` (shape ``(M, N)``)."""
        x = np.atleast_2d(np.asarray(freqs, dtype=float))
        sp = self.spec
        if t == 0:
            return np.zeros(x.shape[0], dtype=complex)
        real = _real_primitive(sp.a2, t) * np.sum(x * x, axis=1)
        for j, c in enumerate(sp.a1):
            real = real + _real_primitive(c, t) * x[:, j]
        for m, c in sp.extra_monomials:
            real = real + _real_primitive(c, t) * x[:, 0] ** m
        return -(real + complex(sp.a0.primitive(t)))

    def log_shift(self, t: float) -> float:
        """``log |exp(iJ(t, xi))| = C0(t)``."""
        return 0.0 if t == 0 else float(np.imag(self.spec.a0.primitive(t)))


def _apply(fld: SpectralField, spec: SymbolSpec, sign: int) -> SpectralField:
    if fld.dimension != spec.dimension:
        raise ValueError("field and spec dimensions differ")
    J = GaugePhase(spec)(fld.timestamp, fld.frequencies)
    # exp(i sign J): log-magnitude -sign Im J, phase sign Re J
    live = np.isfinite(fld.logmag)
    lm = np.where(live, fld.logmag - sign * J.imag, -np.inf)
    ph = np.where(live, fld.phase + sign * J.real, 0.0)
    return fld.replace_values(lm, ph)


def gauge_forward(fld: SpectralField, spec: SymbolSpec) -> SpectralField:
    """Multiply every coefficient by ``exp(iJ(t, xi))``; log-magnitudes shift by ``C0(t)``."""
    return _apply(fld, spec, +1)


def gauge_inverse(fld: SpectralField, spec: SymbolSpec) -> SpectralField:
    """Multiply every coefficient by ``exp(-iJ(t, xi))``."""
    return _apply(fld, spec, -1)


def _imag_times_i(coef: TimeCoefficient) -> TimeCoefficient:
    """``i Im a(t)``, collapsed to the zero polynomial when there is no imaginary part."""
    part = coef.imaginary_part()
    return zero(coef.horizon) if part.is_zero else part


def reduce_to_normal_form(spec: SymbolSpec) -> SymbolSpec:
    """Keep only ``i Im`` of every coefficient and drop ``a0``."""
    return SymbolSpec(
        spec.dimension,
        spec.horizon,
        _imag_times_i(spec.a2),
        tuple(_imag_times_i(c) for c in spec.a1),
        zero(spec.horizon),
        tuple((m, _imag_times_i(c)) for m, c in spec.extra_monomials),
    )
