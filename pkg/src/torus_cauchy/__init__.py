"""Fourier-side solver and well-posedness classifier for second-order
Schrodinger-type Cauchy problems with time-dependent coefficients on the torus."""

from __future__ import annotations

from .classifier import (
    DegeneratePoint,
    ImaginaryStructure,
    Posedness,
    Verdict,
    classify,
    classify_spec,
    gevrey_threshold,
    hierarchy_check,
    structure_from_spec,
)
from .gauge import GaugePhase, gauge_forward, gauge_inverse, reduce_to_normal_form
from .logdomain import LogComplex
from .spectral_field import (
    DataSpec,
    DecayFit,
    ExponentialDecay,
    GevreyDecay,
    SingleMode,
    SpectralField,
    Table,
    Zero,
    gevrey_fit,
    sobolev_norm,
    solve_cauchy,
    synthesize,
)
from .symbol_ode import SymbolSpec, duhamel_coefficient, rk4_oracle, symbol_value
from .time_coeffs import Factored, Named, Polynomial, Sampled, VanishingProfile, estimate_order
from .witness import ProbeReport, ProbeSequence, degenerate_witness, probe

__version__ = "0.1.0"

__all__ = [
    "DataSpec", "DecayFit", "DegeneratePoint", "ExponentialDecay", "Factored", "GaugePhase", "GevreyDecay",
    "ImaginaryStructure", "LogComplex", "Named", "Polynomial", "Posedness", "ProbeReport", "ProbeSequence",
    "Sampled", "SingleMode", "SpectralField", "SymbolSpec", "Table", "VanishingProfile", "Verdict", "Zero",
    "classify", "classify_spec", "degenerate_witness", "duhamel_coefficient", "estimate_order",
    "gauge_forward", "gauge_inverse", "gevrey_fit", "gevrey_threshold", "hierarchy_check", "probe",
    "reduce_to_normal_form", "rk4_oracle", "sobolev_norm", "solve_cauchy", "structure_from_spec",
    "symbol_value", "synthesize",
]
