"""Spec suites shared by several test modules."""

from __future__ import annotations

import numpy as np

from torus_cauchy.oracle import random_polynomial
from torus_cauchy.symbol_ode import SymbolSpec
from torus_cauchy.time_coeffs import Polynomial, zero


def random_spec(rng: np.random.Generator, n: int = 1) -> SymbolSpec:
    return SymbolSpec.operator_form(
        random_polynomial(rng), [random_polynomial(rng) for _ in range(n)], random_polynomial(rng)
    )


def _real_poly(rng: np.random.Generator) -> Polynomial:
    return Polynomial(rng.uniform(-1, 1, size=int(rng.integers(1, 4))), 1.0)


def _with_real_parts(rng: np.random.Generator, spec: SymbolSpec) -> SymbolSpec:
    def add(c):
        r = _real_poly(rng)
        return Polynomial(np.polynomial.polynomial.polyadd(c.coeffs, r.coeffs), 1.0)

    a0 = Polynomial(rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2), 1.0)
    return SymbolSpec(spec.dimension, spec.horizon, add(spec.a2), tuple(add(c) for c in spec.a1), a0)


def mixed_suite(seed: int = 42, size: int = 50) -> list[SymbolSpec]:
    """Specs spanning every branch of the decision tree, with random real parts."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(size):
        kind = k % 5
        if kind == 0:
            spec = random_spec(rng, int(rng.integers(1, 3)))
        elif kind == 1:
            spec = SymbolSpec.operator_form(Polynomial([-1j * rng.uniform(0.5, 2)]), [Polynomial([1j])])
        elif kind == 2:
            spec = SymbolSpec.operator_form(zero(), [Polynomial(1j * rng.uniform(-1, 1, 2))])
        elif kind == 3:
            spec = SymbolSpec.operator_form(zero(), [zero()])
        else:
            spec = SymbolSpec.intro_example(int(rng.integers(1, 6)), int(rng.integers(0, 3)))
        out.append(_with_real_parts(rng, spec))
    return out
