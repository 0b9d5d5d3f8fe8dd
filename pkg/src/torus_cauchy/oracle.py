"""Randomized cross-check of the closed-form solver against RK4."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .logdomain import LogComplex
from .symbol_ode import Forcing, SymbolSpec, _forcing_values, _symbol_on, duhamel_coefficient, rk4_grid
from .time_coeffs import Polynomial

# columns per batched RK4 run; bounds memory at about 2 * (2 * steps + 1) * CHUNK complex values
CHUNK = 128


@dataclass(frozen=True)
class OracleCase:
    spec: SymbolSpec
    g_hat: complex
    f_hat: Forcing
    t: float
    xi: tuple[int, ...]


@dataclass(frozen=True)
class OracleResult:
    case: OracleCase
    closed_form: complex | None
    rk4: complex | None
    rel_error: float

    @property
    def overflowed(self) -> bool:
        return self.closed_form is None or self.rk4 is None


@dataclass(frozen=True)
class OracleSummary:
    results: tuple[OracleResult, ...]
    tolerance: float

    @property
    def checked(self) -> list[OracleResult]:
        return [r for r in self.results if not r.overflowed]

    @property
    def max_error(self) -> float:
        errs = [r.rel_error for r in self.checked]
        return max(errs) if errs else 0.0

    @property
    def failures(self) -> int:
        return sum(1 for r in self.checked if not r.rel_error <= self.tolerance)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json_dict(self) -> dict:
        return {
            "cases": len(self.results),
            "checked": len(self.checked),
            "overflowed": len(self.results) - len(self.checked),
            "failures": self.failures,
            "max_rel_error": self.max_error,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _unit_disk(rng: np.random.Generator, size: int) -> np.ndarray:
    r = np.sqrt(rng.uniform(size=size))
    return r * np.exp(2j * np.pi * rng.uniform(size=size))


def random_polynomial(rng: np.random.Generator, max_degree: int = 3, horizon: float = 1.0) -> Polynomial:
    """Random complex polynomial with ``sum |c_k| <= 1``, so ``|a(t)| <= 1`` on ``[0, 1]``."""
    deg = int(rng.integers(0, max_degree + 1))
    c = _unit_disk(rng, deg + 1)
    c = c / max(1.0, float(np.sum(np.abs(c))))
    return Polynomial(c, horizon)


class _Wave:
    """``c exp(i w s)``; picklable and vectorized."""

    def __init__(self, c: complex, w: float):
        self.c, self.w = complex(c), float(w)

    def __call__(self, s):
        return self.c * np.exp(1j * self.w * np.asarray(s, dtype=float))


def random_suite(
    seed: int = 42,
    trials: int = 100,
    times: Sequence[float] = tuple(k / 10 for k in range(1, 11)),
    max_freq: int = 16,
) -> list[OracleCase]:
    """``trials`` random specs (N in {1, 2}), each at one frequency and every time."""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(trials):
        n = int(rng.integers(1, 3))
        spec = SymbolSpec.operator_form(
            random_polynomial(rng), [random_polynomial(rng) for _ in range(n)], random_polynomial(rng)
        )
        xi = tuple(int(v) for v in rng.integers(-max_freq, max_freq + 1, size=n))
        g = complex(_unit_disk(rng, 1)[0])
        f = _Wave(_unit_disk(rng, 1)[0], rng.uniform(-2.0, 2.0))
        cases.extend(OracleCase(spec, g, f, float(t), xi) for t in times)
    return cases


def rk4_batch(cases: Sequence[OracleCase], steps: int = 10_000) -> np.ndarray:
    """RK4 values for many cases at once; ``nan`` marks overflow."""
    out = np.empty(len(cases), dtype=complex)
    frac = np.linspace(0.0, 1.0, 2 * steps + 1)
    for start in range(0, len(cases), CHUNK):
        chunk = cases[start:start + CHUNK]
        q = np.empty((frac.size, len(chunk)), dtype=complex)
        f = np.empty_like(q)
        for k, c in enumerate(chunk):
            s = frac * c.t
            q[:, k] = _symbol_on(c.spec, s, c.xi)
            f[:, k] = _forcing_values(c.f_hat, s)
        g = np.array([c.g_hat for c in chunk], dtype=complex)
        h = np.array([c.t / steps for c in chunk])
        out[start:start + len(chunk)] = rk4_grid(q, f, g, h)
    return out


def run_oracle(
    cases: Sequence[OracleCase],
    steps: int = 10_000,
    tolerance: float = 1e-6,
    nodes_per_unit: int | None = None,
    adaptive: bool = True,
    progress: Callable[[int], None] | None = None,
) -> OracleSummary:
    """Compare :func:`duhamel_coefficient` with batched RK4 on every case."""
    ref = rk4_batch(cases, steps)
    results = []
    for k, (c, r) in enumerate(zip(cases, ref)):
        nodes = None if nodes_per_unit is None else max(8, math.ceil(nodes_per_unit * c.t))
        u = duhamel_coefficient(c.spec, c.g_hat, c.f_hat, c.t, c.xi, nodes=nodes, adaptive=adaptive)
        cf = u.to_complex() if u.convertible else None
        rk = None if np.isnan(r) else complex(r)
        if cf is None or rk is None:
            err = math.nan
        elif cf == 0:
            err = 0.0 if rk == 0 else math.inf
        else:
            err = abs(cf - rk) / abs(cf)
        results.append(OracleResult(c, cf, rk, err))
        if progress:
            progress(k)
    return OracleSummary(tuple(results), tolerance)


def field_cases(spec: SymbolSpec, g_values, f_values, freqs, times) -> list[OracleCase]:
    """Cases for every (frequency, time) pair of a concrete problem."""
    cases = []
    for xi, g, f in zip(freqs, g_values, f_values):
        gz = g.to_complex() if isinstance(g, LogComplex) else complex(g)
        fz = f.to_complex() if isinstance(f, LogComplex) else complex(f)
        for t in times:
            if t > 0:
                cases.append(OracleCase(spec, gz, fz if fz != 0 else None, float(t), tuple(int(v) for v in xi)))
    return cases
