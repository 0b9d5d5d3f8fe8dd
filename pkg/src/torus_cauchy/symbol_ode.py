"""Per-frequency symbol, closed-form propagator and an RK4 cross-check.

For each frequency ``xi`` the Fourier coefficient of the solution obeys

    D_t u + Q(t, xi) u = f(t, xi),      u(0) = g(xi),      D_t = -i d/dt,

with ``Q(t, xi) = a2(t)|xi|^2 + sum_j a1_j(t) xi_j + a0(t)`` (plus optional
higher monomials in one dimension).  Integrating factors give

    u(t) = g exp(-i W(t)) + i int_0^t f(s) exp(-i [W(t) - W(s)]) ds,

where ``W`` is the same combination of the primitives ``A = int_0^t a``.
``exp(-i W)`` has modulus ``exp(Im W)``, so the log-magnitude is linear in
the imaginary primitives and the phase in the real ones.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import MalformedStructure, OverflowGuard, QuadratureFailure, StepsTooCoarse
from .logdomain import OVERFLOW_GUARD, LogComplex, log_abs_sum, log_sum, wrap_phase
from .time_coeffs import ImaginaryPart, Named, Polynomial, TimeCoefficient, zero

GL_ORDER = 8
NODES_PER_UNIT = 64
DUHAMEL_RTOL = 1e-10
MAX_PANELS = 2**18
# phase advance per initial panel; an 8-point rule resolves this to ~1e-12
RADIANS_PER_PANEL = 3.0

Forcing = Callable[[np.ndarray], np.ndarray] | complex | LogComplex | None


@dataclass(frozen=True)
class SymbolSpec:
    """Coefficients of ``Q(t, xi)`` on the ``N``-torus over ``[0, T]``.

    ``extra_monomials`` holds ``(m, a_m)`` pairs contributing ``a_m(t) xi**m``
    and is only allowed in one space dimension.
    """

    dimension: int
    horizon: float
    a2: TimeCoefficient
    a1: tuple[TimeCoefficient, ...]
    a0: TimeCoefficient
    extra_monomials: tuple[tuple[int, TimeCoefficient], ...] = ()

    def __post_init__(self):
        if self.dimension < 1:
            raise MalformedStructure("dimension must be a positive integer")
        object.__setattr__(self, "a1", tuple(self.a1))
        object.__setattr__(self, "extra_monomials", tuple((int(m), c) for m, c in self.extra_monomials))
        if len(self.a1) != self.dimension:
            raise MalformedStructure(f"expected {self.dimension} drift coefficients, got {len(self.a1)}")
        if self.extra_monomials and self.dimension != 1:
            raise MalformedStructure("extra monomials are only defined for N = 1")
        for m, _ in self.extra_monomials:
            if m < 3:
                raise MalformedStructure(f"extra monomial degree must be >= 3, got {m}")
        for coef in self.coefficients():
            if not math.isclose(coef.horizon, self.horizon, rel_tol=1e-12):
                raise MalformedStructure("all coefficients must share the spec horizon")

    def coefficients(self) -> list[TimeCoefficient]:
        return [self.a2, *self.a1, self.a0, *(c for _, c in self.extra_monomials)]

    def weights(self, xi) -> np.ndarray:
        """Frequency weights matching ``coefficients()``: ``|xi|^2, xi_1..xi_N, 1, xi^m``."""
        x = np.asarray(xi, dtype=float).reshape(-1)
        if x.size != self.dimension:
            raise MalformedStructure(f"frequency {xi!r} has wrong dimension for N={self.dimension}")
        extra = [x[0] ** m for m, _ in self.extra_monomials]
        return np.array([x @ x, *x, 1.0, *extra])

    # -- constructors ---------------------------------------------------

    @classmethod
    def operator_form(cls, a2, a1, a0=None, horizon: float | None = None) -> "SymbolSpec":
        """Coefficients of ``P = D_t - a2 Lap + sum a1_j D_j + a0``.

        Applied to ``exp(i x.xi)`` the Laplacian gives ``-|xi|^2`` and ``D_j``
        gives ``xi_j``, so these coefficients enter ``Q`` unchanged.
        """
        a1 = tuple(a1)
        horizon = a2.horizon if horizon is None else horizon
        a0 = zero(horizon) if a0 is None else a0
        return cls(len(a1), horizon, a2, a1, a0)

    @classmethod
    def normal_form(cls, c2, c1, horizon: float | None = None) -> "SymbolSpec":
        """``P = D_t - i c2 Lap + sum i c1_j D_j`` from real imaginary parts ``c2, c1_j``."""
        horizon = c2.horizon if horizon is None else horizon
        return cls(len(c1), horizon, _times_i(c2), tuple(_times_i(c) for c in c1), zero(horizon))

    @classmethod
    def intro_example(cls, k: float, ell: float, horizon: float = 1.0, a0=None) -> "SymbolSpec":
        """``P = D_t + i t^k d^2/dx^2 + i t^ell D_x + a0`` on the circle.

        ``+i t^k d^2/dx^2 = -a2 Lap`` with ``a2 = -i t^k``; the drift enters as
        ``a1 = i t^ell``.  Hence ``Im a2 = -t^k <= 0`` and ``Im a1 = t^ell``.
        """
        def monomial(power: float, amp: complex):
            if float(power).is_integer():
                return Polynomial([0.0] * int(power) + [amp], horizon)
            return Named("power", amp, horizon, t0=0.0, p=float(power))

        a0 = zero(horizon) if a0 is None else a0
        return cls(1, horizon, monomial(k, -1j), (monomial(ell, 1j),), a0)

    @classmethod
    def dx_power_form(cls, terms: dict[int, TimeCoefficient], horizon: float) -> "SymbolSpec":
        """One-dimensional ``P = D_t + sum_m d_m(t) D_x^m``; ``Q = sum_m d_m xi^m``."""
        get = lambda m: terms.get(m, zero(horizon))  # noqa: E731
        extra = tuple(sorted((m, c) for m, c in terms.items() if m >= 3))
        return cls(1, horizon, get(2), (get(1),), get(0), extra)


def _times_i(coef: TimeCoefficient) -> TimeCoefficient:
    if isinstance(coef, Polynomial):
        return Polynomial(1j * coef.coeffs, coef.horizon)
    if isinstance(coef, Named):
        return Named(coef.name, 1j * coef.amplitude, coef.horizon, lam=coef.lam, t0=coef.t0, p=coef.p)
    return _Scaled(coef, 1j)


class _Scaled(TimeCoefficient):
    def __init__(self, base: TimeCoefficient, factor: complex):
        self.base, self.factor, self.horizon = base, complex(factor), base.horizon

    def _value(self, t):
        return self.factor * self.base._value(t)

    def _primitive(self, t):
        return self.factor * self.base._primitive(t)

    def _primitive_diff(self, s, t):
        return self.factor * self.base._primitive_diff(s, t)

    def imaginary_part(self):
        return ImaginaryPart(self)


# ---------------------------------------------------------------------------


def symbol_value(spec: SymbolSpec, t: float, xi) -> complex:
    vals = np.array([c.eval(t) for c in spec.coefficients()])
    return complex(vals @ spec.weights(xi))


def _primitive_combination(spec: SymbolSpec, t, xi) -> np.ndarray:
    prims = np.array([np.atleast_1d(c.primitive(t)) for c in spec.coefficients()])
    return spec.weights(xi) @ prims


def _diff_combination(spec: SymbolSpec, s: np.ndarray, t: float, xi) -> np.ndarray:
    """``W(t) - W(s)`` for an array of ``s``, each primitive difference integrated directly."""
    w = spec.weights(xi)
    out = np.zeros(np.shape(s), dtype=complex)
    for wk, coef in zip(w, spec.coefficients()):
        if wk == 0.0 or coef.is_zero:
            continue
        out = out + wk * coef.primitive_diff(s, np.full(np.shape(s), t))
    return out


def homogeneous_exponent(spec: SymbolSpec, t: float, xi) -> LogComplex:
    """``exp(-i W(t))`` as a ``LogComplex``."""
    if t == 0:
        return LogComplex.one()
    comb = complex(_primitive_combination(spec, t, xi)[0])
    return LogComplex(comb.imag, -comb.real)


@dataclass(frozen=True)
class _ForcingEval:
    """Forcing split into a log-scale and a linear-domain time profile."""

    log_scale: float
    profile: Callable[[np.ndarray], np.ndarray] | None
    constant_phase: float = 0.0

    @classmethod
    def wrap(cls, f_hat: Forcing) -> "_ForcingEval | None":
        if f_hat is None:
            return None
        if isinstance(f_hat, LogComplex):
            return None if f_hat.is_zero else cls(f_hat.logmag, None, f_hat.phase)
        if callable(f_hat):
            return cls(0.0, f_hat)
        z = complex(f_hat)
        if z == 0:
            return None
        return cls(math.log(abs(z)), None, math.atan2(z.imag, z.real))

    def log_values(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.profile is None:
            return np.full(s.shape, self.log_scale), np.full(s.shape, self.constant_phase)
        try:
            vals = np.asarray(self.profile(s), dtype=complex)
            if vals.shape != s.shape:
                vals = np.broadcast_to(vals, s.shape).astype(complex)
        except (TypeError, ValueError):
            vals = np.array([complex(self.profile(float(x))) for x in s.ravel()]).reshape(s.shape)
        with np.errstate(divide="ignore"):
            lm = np.log(np.abs(vals)) + self.log_scale
        return lm, np.angle(vals)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def _panel_nodes(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _GL_X[None, :]
    w = half[:, None] * _GL_W[None, :]
    return x, w


class _DuhamelIntegrand:
    def __init__(self, spec: SymbolSpec, forcing: _ForcingEval, t: float, xi):
        self.spec, self.forcing, self.t, self.xi = spec, forcing, t, xi

    def panels(self, lo: np.ndarray, hi: np.ndarray):
        """Log-domain Gauss-Legendre sums (value and absolute) on each panel."""
        x, w = _panel_nodes(lo, hi)
        flat = np.clip(x.ravel(), 0.0, self.t)
        comb = _diff_combination(self.spec, flat, self.t, self.xi).reshape(x.shape)
        f_lm, f_ph = self.forcing.log_values(flat)
        # i * f(s) * exp(-i (W(t) - W(s)))
        lm = f_lm.reshape(x.shape) + comb.imag + np.log(w)
        ph = wrap_phase(f_ph.reshape(x.shape) + 0.5 * math.pi - comb.real)
        val_lm, val_ph = log_sum(lm, ph, axis=1)
        abs_lm = log_abs_sum(lm, axis=1)
        return val_lm, val_ph, abs_lm


def _log_diff(a_lm, a_ph, b_lm, b_ph):
    lm = np.stack([a_lm, b_lm], axis=-1)
    ph = np.stack([a_ph, b_ph + math.pi], axis=-1)
    return log_sum(lm, ph, axis=-1)[0]


def _duhamel_integral(
    integrand: _DuhamelIntegrand,
    t: float,
    nodes: int,
    adaptive: bool,
    rtol: float,
    stiffness: float = 0.0,
    radians: float = 0.0,
) -> LogComplex:
    n_panels = max(1, math.ceil(nodes / GL_ORDER))
    if adaptive:
        n_panels = max(n_panels, math.ceil(radians / RADIANS_PER_PANEL))
        if n_panels > MAX_PANELS:
            raise QuadratureFailure(f"oscillatory Duhamel integrand needs more than {MAX_PANELS} panels")
    edges = np.linspace(0.0, t, n_panels + 1)
    if adaptive and stiffness * t > 1.0:
        # boundary layers of width ~1/|Q| sit at the ends of [0, t]
        depth = math.ceil(math.log2(stiffness * t)) + 1
        grade = t * 2.0 ** -np.arange(1, depth + 1)
        edges = np.unique(np.concatenate([edges, grade, t - grade]))
        edges = edges[np.concatenate([[True], np.diff(edges) > 1e-12 * t])]
        edges[-1] = t
    lo, hi = edges[:-1], edges[1:]
    coarse = integrand.panels(lo, hi)
    if not adaptive:
        lm, ph = log_sum(coarse[0], coarse[1])
        return LogComplex(lm, ph)

    mid = 0.5 * (lo + hi)
    fine_l = integrand.panels(lo, mid)
    fine_r = integrand.panels(mid, hi)
    log_rtol = math.log(rtol)
    while True:
        fine_lm, fine_ph = log_sum(
            np.stack([fine_l[0], fine_r[0]], -1), np.stack([fine_l[1], fine_r[1]], -1), axis=-1
        )
        fine_abs = log_abs_sum(np.stack([fine_l[2], fine_r[2]], -1), axis=-1)
        err = _log_diff(coarse[0], coarse[1], fine_lm, fine_ph)
        total_abs = log_abs_sum(fine_abs)
        if total_abs == -math.inf:
            return LogComplex.zero()
        total_err = log_abs_sum(err)
        if total_err <= log_rtol + total_abs:
            lm, ph = log_sum(fine_lm, fine_ph)
            return LogComplex(lm, ph)
        share = log_rtol + total_abs + np.log((hi - lo) / t)
        bad = err > share
        if not np.any(bad):
            lm, ph = log_sum(fine_lm, fine_ph)
            return LogComplex(lm, ph)
        if lo.size + np.count_nonzero(bad) > MAX_PANELS:
            raise QuadratureFailure(
                f"Duhamel quadrature needs more than {MAX_PANELS} panels at t={t} (error/abs = "
                f"{math.exp(min(total_err - total_abs, 700)):.3g})"
            )
        keep = ~bad
        b_lo, b_hi, b_mid = lo[bad], hi[bad], mid[bad]
        # children of a split panel inherit the parent's halves as their coarse values
        new_lo = np.concatenate([lo[keep], b_lo, b_mid])
        new_hi = np.concatenate([hi[keep], b_mid, b_hi])
        new_coarse = tuple(
            np.concatenate([c[keep], fl[bad], fr[bad]]) for c, fl, fr in zip(coarse, fine_l, fine_r)
        )
        new_mid = 0.5 * (new_lo + new_hi)
        nb = np.count_nonzero(bad)
        q_lo = np.concatenate([b_lo, b_mid])
        q_hi = np.concatenate([b_mid, b_hi])
        q_mid = 0.5 * (q_lo + q_hi)
        child_l = integrand.panels(q_lo, q_mid)
        child_r = integrand.panels(q_mid, q_hi)
        nk = np.count_nonzero(keep)
        fine_l = tuple(np.concatenate([f[keep], c]) for f, c in zip(fine_l, child_l))
        fine_r = tuple(np.concatenate([f[keep], c]) for f, c in zip(fine_r, child_r))
        lo, hi, mid, coarse = new_lo, new_hi, new_mid, new_coarse
        assert lo.size == nk + 2 * nb


def duhamel_coefficient(
    spec: SymbolSpec,
    g_hat: complex | LogComplex,
    f_hat: Forcing,
    t: float,
    xi,
    nodes: int | None = None,
    adaptive: bool = True,
    rtol: float = DUHAMEL_RTOL,
) -> LogComplex:
    """Closed-form Fourier coefficient ``u(t, xi)`` in log-domain.

    ``nodes`` is the number of Gauss-Legendre nodes laid over ``[0, t]``
    initially (default 64 per unit time, at least 8).  With ``adaptive``
    panels whose estimated error is too large are bisected until the total
    error is below ``rtol`` times the integral of the absolute integrand.
    """
    if nodes is None:
        nodes = max(GL_ORDER, math.ceil(NODES_PER_UNIT * t))
    if nodes < GL_ORDER:
        raise ValueError(f"nodes must be >= {GL_ORDER}")
    g = g_hat if isinstance(g_hat, LogComplex) else LogComplex.from_complex(g_hat)
    homog = g * homogeneous_exponent(spec, t, xi) if not g.is_zero else LogComplex.zero()
    if t == 0:
        return g
    forcing = _ForcingEval.wrap(f_hat)
    if forcing is None:
        return homog
    stiffness = max(abs(symbol_value(spec, 0.0, xi)), abs(symbol_value(spec, t, xi)))
    s = np.linspace(0.0, t, 65)
    radians = float(_trapezoid(np.abs(_symbol_on(spec, s, xi).real), s))
    integral = _duhamel_integral(
        _DuhamelIntegrand(spec, forcing, t, xi), t, nodes, adaptive, rtol, stiffness, radians
    )
    return homog + integral


# ---------------------------------------------------------------------------
# linear-domain oracle


def _forcing_values(f_hat: Forcing, s: np.ndarray) -> np.ndarray:
    if f_hat is None:
        return np.zeros(s.shape, dtype=complex)
    if isinstance(f_hat, LogComplex):
        return np.full(s.shape, f_hat.to_complex())
    if callable(f_hat):
        try:
            vals = np.asarray(f_hat(s), dtype=complex)
            return np.broadcast_to(vals, s.shape).astype(complex)
        except (TypeError, ValueError):
            return np.array([complex(f_hat(float(x))) for x in s.ravel()]).reshape(s.shape)
    return np.full(s.shape, complex(f_hat))


def _symbol_on(spec: SymbolSpec, s: np.ndarray, xi) -> np.ndarray:
    w = spec.weights(xi)
    out = np.zeros(s.shape, dtype=complex)
    for wk, coef in zip(w, spec.coefficients()):
        if wk != 0.0 and not coef.is_zero:
            out = out + wk * coef.eval(s.ravel()).reshape(s.shape)
    return out


def rk4_grid(q_half: np.ndarray, f_half: np.ndarray, g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Classical RK4 for ``u' = -i q u + i f`` on many independent problems.

    ``q_half`` and ``f_half`` have shape ``(2 * steps + 1, batch)`` and hold the
    symbol and forcing at every half step.  Trajectories that leave the
    overflow guard come back as ``nan``.
    """
    steps = (q_half.shape[0] - 1) // 2
    u = np.array(g, dtype=complex)
    limit = math.exp(OVERFLOW_GUARD)
    for k in range(steps):
        q0, q1, q2 = q_half[2 * k], q_half[2 * k + 1], q_half[2 * k + 2]
        f0, f1, f2 = f_half[2 * k], f_half[2 * k + 1], f_half[2 * k + 2]
        k1 = -1j * (q0 * u - f0)
        k2 = -1j * (q1 * (u + 0.5 * h * k1) - f1)
        k3 = -1j * (q1 * (u + 0.5 * h * k2) - f1)
        k4 = -1j * (q2 * (u + h * k3) - f2)
        u = u + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if k % 64 == 63:
            with np.errstate(invalid="ignore", over="ignore"):
                big = ~(np.abs(u) < limit)
            if np.any(big):
                u = np.where(big, np.nan, u)
    with np.errstate(invalid="ignore", over="ignore"):
        big = ~(np.abs(u) < limit)
    return np.where(big, np.nan + 0j, u)


def _rk4_run(spec, g_hat, f_hat, t: np.ndarray, xi, steps: int) -> np.ndarray:
    frac = np.linspace(0.0, 1.0, 2 * steps + 1)
    s = frac[:, None] * t[None, :]
    q = _symbol_on(spec, s, xi)
    f = _forcing_values(f_hat, s)
    return rk4_grid(q, f, np.full(t.shape, complex(g_hat)), t / steps)


def rk4_oracle(
    spec: SymbolSpec,
    g_hat: complex,
    f_hat: Forcing,
    t,
    xi,
    steps: int = 10_000,
    check_halving: bool = False,
):
    """Fixed-step RK4 solution of ``D_t u + Q u = f`` from ``u(0) = g``.

    ``t`` may be an array; each entry is integrated with its own ``steps``
    equal steps.  With ``check_halving`` a second run at half the steps is
    made and :class:`StepsTooCoarse` is warned if the two differ by more than
    ``1e-6`` relative.

    Raises
    ------
    OverflowGuard
        If a trajectory exceeds the overflow guard.
    """
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    for c in spec.coefficients():
        c.eval(tt)
    u = _rk4_run(spec, g_hat, f_hat, tt, xi, steps)
    if np.any(np.isnan(u)):
        raise OverflowGuard(f"RK4 trajectory left the overflow guard for xi={xi!r}")
    if check_halving:
        coarse = _rk4_run(spec, g_hat, f_hat, tt, xi, max(1, steps // 2))
        scale = np.maximum(np.abs(u), np.finfo(float).tiny)
        if np.any(np.isnan(coarse)) or np.max(np.abs(coarse - u) / scale) > 1e-6:
            warnings.warn(StepsTooCoarse(f"halving RK4 steps changes the result by >1e-6 (xi={xi!r})"))
    if np.ndim(t) == 0:
        return complex(u[0])
    return u
