"""Time-dependent complex coefficients and their primitives.

A coefficient ``a(t) = b(t) + i c(t)`` lives on ``[0, T]``.  Every form
exposes point evaluation and the primitive ``A(t) = int_0^t a(s) ds``; the
primitive is closed form whenever the representation allows it and falls back
to adaptive Simpson quadrature otherwise.

All evaluation methods accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.interpolate import CubicSpline
from scipy.special import erfc

from .errors import IllConditioned, MalformedStructure, NonVanishing, OutOfHorizon, QuadratureFailure

QUAD_TOL = 1e-10
QUAD_BUDGET = 2**20
ZERO_RTOL = 1e-9
# slack for times produced by floating point arithmetic right at the endpoints
_HORIZON_SLACK = 1e-12


def _check_times(t, horizon: float) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    lo, hi = -_HORIZON_SLACK * max(1.0, horizon), horizon * (1 + _HORIZON_SLACK)
    if np.any(~np.isfinite(arr)) or np.any(arr < lo) or np.any(arr > hi):
        raise OutOfHorizon(f"time {t!r} outside [0, {horizon}]")
    return np.clip(arr, 0.0, horizon)


def _out(value: np.ndarray, like):
    if np.ndim(like) == 0:
        return complex(value)
    return value


# ---------------------------------------------------------------------------
# adaptive Simpson


def adaptive_simpson(
    func: Callable[[float], complex],
    a: float,
    b: float,
    tol: float = QUAD_TOL,
    budget: int = QUAD_BUDGET,
) -> complex:
    """Integrate ``func`` over ``[a, b]`` with absolute tolerance ``tol``.

    Raises
    ------
    QuadratureFailure
        If more than ``budget`` integrand evaluations would be needed.
    """
    if a == b:
        return 0j
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fb = complex(func(a)), complex(func(b))
    m = 0.5 * (a + b)
    fm = complex(func(m))
    evals = 3
    whole = (b - a) / 6.0 * (fa + 4 * fm + fb)
    total = 0j
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = complex(func(lm)), complex(func(rm))
        evals += 2
        if evals > budget:
            raise QuadratureFailure(f"adaptive Simpson exceeded {budget} evaluations on [{a}, {b}]")
        left = (mid - lo) / 6.0 * (flo + 4 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4 * frm + fhi)
        delta = left + right - est
        if abs(delta) <= 15 * eps or depth >= 60 or mid - lo <= 1e-15 * max(1.0, abs(mid)):
            total += left + right + delta / 15.0
        else:
            stack.append((mid, hi, fmid, frm, fhi, right, eps / 2, depth + 1))
            stack.append((lo, mid, flo, flm, fmid, left, eps / 2, depth + 1))
    return sign * total


def _piecewise_simpson(func, a: float, b: float, breaks: Sequence[float], tol: float) -> complex:
    if a == b:
        return 0j
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    cuts = [a] + sorted(x for x in breaks if a < x < b) + [b]
    share = tol / (len(cuts) - 1)
    return sign * sum(adaptive_simpson(func, lo, hi, share) for lo, hi in zip(cuts[:-1], cuts[1:]))


# ---------------------------------------------------------------------------
# coefficient forms


class TimeCoefficient(ABC):
    """One complex coefficient on ``[0, horizon]``."""

    horizon: float

    @abstractmethod
    def _value(self, t: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _primitive(self, t: np.ndarray) -> np.ndarray: ...

    def _primitive_diff(self, s: np.ndarray, t: np.ndarray) -> np.ndarray:
        return self._primitive(t) - self._primitive(s)

    def eval(self, t):
        arr = _check_times(t, self.horizon)
        return _out(np.asarray(self._value(arr), dtype=complex), t)

    def real(self, t):
        return np.real(self.eval(t))

    def imag(self, t):
        return np.imag(self.eval(t))

    def primitive(self, t):
        arr = _check_times(t, self.horizon)
        val = np.asarray(self._primitive(arr), dtype=complex)
        val = np.where(arr == 0.0, 0j, val)
        return _out(val, t)

    def primitive_diff(self, s, t):
        """``A(t) - A(s)``, integrated directly over the interval between them."""
        sa = _check_times(s, self.horizon)
        ta = _check_times(t, self.horizon)
        sa, ta = np.broadcast_arrays(sa, ta)
        val = np.asarray(self._primitive_diff(sa, ta), dtype=complex)
        val = np.where(sa == ta, 0j, val)
        if np.ndim(s) == 0 and np.ndim(t) == 0:
            return complex(val)
        return val

    def imaginary_part(self) -> "TimeCoefficient":
        """The coefficient ``i * Im a(t)``."""
        return ImaginaryPart(self)

    @property
    def is_real(self) -> bool:
        return False

    @property
    def is_zero(self) -> bool:
        return False


class Polynomial(TimeCoefficient):
    """``a(t) = sum_k coeffs[k] t**k`` with complex coefficients."""

    def __init__(self, coeffs: Sequence[complex], horizon: float = 1.0):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        self.coeffs = np.trim_zeros(c, "b") if np.any(c) else np.zeros(1, dtype=complex)
        self.coeffs.setflags(write=False)
        self.horizon = float(horizon)
        if not self.horizon > 0:
            raise MalformedStructure("horizon must be positive")
        self._anti = npoly.polyint(self.coeffs)

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs.tolist()!r}, horizon={self.horizon})"

    def _value(self, t):
        return npoly.polyval(t, self.coeffs)

    def _primitive(self, t):
        return npoly.polyval(t, self._anti)

    def _primitive_diff(self, s, t):
        # Taylor expansion about s integrated over h = t - s: no cancellation
        h = t - s
        total = np.zeros(np.shape(h), dtype=complex)
        deriv = self.coeffs
        fact = 1.0
        for k in range(len(self.coeffs)):
            if k:
                deriv = npoly.polyder(deriv)
                fact *= k
            total = total + npoly.polyval(s, deriv) / fact * h ** (k + 1) / (k + 1)
        return total

    def imaginary_part(self) -> "Polynomial":
        return Polynomial(1j * self.coeffs.imag, self.horizon)

    def real_part(self) -> "Polynomial":
        return Polynomial(self.coeffs.real.astype(complex), self.horizon)

    @property
    def is_real(self) -> bool:
        return not np.any(self.coeffs.imag)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)


def constant(value: complex, horizon: float = 1.0) -> Polynomial:
    return Polynomial([value], horizon)


def zero(horizon: float = 1.0) -> Polynomial:
    return Polynomial([0.0], horizon)


@dataclass(frozen=True)
class VanishingProfile:
    """Declared zero of a coefficient: ``a(t) ~ factor(t) |t - zero|**order``."""

    zero: float
    order: float
    factor_lower: float = 1.0
    factor_upper: float = 1.0
    factor_sign: int = -1

    def __post_init__(self):
        if not self.order >= 0 or not math.isfinite(self.order):
            raise MalformedStructure(f"vanishing order must be finite and >= 0, got {self.order}")
        if not 0 < self.factor_lower <= self.factor_upper:
            raise MalformedStructure("factor bounds must satisfy 0 < lower <= upper")
        if self.factor_sign not in (-1, 1):
            raise MalformedStructure("factor_sign must be +1 or -1")


@dataclass(frozen=True)
class PrimitiveTable:
    """Cumulative integrals of a coefficient on a monotone node list."""

    nodes: np.ndarray
    values: np.ndarray
    rule: str = "adaptive-simpson"
    tolerance: float = QUAD_TOL

    def lookup(self, t: float) -> tuple[float, complex]:
        """Largest node ``<= t`` and the cumulative integral there."""
        idx = int(np.searchsorted(self.nodes, t, side="right")) - 1
        idx = max(idx, 0)
        return float(self.nodes[idx]), complex(self.values[idx])


def build_primitive_table(
    func: Callable[[float], complex],
    nodes: Sequence[float],
    breaks: Sequence[float] = (),
    tol: float = QUAD_TOL,
) -> PrimitiveTable:
    grid = np.unique(np.asarray(list(nodes) + list(breaks), dtype=float))
    if grid[0] != 0.0:
        raise MalformedStructure("primitive table must start at t=0")
    values = np.zeros(grid.size, dtype=complex)
    share = tol / max(grid.size - 1, 1)
    for i in range(1, grid.size):
        values[i] = values[i - 1] + adaptive_simpson(func, grid[i - 1], grid[i], share)
    return PrimitiveTable(grid, values, tolerance=tol)


class Factored(TimeCoefficient):
    """``a(t) = remainder(t) * prod_k |t - t_k|**p_k`` for declared zeros."""

    def __init__(
        self,
        zeros: Sequence[VanishingProfile],
        remainder: Sequence[complex] | Polynomial,
        horizon: float = 1.0,
        table_nodes: int = 64,
    ):
        self.horizon = float(horizon)
        self.zeros = tuple(sorted(zeros, key=lambda z: z.zero))
        locs = [z.zero for z in self.zeros]
        if len(set(locs)) != len(locs):
            raise MalformedStructure("declared zeros must be pairwise distinct")
        for z in self.zeros:
            if not 0.0 <= z.zero <= self.horizon:
                raise MalformedStructure(f"zero {z.zero} outside [0, {self.horizon}]")
        if isinstance(remainder, Polynomial):
            remainder = remainder.coeffs
        self.remainder = Polynomial(remainder, self.horizon)
        self._breaks = tuple(locs)
        self._table = build_primitive_table(
            self._scalar, np.linspace(0.0, self.horizon, table_nodes + 1), self._breaks
        )

    def __repr__(self) -> str:
        return f"Factored({list(self.zeros)!r}, {self.remainder.coeffs.tolist()!r}, horizon={self.horizon})"

    def _value(self, t):
        out = self.remainder._value(t).astype(complex)
        for z in self.zeros:
            out = out * np.abs(t - z.zero) ** z.order
        return out

    def _scalar(self, t: float) -> complex:
        return complex(self._value(np.asarray(t, dtype=float)))

    def _integral(self, a: float, b: float) -> complex:
        return _piecewise_simpson(self._scalar, a, b, self._breaks, QUAD_TOL)

    def _primitive(self, t):
        out = np.empty(np.shape(t), dtype=complex)
        for idx, ti in np.ndenumerate(np.asarray(t, dtype=float)):
            node, base = self._table.lookup(ti)
            out[idx] = base + self._integral(node, ti)
        return out

    def _primitive_diff(self, s, t):
        out = np.empty(np.shape(t), dtype=complex)
        for idx in np.ndindex(np.shape(t)):
            out[idx] = self._integral(float(s[idx]), float(t[idx]))
        return out

    def imaginary_part(self) -> "Factored":
        rem = self.remainder.imaginary_part()
        fac = Factored.__new__(Factored)
        fac.horizon = self.horizon
        fac.zeros = self.zeros
        fac.remainder = rem
        fac._breaks = self._breaks
        fac._table = PrimitiveTable(
            self._table.nodes, 1j * self._table.values.imag, self._table.rule, self._table.tolerance
        )
        return fac

    @property
    def is_real(self) -> bool:
        return self.remainder.is_real

    @property
    def is_zero(self) -> bool:
        return self.remainder.is_zero


class Named(TimeCoefficient):
    """Closed-form profiles with exact primitives.

    ``flat_exp``
        ``amp * 2/(lam t^3) * exp(-1/(lam t^2))`` with primitive
        ``amp * exp(-1/(lam t^2))``; vanishes to infinite order at 0.
    ``gauss_flat``
        ``amp * exp(-1/(lam t^2))``; primitive via ``erfc``.
    ``power``
        ``amp * |t - t0|**p``.
    """

    NAMES = ("flat_exp", "gauss_flat", "power")

    def __init__(self, name: str, amplitude: complex = 1.0, horizon: float = 1.0, **params: float):
        if name not in self.NAMES:
            raise MalformedStructure(f"unknown named profile {name!r}; expected one of {self.NAMES}")
        self.name = name
        self.amplitude = complex(amplitude)
        self.horizon = float(horizon)
        self.lam = float(params.pop("lam", 1.0))
        self.t0 = float(params.pop("t0", 0.0))
        self.p = float(params.pop("p", 1.0))
        if params:
            raise MalformedStructure(f"unexpected parameters for {name}: {sorted(params)}")
        if self.lam <= 0:
            raise MalformedStructure("lam must be positive")
        if name == "power" and self.p < 0:
            raise MalformedStructure("power profile needs p >= 0")

    def __repr__(self) -> str:
        return f"Named({self.name!r}, amplitude={self.amplitude}, lam={self.lam}, t0={self.t0}, p={self.p})"

    @property
    def infinite_order_zero(self) -> float | None:
        return 0.0 if self.name in ("flat_exp", "gauss_flat") else None

    def _shape(self, t):
        t = np.asarray(t, dtype=float)
        if self.name == "power":
            return np.abs(t - self.t0) ** self.p
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            x = 1.0 / (self.lam * t * t)
            g = np.exp(-x)
            if self.name == "flat_exp":
                g = 2.0 * x / t * g
        return np.where(t > 0, g, 0.0)

    def _value(self, t):
        return self.amplitude * self._shape(t)

    def _anti_shape(self, t):
        t = np.asarray(t, dtype=float)
        if self.name == "power":
            d = t - self.t0
            return (np.sign(d) * np.abs(d) ** (self.p + 1) + np.sign(self.t0) * abs(self.t0) ** (self.p + 1)) / (
                self.p + 1
            )
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if self.name == "flat_exp":
                g = np.exp(-1.0 / (self.lam * t * t))
            else:
                r = math.sqrt(self.lam)
                u = t * r
                g = (u * np.exp(-1.0 / (u * u)) - math.sqrt(math.pi) * erfc(1.0 / u)) / r
        return np.where(t > 0, g, 0.0)

    def _primitive(self, t):
        return self.amplitude * self._anti_shape(t)

    def _primitive_diff(self, s, t):
        if self.name != "flat_exp":
            return self.amplitude * (self._anti_shape(t) - self._anti_shape(s))
        # exp(-x_t) - exp(-x_s) = exp(-x_s) * expm1(x_s - x_t), with x_s - x_t formed exactly
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            xs = 1.0 / (self.lam * s * s)
            gap = (t - s) * (t + s) / (self.lam * s * s * t * t)
            val = np.exp(-xs) * np.expm1(gap)
        val = np.where(s > 0, val, self._anti_shape(t))
        val = np.where(t > 0, val, -self._anti_shape(s))
        return self.amplitude * val

    def imaginary_part(self) -> "Named":
        return Named(
            self.name, 1j * self.amplitude.imag, self.horizon, lam=self.lam, t0=self.t0, p=self.p
        )

    @property
    def is_real(self) -> bool:
        return self.amplitude.imag == 0

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0


class Sampled(TimeCoefficient):
    """Piecewise cubic interpolation of values on a uniform grid over ``[0, T]``."""

    def __init__(self, values: Sequence[complex], horizon: float = 1.0):
        vals = np.asarray(values, dtype=complex)
        if vals.ndim != 1 or vals.size < 4:
            raise MalformedStructure("sampled coefficient needs at least 4 grid values")
        if not np.all(np.isfinite(vals)):
            raise MalformedStructure("sampled values must be finite")
        self.horizon = float(horizon)
        self.values = vals
        self.grid = np.linspace(0.0, self.horizon, vals.size)
        self._spline = CubicSpline(self.grid, vals, extrapolate=False)
        self._anti = self._spline.antiderivative()

    def __repr__(self) -> str:
        return f"Sampled({self.values.size} values, horizon={self.horizon})"

    def _value(self, t):
        return self._spline(t)

    def _primitive(self, t):
        return self._anti(t)

    def _primitive_diff(self, s, t):
        out = np.empty(np.shape(t), dtype=complex)
        for idx in np.ndindex(np.shape(t)):
            out[idx] = self._spline.integrate(float(s[idx]), float(t[idx]))
        return out

    def imaginary_part(self) -> "Sampled":
        return Sampled(1j * self.values.imag, self.horizon)

    @property
    def is_real(self) -> bool:
        return not np.any(self.values.imag)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)


class ImaginaryPart(TimeCoefficient):
    """``i * Im base(t)`` for an arbitrary base coefficient."""

    def __init__(self, base: TimeCoefficient):
        self.base = base
        self.horizon = base.horizon

    def _value(self, t):
        return 1j * np.imag(self.base._value(t))

    def _primitive(self, t):
        return 1j * np.imag(self.base._primitive(t))

    def _primitive_diff(self, s, t):
        return 1j * np.imag(self.base._primitive_diff(s, t))

    @property
    def is_zero(self) -> bool:
        return self.base.is_zero or self.base.is_real


# ---------------------------------------------------------------------------
# functional surface


def eval(coef: TimeCoefficient, t):  # noqa: A001 - mirrors the operation name
    return coef.eval(t)


def primitive(coef: TimeCoefficient, t):
    return coef.primitive(t)


def primitive_diff(coef: TimeCoefficient, s, t):
    return coef.primitive_diff(s, t)


class OrderEstimate(NamedTuple):
    order: float
    confidence: float
    infinite_order_suspect: bool


def estimate_order(
    coef: TimeCoefficient,
    zero: float,
    part: str = "abs",
    rungs: int = 17,
    decades: float = 4.0,
) -> OrderEstimate:
    """Fit the vanishing order of ``coef`` at ``zero`` from a geometric ladder.

    The order is the least-squares slope of ``log|c|`` against ``log|t - zero|``;
    the confidence is the regression R^2.  Values that underflow, or local
    slopes that keep steepening, mark the zero as an infinite-order suspect
    and the reported order is ``inf``.
    """
    pick = {"abs": np.abs, "real": lambda v: np.abs(np.real(v)), "imag": lambda v: np.abs(np.imag(v))}[part]
    grid = np.linspace(0.0, coef.horizon, 1001)
    scale = float(np.max(pick(coef.eval(grid))))
    if scale == 0.0:
        raise IllConditioned("coefficient is identically zero on the sample grid")
    if pick(coef.eval(zero)) > ZERO_RTOL * scale:
        raise NonVanishing(f"|c({zero})| = {pick(coef.eval(zero)):.3g} exceeds {ZERO_RTOL} * sup|c|")

    room_right, room_left = coef.horizon - zero, zero
    side = 1.0 if room_right >= room_left else -1.0
    h_max = 0.25 * max(room_right, room_left)
    steps = h_max * 10.0 ** (-decades * np.arange(rungs) / (rungs - 1))
    vals = pick(coef.eval(zero + side * steps))
    usable = vals > 0
    underflow = not np.all(usable)
    if np.count_nonzero(usable) < 3:
        if np.count_nonzero(usable) >= 1:
            return OrderEstimate(math.inf, 0.0, True)
        raise IllConditioned("ladder values underflow before a slope can be fitted")
    x = np.log(steps[usable])
    y = np.log(vals[usable])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    local = np.diff(y) / np.diff(x)
    steepening = local[-1] > 1.5 * local[0] and local[-1] > 10.0
    if underflow or steepening or local.max() > 30.0:
        return OrderEstimate(math.inf, r2, True)
    return OrderEstimate(float(slope), r2, False)
