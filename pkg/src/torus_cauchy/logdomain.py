"""Complex numbers stored as (log-magnitude, phase).

Spectral values in this package routinely carry exponents of size
``|xi|**2 * C(t)``, far outside double range.  ``LogComplex`` keeps them
representable, and the ``log_sum`` reduction adds arrays of such numbers with
a running maximum so that nothing overflows on the way.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from .errors import OverflowGuard

OVERFLOW_GUARD = math.log(sys.float_info.max) - 2.0
# terms further than this below the running maximum cannot affect a double
DROP_BELOW = 60.0
TWO_PI = 2.0 * math.pi


def wrap_phase(phase):
    """Reduce angles to ``(-pi, pi]``."""
    p = np.asarray(phase, dtype=float)
    out = np.pi - np.remainder(np.pi - p, TWO_PI)
    if np.ndim(phase) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class LogComplex:
    """``exp(logmag) * exp(i * phase)``; ``logmag = -inf`` encodes zero."""

    logmag: float
    phase: float = 0.0

    def __post_init__(self):
        lm = float(self.logmag)
        if math.isnan(lm) or lm == math.inf:
            raise ValueError(f"invalid log-magnitude {self.logmag!r}")
        object.__setattr__(self, "logmag", lm)
        ph = 0.0 if lm == -math.inf else wrap_phase(float(self.phase))
        object.__setattr__(self, "phase", ph)

    @classmethod
    def from_complex(cls, z: complex) -> "LogComplex":
        z = complex(z)
        if z == 0:
            return cls.zero()
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(-math.inf, 0.0)

    @classmethod
    def one(cls) -> "LogComplex":
        return cls(0.0, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.logmag == -math.inf

    @property
    def convertible(self) -> bool:
        return self.logmag < OVERFLOW_GUARD

    def to_complex(self) -> complex:
        if not self.convertible:
            raise OverflowGuard(f"log-magnitude = {self.logmag:.17g} exceeds guard {OVERFLOW_GUARD:.6g}")
        if self.is_zero:
            return 0j
        r = math.exp(self.logmag)
        return complex(r * math.cos(self.phase), r * math.sin(self.phase))

    def __complex__(self) -> complex:
        return self.to_complex()

    def __abs__(self) -> float:
        if not self.convertible:
            raise OverflowGuard(f"log-magnitude = {self.logmag:.17g} exceeds guard")
        return math.exp(self.logmag)

    def __mul__(self, other: "LogComplex | complex | float") -> "LogComplex":
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.logmag + other.logmag, self.phase + other.phase)

    __rmul__ = __mul__

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogComplex")
        if self.is_zero:
            return self
        return LogComplex(self.logmag - other.logmag, self.phase - other.phase)

    def __add__(self, other: "LogComplex") -> "LogComplex":
        lm, ph = log_sum(np.array([self.logmag, other.logmag]), np.array([self.phase, other.phase]))
        return LogComplex(lm, ph)

    def __neg__(self) -> "LogComplex":
        return self if self.is_zero else LogComplex(self.logmag, self.phase + math.pi)

    def __sub__(self, other: "LogComplex") -> "LogComplex":
        return self + (-other)

    def scaled_log(self, shift: float) -> "LogComplex":
        """Multiply by ``exp(shift)``."""
        return self if self.is_zero else LogComplex(self.logmag + shift, self.phase)


def log_sum(logmag, phase, axis=None):
    """Sum of ``exp(logmag + i phase)`` returned as ``(logmag, phase)``.

    Terms more than ``DROP_BELOW`` below the maximum along ``axis`` are
    dropped.  An all-zero (all ``-inf``) input sums to ``(-inf, 0)``.
    """
    lm = np.asarray(logmag, dtype=float)
    ph = np.asarray(phase, dtype=float)
    lm, ph = np.broadcast_arrays(lm, ph)
    top = np.max(lm, axis=axis, keepdims=True)
    safe_top = np.where(np.isfinite(top), top, 0.0)
    rel = lm - safe_top
    keep = rel >= -DROP_BELOW
    with np.errstate(invalid="ignore"):
        mag = np.where(keep, np.exp(np.where(keep, rel, 0.0)), 0.0)
    acc = np.sum(mag * np.exp(1j * ph), axis=axis, keepdims=True)
    size = np.abs(acc)
    with np.errstate(divide="ignore"):
        out_lm = np.where(size > 0, safe_top + np.log(size), -np.inf)
    out_ph = np.where(size > 0, np.angle(acc), 0.0)
    if axis is None:
        return float(out_lm.reshape(())), float(out_ph.reshape(()))
    return np.squeeze(out_lm, axis=axis), np.squeeze(out_ph, axis=axis)


def log_abs_sum(logmag, axis=None):
    """``log(sum(exp(logmag)))`` over ``axis``; ``-inf`` for an all-zero input."""
    lm = np.asarray(logmag, dtype=float)
    top = np.max(lm, axis=axis, keepdims=True)
    safe_top = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        out = safe_top + np.log(np.sum(np.exp(lm - safe_top), axis=axis, keepdims=True))
    out = np.where(np.isfinite(top), out, -np.inf)
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)
