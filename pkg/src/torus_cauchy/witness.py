"""Blow-up data, probe sequences and numerical growth reports.

A probe evaluates the Fourier coefficient ``u(t_n, xi_n)`` along a sequence
of times and frequencies.  For ill-posed problems the witness data below make
``log |u|`` grow like a power of ``|xi_n|``; for well-posed ones it stays
bounded.  Everything is computed in log-domain.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .classifier import DegeneratePoint, Order
from .errors import BadLadder, NotInK
from .logdomain import LogComplex
from .spectral_field import DataSpec, ExponentialDecay, GevreyDecay, Zero, format_float
from .symbol_ode import SymbolSpec, duhamel_coefficient
from .time_coeffs import Named, Polynomial, constant

DIVERGENCE_FLOOR = 50.0
BOUNDED_CEILING = 10.0


# ---------------------------------------------------------------------------
# sequences and reports


@dataclass(frozen=True)
class ProbeSequence:
    """Points ``(n, t_n, xi_n)`` with optional closed-form growth.

    ``expected_log_growth(n)`` is an exact value of ``log |u(t_n, xi_n)|``;
    ``lower_bound(n)`` is a proven lower bound.  ``nu_expected`` is the
    growth exponent the probe is designed to exhibit.
    """

    label: str
    entries: tuple[tuple[int, float, tuple[int, ...]], ...]
    expected_log_growth: Callable[[int], float] | None = None
    lower_bound: Callable[[int], float] | None = None
    nu_expected: float | None = None
    companions: tuple[tuple[float, float], ...] = ()
    provenance: str = ""

    def __post_init__(self):
        entries = tuple((int(n), float(t), tuple(int(v) for v in x)) for n, t, x in self.entries)
        ns = [e[0] for e in entries]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("probe indices must be strictly increasing")
        object.__setattr__(self, "entries", entries)

    def check_horizon(self, horizon: float) -> None:
        for n, t, _ in self.entries:
            if not 0.0 <= t <= horizon:
                raise ValueError(f"probe time t_{n} = {t} outside [0, {horizon}]")


class Growth(enum.Enum):
    DIVERGING = "diverging"
    BOUNDED = "bounded"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ProbeRow:
    n: int
    t_n: float
    xi_norm: float
    logmag: float
    expected_logmag: float | None = None
    deviation: float | None = None
    data_logmag: float = -math.inf


@dataclass(frozen=True)
class ProbeReport:
    """Rows of a probe plus the growth decision.

    ``nu_hat`` is the slope of ``log(amplification)`` against ``log |xi_n|``
    over the final half of the rows, where the amplification is ``logmag``
    minus the log-size of the data at ``xi_n``; rows with nonpositive
    amplification are left out of the fit.
    """

    label: str
    rows: tuple[ProbeRow, ...]
    growth: Growth
    nu_hat: float
    nu_stderr: float
    max_deviation: float | None = None
    bound_violations: int = 0
    provenance: str = ""

    def to_json_dict(self) -> dict:
        def num(v):
            if v is None:
                return None
            if isinstance(v, float) and not math.isfinite(v):
                return format_float(v) if not math.isnan(v) else "nan"
            return v

        return {
            "label": self.label,
            "growth": self.growth.value,
            "nu_hat": num(self.nu_hat),
            "nu_stderr": num(self.nu_stderr),
            "max_deviation": num(self.max_deviation),
            "bound_violations": self.bound_violations,
            "provenance": self.provenance,
            "rows": len(self.rows),
        }


def classify_growth(logmags: Sequence[float], floor: float = DIVERGENCE_FLOOR,
                    ceiling: float = BOUNDED_CEILING) -> Growth:
    """Diverging if the final half strictly increases and ends above ``floor``;
    bounded if the final half never exceeds ``ceiling``."""
    lm = np.asarray(logmags, dtype=float)
    if lm.size == 0:
        return Growth.INCONCLUSIVE
    tail = lm[lm.size // 2:] if lm.size > 1 else lm
    if tail.size >= 2 and np.all(np.diff(tail) > 0) and tail[-1] > floor:
        return Growth.DIVERGING
    if np.max(tail) <= ceiling:
        return Growth.BOUNDED
    return Growth.INCONCLUSIVE


def fit_growth_exponent(xi_norm: Sequence[float], amplification: Sequence[float]) -> tuple[float, float]:
    """Least-squares ``log A = log a + nu log |xi|`` over rows with ``A > 0``."""
    x = np.asarray(xi_norm, dtype=float)
    a = np.asarray(amplification, dtype=float)
    keep = (a > 0) & np.isfinite(a) & (x > 0)
    if np.count_nonzero(keep) < 3:
        return math.nan, math.nan
    lx, la = np.log(x[keep]), np.log(a[keep])
    A = np.stack([np.ones_like(lx), lx], axis=1)
    coef, res, *_ = np.linalg.lstsq(A, la, rcond=None)
    dof = lx.size - 2
    resid = la - A @ coef
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.inv(A.T @ A)
    return float(coef[1]), float(math.sqrt(cov[1, 1]))


def probe(
    spec: SymbolSpec,
    data: DataSpec,
    seq: ProbeSequence,
    floor: float = DIVERGENCE_FLOOR,
    ceiling: float = BOUNDED_CEILING,
) -> ProbeReport:
    """Evaluate ``u(t_n, xi_n)`` along ``seq`` and classify the growth."""
    seq.check_horizon(spec.horizon)
    rows = []
    for n, t, xi in seq.entries:
        x = np.array([xi])
        g = data.g.value(x[0]) if not data.g.is_zero else LogComplex.zero()
        f = data.f.value(x[0]) if not data.f.is_zero else LogComplex.zero()
        u = duhamel_coefficient(spec, g, None if f.is_zero else f, t, xi)
        expected = seq.expected_log_growth(n) if seq.expected_log_growth else None
        dev = None if expected is None else u.logmag - expected
        rows.append(ProbeRow(n, t, float(np.linalg.norm(xi)), u.logmag, expected, dev, max(g.logmag, f.logmag)))
    lm = [r.logmag for r in rows]
    amp = [r.logmag - r.data_logmag if math.isfinite(r.data_logmag) else math.nan for r in rows]
    half = len(rows) // 2 if len(rows) >= 6 else 0
    nu, se = fit_growth_exponent([r.xi_norm for r in rows][half:], amp[half:])
    devs = [abs(r.deviation) for r in rows if r.deviation is not None]
    violations = 0
    if seq.lower_bound is not None:
        violations = sum(1 for r in rows if r.logmag < seq.lower_bound(r.n))
    return ProbeReport(
        seq.label, tuple(rows), classify_growth(lm, floor, ceiling), nu, se,
        max(devs) if devs else None, violations, seq.provenance,
    )


# ---------------------------------------------------------------------------
# witness data


def parabolic_violation_data(t_star: float) -> DataSpec:
    """``g = 0`` and time-independent ``f(xi) = exp(-|xi|)``.

    ``t_star`` (a point where the leading imaginary part is positive) does not
    change the data; it is where the matching probe is evaluated.
    """
    del t_star
    return DataSpec(g=Zero(), f=ExponentialDecay(1.0))


def drift_violation_data(axis: int, varsigma: float, delta: float, sign: int = 1) -> DataSpec:
    """``g = 0`` and ``f(eta e_j) = -i exp(-delta varsigma eta / 4)`` for ``eta >= 1``.

    ``axis`` counts from 1.  ``sign = -1`` puts the mass on the negative
    half-axis, for drifts whose imaginary part is negative.
    """
    if varsigma <= 0 or delta <= 0:
        raise ValueError("varsigma and delta must be positive")
    return DataSpec(g=Zero(), f=GevreyDecay(delta * varsigma / 4.0, 1.0, axis - 1, sign, -1j))


def extremal_profile(p: Order, q: Order, Gamma: float, gamma: float) -> Callable[[float], float]:
    """``x -> -Gamma x^(p+1)/(p+1) + gamma x^(q+1)/(q+1)``."""
    p, q = float(p), float(q)
    return lambda x: -Gamma * x ** (p + 1) / (p + 1) + gamma * x ** (q + 1) / (q + 1)


def default_ladder(p: Order, q: Order, Gamma: float, gamma: float) -> int:
    """Smallest integer ``l`` with ``1/l`` strictly inside the increasing window."""
    edge = (gamma / Gamma) ** (1.0 / float(p - q))
    ell = max(1, math.floor(1.0 / edge) + 1)
    return ell


def geometric_indices(n_min: int, n_max: int, per_octave: int = 1) -> list[int]:
    k = np.arange(0, per_octave * math.log2(n_max / n_min) + 1e-9 + 1)
    ns = np.unique(np.round(n_min * 2.0 ** (k / per_octave)).astype(int))
    return [int(n) for n in ns if n_min <= n <= n_max]


def degenerate_witness(
    point: DegeneratePoint,
    Gamma: float = 1.0,
    gamma: float = 1.0,
    ell: int | None = None,
    horizon: float = 1.0,
    ns: Sequence[int] | None = None,
    drift_sign: int = 1,
    exact: bool = False,
) -> tuple[DataSpec, ProbeSequence]:
    """Data and probe sequence certifying ill-posedness above the Gevrey threshold.

    Near ``t_k`` the leading imaginary part behaves like ``-alpha |t - t_k|^p``
    with ``alpha <= Gamma`` and the drift along the minimizing axis like
    ``beta |t - t_k|^q`` with ``|beta| >= gamma``.  The sign of ``beta`` is
    ``drift_sign``; a negative drift is probed along the negative axis.

    For an interior zero the data are a forcing ``-i exp(-theta eta^(1/rho))``
    and the probe approaches ``t_k`` from the left.  For ``t_k = 0`` they are
    an initial datum ``exp(-theta eta^(1/rho))`` and the probe approaches
    from the right.  With ``exact`` (coefficients exactly ``-Gamma t^p`` and
    ``gamma t^q`` near 0) the ``t_k = 0`` probe carries its closed form.

    Raises
    ------
    NotInK
        If ``p <= 2q + 1``.
    BadLadder
        If ``1/ell`` is not inside the window where the extremal profile increases.
    """
    if not point.in_K:
        raise NotInK(f"p={point.p}, q={point.q} does not satisfy p > 2q + 1")
    p, q = point.p, point.q
    rho = point.threshold
    nu = float(Fraction(1) / rho) if isinstance(rho, Fraction) else 1.0 / rho
    pq = float(p - q)
    edge = (gamma / Gamma) ** (1.0 / pq)
    ell = default_ladder(p, q, Gamma, gamma) if ell is None else int(ell)
    if not (ell >= 1 and 1.0 / ell < edge):
        raise BadLadder(f"1/ell = {1.0 / ell if ell else math.inf} not inside (0, {edge})")
    f = extremal_profile(p, q, Gamma, gamma)
    axis = point.minimizing_axis
    dim = len(point.q_j)
    sign = 1 if drift_sign >= 0 else -1
    ns = list(ns) if ns is not None else geometric_indices(16, 4096)

    def xi_of(n: int) -> tuple[int, ...]:
        e = [0] * dim
        e[axis] = sign * n
        return tuple(e)

    prov = "degenerate-witness" + ("-negative-drift" if sign < 0 else "")
    if point.t_k == 0.0:
        theta = f(1.0 / ell) / 2.0
        entries = []
        for n in ns:
            t_n = 1.0 / (ell * n ** (1.0 / pq))
            if t_n <= horizon:
                entries.append((n, t_n, xi_of(n)))
        data = DataSpec(g=GevreyDecay(theta, 1.0 / nu, axis, sign), f=Zero())
        closed = (lambda n: theta * n**nu) if exact else None
        seq = ProbeSequence(
            f"degenerate-initial p={p} q={q}", tuple(entries), closed,
            lambda n: theta * n**nu - 1e-9 * max(1.0, theta * n**nu), nu, (), prov + "-initial",
        )
        return data, seq

    varsigma = f(1.0 / (2 * ell)) - f(1.0 / (3 * ell))
    theta = varsigma / 2.0
    entries, comp = [], []
    for n in ns:
        scale = n ** (1.0 / pq)
        t_n = point.t_k - 1.0 / (3 * ell * scale)
        if t_n >= 0.0:
            entries.append((n, t_n, xi_of(n)))
            comp.append((point.t_k - 1.0 / (ell * scale), point.t_k - 1.0 / (2 * ell * scale)))
    if not entries:
        raise BadLadder(f"no probe time t_n >= 0 for t_k = {point.t_k}")
    data = DataSpec(g=Zero(), f=GevreyDecay(theta, 1.0 / nu, axis, sign, -1j))

    def bound(n: int) -> float:
        return -theta * n**nu + varsigma * n**nu - math.log(2 * ell * n ** (1.0 / pq))

    seq = ProbeSequence(f"degenerate p={p} q={q}", tuple(entries), None, bound, nu, tuple(comp), prov)
    return data, seq


# ---------------------------------------------------------------------------
# worked examples with closed forms


def flat_spec(well_posed: bool = False, horizon: float = 1.0) -> SymbolSpec:
    """Leading imaginary part ``-2 exp(-1/t^2)/t^3`` vanishing to infinite order at 0.

    The drift imaginary part is ``2 exp(-1/(5t^2))/(5t^3)`` (ill-posed
    variant) or ``2 exp(-1/t^2)/t^3`` (well-posed variant).
    """
    c2 = Named("flat_exp", -1.0, horizon, lam=1.0)
    c1 = Named("flat_exp", 1.0, horizon, lam=1.0 if well_posed else 5.0)
    return SymbolSpec.normal_form(c2, [c1], horizon)


def flat_probe(ns: Sequence[int] = (64, 256, 1024, 4096)) -> tuple[DataSpec, ProbeSequence]:
    """``g(eta) = exp(-eta^(1/2))`` and ``t_n = 1/sqrt(2 ln n)``; ``log|u| = n^(3/5) - n^(1/2) - 1``."""
    entries = [(n, 1.0 / math.sqrt(2.0 * math.log(n)), (n,)) for n in ns]
    data = DataSpec(g=GevreyDecay(1.0, 2.0, 0, 1), f=Zero())
    return data, ProbeSequence(
        "flat-profile", tuple(entries), lambda n: n**0.6 - n**0.5 - 1.0, None, None, (), "infinite-order-zero"
    )


def fourth_order_spec(horizon: float = 1.0) -> SymbolSpec:
    """``D_t + i(-5 t^4 D^4 + 3 t^2 D^3 + D^2 + 2 t D)`` on the circle."""
    return SymbolSpec.dx_power_form(
        {
            1: Polynomial([0.0, 2j], horizon),
            2: constant(1j, horizon),
            3: Polynomial([0.0, 0.0, 3j], horizon),
            4: Polynomial([0.0, 0.0, 0.0, 0.0, -5j], horizon),
        },
        horizon,
    )


def fourth_order_probe(ns: Sequence[int] = (64, 256, 1024, 4096)) -> tuple[DataSpec, ProbeSequence]:
    """``g(eta) = exp(-|eta|)`` and ``t_n = n^(-4/5)``."""
    entries = [(n, n ** (-0.8), (n,)) for n in ns]
    data = DataSpec(g=ExponentialDecay(1.0), f=Zero())
    return data, ProbeSequence(
        "fourth-order", tuple(entries),
        lambda n: -1.0 + n**0.6 + n**1.2 + n ** (-0.6) - n, None, None, (), "fourth-order",
    )


def axis_probe(label: str, ns: Sequence[int], t: float, axis: int = 0, dimension: int = 1,
               sign: int = 1) -> ProbeSequence:
    """Fixed time ``t`` and ``xi_n = sign * n * e_axis``."""
    def xi(n):
        e = [0] * dimension
        e[axis] = sign * n
        return tuple(e)
    return ProbeSequence(label, tuple((n, t, xi(n)) for n in ns))


# ---------------------------------------------------------------------------
# output


def write_probe_csv(report: ProbeReport, path: str | os.PathLike) -> None:
    """Columns ``n, t_n, xi_norm, logmag, expected_logmag, deviation``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "t_n", "xi_norm", "logmag", "expected_logmag", "deviation"])
        for r in report.rows:
            w.writerow([
                str(r.n), format_float(r.t_n), format_float(r.xi_norm), format_float(r.logmag),
                "" if r.expected_logmag is None else format_float(r.expected_logmag),
                "" if r.deviation is None else format_float(r.deviation),
            ])


def report_json(report: ProbeReport) -> str:
    return json.dumps(report.to_json_dict(), sort_keys=True, indent=2) + "\n"
