"""Well-posedness verdicts from the declared structure of imaginary parts.

Only the imaginary parts ``c2 = Im a2`` and ``c1_j = Im a1_j`` matter.  The
decision tree:

1. ``c2 > 0`` somewhere: ill-posed in every scale.
2. ``c2 < 0`` on all of ``[0, T]``: well-posed in every scale.
3. ``c2 == 0`` and every ``c1_j == 0``: well-posed in every scale.
4. ``c2 == 0`` on an interval where some ``c1_j`` is not identically zero:
   ill-posed in every scale.
5. ``c2 <= 0`` with finitely many zeros ``t_k`` of order ``p_k``.  With
   ``q_k`` the smallest vanishing order of the drifts at ``t_k`` and
   ``K = {k : p_k > 2 q_k + 1}``: if ``K`` is empty the problem is
   well-posed everywhere, otherwise ``G^tau`` is well-posed exactly for
   ``tau < rho = min_K (p_k - q_k) / (p_k - 2 q_k - 1)``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import MalformedStructure, Unclassifiable
from .symbol_ode import SymbolSpec
from .time_coeffs import (
    Factored,
    Named,
    Polynomial,
    Sampled,
    TimeCoefficient,
    VanishingProfile,
    estimate_order,
)

Order = Union[Fraction, float]
INF = math.inf


def as_order(x) -> Order:
    """Exact ``Fraction`` when ``x`` is (close to) a simple rational, else ``float``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    x = float(x)
    if math.isinf(x):
        return INF
    if math.isnan(x):
        raise MalformedStructure("order must not be NaN")
    frac = Fraction(x).limit_denominator(10**6)
    return frac if abs(float(frac) - x) <= 1e-12 * max(1.0, abs(x)) else x


# ---------------------------------------------------------------------------
# declared structure


@dataclass(frozen=True)
class DegeneratePoint:
    """Zero ``t_k`` of ``c2`` of order ``p`` with drift orders ``q_j`` (``inf`` if ``c1_j == 0`` near ``t_k``)."""

    t_k: float
    p: Order
    q_j: tuple[Order, ...]
    profile: VanishingProfile | None = None
    drift_profiles: tuple[VanishingProfile | None, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "p", as_order(self.p))
        object.__setattr__(self, "q_j", tuple(as_order(q) for q in self.q_j))
        if not self.q_j:
            raise MalformedStructure("a degenerate point needs one drift order per dimension")
        if not (self.p > 0 and self.p != INF):
            raise MalformedStructure(f"leading order p must be finite and > 0, got {self.p}")
        if any(q < 0 for q in self.q_j):
            raise MalformedStructure("drift orders must be >= 0")

    @property
    def q(self) -> Order:
        return min(self.q_j)

    @property
    def in_K(self) -> bool:
        return self.q != INF and self.p > 2 * self.q + 1

    @property
    def threshold(self) -> Order:
        """``(p - q)/(p - 2q - 1)`` for points in ``K``, ``inf`` otherwise."""
        if not self.in_K:
            return INF
        return (self.p - self.q) / (self.p - 2 * self.q - 1)

    @property
    def minimizing_axis(self) -> int:
        return int(min(range(len(self.q_j)), key=lambda j: (self.q_j[j], j)))


@dataclass(frozen=True)
class SomewherePositive:
    t_star: float


@dataclass(frozen=True)
class StrictlyNegative:
    pass


@dataclass(frozen=True)
class IdenticallyZero:
    """``c2 == 0`` on ``interval`` (``None`` means the whole horizon) and ``<= 0`` elsewhere."""

    interval: tuple[float, float] | None = None


@dataclass(frozen=True)
class DegenerateNonpositive:
    zeros: tuple[DegeneratePoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "zeros", tuple(self.zeros))
        if not self.zeros:
            raise MalformedStructure("degenerate leading part needs at least one zero")
        locs = [z.t_k for z in self.zeros]
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise MalformedStructure("zeros must be strictly increasing")
        dims = {len(z.q_j) for z in self.zeros}
        if len(dims) != 1:
            raise MalformedStructure("all zeros must carry the same number of drift orders")


@dataclass(frozen=True)
class InfiniteOrderSuspect:
    t_k: float = 0.0


Leading = Union[SomewherePositive, StrictlyNegative, IdenticallyZero, DegenerateNonpositive, InfiniteOrderSuspect]


@dataclass(frozen=True)
class DriftZero:
    """``c1_j == 0`` on the whole horizon."""


@dataclass(frozen=True)
class NonzeroOnInterval:
    interval: tuple[float, float]


@dataclass(frozen=True)
class DegenerateOrders:
    """Vanishing orders of ``c1_j`` at the zeros of ``c2``, keyed by zero location."""

    orders: tuple[tuple[float, Order], ...]

    def order_at(self, t_k: float) -> Order:
        for loc, q in self.orders:
            if math.isclose(loc, t_k, abs_tol=1e-12):
                return as_order(q)
        return Fraction(0)


Drift = Union[DriftZero, NonzeroOnInterval, DegenerateOrders]


@dataclass(frozen=True)
class ImaginaryStructure:
    dimension: int
    leading: Leading
    drifts: tuple[Drift, ...] = field(default=())

    def __post_init__(self):
        drifts = tuple(self.drifts) if self.drifts else tuple(DriftZero() for _ in range(self.dimension))
        object.__setattr__(self, "drifts", drifts)
        if len(drifts) != self.dimension:
            raise MalformedStructure(f"expected {self.dimension} drift declarations, got {len(drifts)}")
        if isinstance(self.leading, DegenerateNonpositive):
            for z in self.leading.zeros:
                if len(z.q_j) != self.dimension:
                    raise MalformedStructure("drift orders do not match the dimension")
                for j, d in enumerate(drifts):
                    if isinstance(d, DriftZero) and z.q_j[j] != INF:
                        raise MalformedStructure(f"drift {j} is identically zero but q={z.q_j[j]} at t={z.t_k}")
                    if isinstance(d, DegenerateOrders) and d.order_at(z.t_k) != z.q_j[j]:
                        raise MalformedStructure(f"drift {j} order at t={z.t_k} disagrees with the zero declaration")

    @classmethod
    def degenerate(cls, points: Sequence[DegeneratePoint]) -> "ImaginaryStructure":
        """Structure whose drift declarations are read off the points."""
        points = tuple(points)
        n = len(points[0].q_j)
        drifts = []
        for j in range(n):
            qs = [(z.t_k, z.q_j[j]) for z in points]
            drifts.append(DriftZero() if all(q == INF for _, q in qs) else DegenerateOrders(tuple(qs)))
        return cls(n, DegenerateNonpositive(points), tuple(drifts))


# ---------------------------------------------------------------------------
# verdicts


class Posedness(enum.Enum):
    WELL_POSED = "well-posed"
    WELL_POSED_FINITE_LOSS = "well-posed-finite-loss"
    ILL_POSED = "ill-posed"

    @property
    def well(self) -> bool:
        return self is not Posedness.ILL_POSED


WP, WPL, IP = Posedness.WELL_POSED, Posedness.WELL_POSED_FINITE_LOSS, Posedness.ILL_POSED


@dataclass(frozen=True)
class Verdict:
    """Well-posedness in ``H^r``, ``C^inf``, the Gevrey scale and ``C^omega``.

    ``gevrey_threshold`` is ``rho`` with ``G^tau`` well-posed iff
    ``tau < rho``.  Verdicts that are ill-posed in every scale store
    ``rho = 1``.
    """

    sobolev: Posedness
    smooth: Posedness
    gevrey_threshold: Order
    analytic: Posedness
    provenance: str

    def gevrey(self, tau: float) -> Posedness:
        return WP if tau < self.gevrey_threshold else IP

    def to_json_dict(self) -> dict:
        rho = self.gevrey_threshold
        return {
            "sobolev": self.sobolev.value,
            "smooth": self.smooth.value,
            "gevrey_threshold": "inf" if rho == INF else float(rho),
            "analytic": self.analytic.value,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _everywhere(ok: bool, provenance: str) -> Verdict:
    if ok:
        return Verdict(WP, WP, INF, WP, provenance)
    return Verdict(IP, IP, Fraction(1), IP, provenance)


def gevrey_threshold(points: Sequence[DegeneratePoint]) -> Order:
    """``min`` over ``K`` of ``(p - q)/(p - 2q - 1)``; ``inf`` when ``K`` is empty."""
    vals = [z.threshold for z in points if z.in_K]
    return min(vals) if vals else INF


def classify(structure: ImaginaryStructure) -> Verdict:
    """Run the decision tree on a declared structure.

    Raises
    ------
    Unclassifiable
        For a leading part that vanishes to infinite order; no
        characterization exists there.
    """
    lead = structure.leading
    drifts = structure.drifts
    if isinstance(lead, InfiniteOrderSuspect):
        raise Unclassifiable(
            f"leading imaginary part vanishes to infinite order at t={lead.t_k}; "
            "well-posedness is not determined by vanishing orders there"
        )
    if isinstance(lead, SomewherePositive):
        return _everywhere(False, "leading-imaginary-positive")
    if isinstance(lead, StrictlyNegative):
        return _everywhere(True, "parabolic")
    if isinstance(lead, IdenticallyZero):
        if all(isinstance(d, DriftZero) for d in drifts):
            return _everywhere(True, "no-imaginary-drift")
        return _everywhere(False, "drift-without-damping")
    if isinstance(lead, DegenerateNonpositive):
        rho = gevrey_threshold(lead.zeros)
        if rho == INF:
            return _everywhere(True, "degenerate-orders")
        return Verdict(IP, IP, rho, WP, "degenerate-orders")
    raise MalformedStructure(f"unknown leading declaration {lead!r}")


def hierarchy_check(v: Verdict) -> bool:
    """Whether ``v`` respects ``H^r => C^inf => G^s1 => G^s2 (s2 <= s1) => C^omega``."""
    rho = v.gevrey_threshold
    if not rho >= 1:
        return False
    if v.sobolev.well and not v.smooth.well:
        return False
    if v.smooth is WPL:
        return False
    if v.smooth.well and rho != INF:
        return False
    analytic_expected = rho > 1
    if v.analytic.well != analytic_expected:
        return False
    if not v.analytic.well and (v.smooth.well or v.sobolev.well):
        return False
    return True


# ---------------------------------------------------------------------------
# structure from coefficients

_SIGN_TOL = 1e-12
_SCAN = 4097


def _scan_grid(horizon: float, extra: Sequence[float] = ()) -> np.ndarray:
    return np.unique(np.concatenate([np.linspace(0.0, horizon, _SCAN), np.asarray(extra, dtype=float)]))


# a root of multiplicity m moves by about eps**(1/m) under rounding; clusters this
# close together are read as one multiple root
_ROOT_CLUSTER = 1e-2


def _poly_zeros(c: np.ndarray, horizon: float) -> list[tuple[float, int]]:
    """Real zeros of the real polynomial ``c`` in ``[0, T]`` with multiplicities."""
    c = np.trim_zeros(np.asarray(c, dtype=float), "b")
    if c.size <= 1:
        return []
    roots = sorted(np.polynomial.polynomial.polyroots(c), key=lambda r: (r.real, r.imag))
    clusters: list[list[complex]] = []
    for r in roots:
        for cl in clusters:
            if min(abs(r - x) for x in cl) < _ROOT_CLUSTER:
                cl.append(r)
                break
        else:
            clusters.append([r])
    out = []
    for cl in clusters:
        center = complex(np.mean(cl))
        if abs(center.imag) <= 1e-6 and -1e-9 <= center.real <= horizon + 1e-9:
            out.append((min(max(center.real, 0.0), horizon), len(cl)))
    return sorted(out)


def _imag_coefficient(coef: TimeCoefficient) -> TimeCoefficient:
    return coef.imaginary_part()


def _zeros_and_orders(coef: TimeCoefficient, horizon: float) -> tuple[list[tuple[float, Order]], bool]:
    """Zeros of ``Im coef`` on ``[0, T]`` with their orders; flag infinite-order zeros."""
    part = _imag_coefficient(coef)
    if isinstance(coef, Polynomial):
        return [(z, Fraction(m)) for z, m in _poly_zeros(np.imag(coef.coeffs), horizon)], False
    if isinstance(coef, Named):
        if coef.amplitude.imag == 0:
            return [], False
        if coef.infinite_order_zero is not None:
            return [(coef.infinite_order_zero, INF)], True
        if 0.0 <= coef.t0 <= horizon and coef.p > 0:
            return [(coef.t0, as_order(coef.p))], False
        return [], False
    if isinstance(coef, Factored):
        rem_zeros = _poly_zeros(np.imag(coef.remainder.coeffs), horizon)
        out: dict[float, Order] = {z.zero: as_order(z.order) for z in coef.zeros}
        for z, m in rem_zeros:
            hit = [k for k in out if math.isclose(z, k, abs_tol=1e-6)]
            if hit:
                out[hit[0]] = out[hit[0]] + m
            else:
                out[z] = Fraction(m)
        return sorted((k, v) for k, v in out.items() if v > 0), False
    if isinstance(coef, Sampled):
        raise MalformedStructure("sampled coefficients need an explicit structure declaration")
    # generic fallback: locate sign-free minima of |c| on a grid and estimate the order
    grid = _scan_grid(horizon)
    vals = np.abs(np.imag(coef.eval(grid)))
    top = float(np.max(vals))
    if top == 0.0:
        return [], False
    zs = [float(t) for t, v in zip(grid, vals) if v <= 1e-12 * top]
    found: list[tuple[float, Order]] = []
    suspect = False
    for z in zs:
        if found and z - found[-1][0] < 1e-6:
            continue
        est = estimate_order(part, z, part="imag")
        suspect = suspect or est.infinite_order_suspect
        found.append((z, INF if est.infinite_order_suspect else as_order(round(est.order * 2) / 2)))
    return found, suspect


def _is_identically_zero(coef: TimeCoefficient, horizon: float) -> bool:
    part = _imag_coefficient(coef)
    if part.is_zero:
        return True
    if isinstance(coef, (Polynomial, Named, Factored)):
        return False
    grid = _scan_grid(horizon)
    return not np.any(np.imag(coef.eval(grid)))


def structure_from_spec(spec: SymbolSpec) -> ImaginaryStructure:
    """Derive the imaginary structure of a second-order spec.

    Only ``Im a2`` and ``Im a1_j`` are inspected, so a spec and its normal
    form always give the same structure.

    Raises
    ------
    Unclassifiable
        For higher-order symbols (extra monomials).
    MalformedStructure
        For sampled coefficients, whose zero orders cannot be certified.
    """
    if spec.extra_monomials:
        raise Unclassifiable("symbols of order above two are outside the classified family")
    T = spec.horizon
    a2 = spec.a2
    drifts_zero = [_is_identically_zero(c, T) for c in spec.a1]

    def drift_nonzero_decl() -> tuple[Drift, ...]:
        return tuple(DriftZero() if z else NonzeroOnInterval((0.0, T)) for z in drifts_zero)

    if _is_identically_zero(a2, T):
        return ImaginaryStructure(spec.dimension, IdenticallyZero(None), drift_nonzero_decl())

    zeros, suspect = _zeros_and_orders(a2, T)
    grid = _scan_grid(T, [z for z, _ in zeros])
    c2 = np.imag(a2.eval(grid))
    top = float(np.max(np.abs(c2)))
    if np.max(c2) > _SIGN_TOL * max(top, 1.0):
        return ImaginaryStructure(spec.dimension, SomewherePositive(float(grid[int(np.argmax(c2))])), drift_nonzero_decl())
    if suspect:
        t_k = next(z for z, p in zeros if p == INF)
        return ImaginaryStructure(spec.dimension, InfiniteOrderSuspect(t_k), drift_nonzero_decl())
    if not zeros:
        return ImaginaryStructure(spec.dimension, StrictlyNegative(), drift_nonzero_decl())

    drift_orders = []
    for c, is_zero in zip(spec.a1, drifts_zero):
        if is_zero:
            drift_orders.append(None)
            continue
        dz, _ = _zeros_and_orders(c, T)
        drift_orders.append(dz)
    points = []
    for t_k, p in zeros:
        q_j = []
        for dz in drift_orders:
            if dz is None:
                q_j.append(INF)
                continue
            match = [q for z, q in dz if math.isclose(z, t_k, abs_tol=1e-6)]
            q_j.append(match[0] if match else Fraction(0))
        points.append(DegeneratePoint(t_k, p, tuple(q_j)))
    return ImaginaryStructure.degenerate(points)


def classify_spec(spec: SymbolSpec) -> Verdict:
    return classify(structure_from_spec(spec))


# ---------------------------------------------------------------------------
# JSON declarations


def _order_from_json(x) -> Order:
    if isinstance(x, str):
        if x in ("inf", "+inf", "infinity"):
            return INF
        return as_order(Fraction(x))
    return as_order(x)


def structure_from_json(doc: dict, dimension: int) -> ImaginaryStructure:
    """Parse a ``structure`` block.

    ``{"leading": "somewhere-positive", "t_star": 0.3}``,
    ``{"leading": "strictly-negative"}``,
    ``{"leading": "identically-zero", "drifts": ["zero" | "nonzero", ...]}``,
    ``{"leading": "degenerate", "zeros": [{"t": 0.5, "p": 4, "q": [0]}]}`` or
    ``{"leading": "infinite-order", "t": 0}``.
    """
    kind = doc["leading"]
    drifts_doc = doc.get("drifts")

    def simple_drifts() -> tuple[Drift, ...]:
        if drifts_doc is None:
            return tuple(DriftZero() for _ in range(dimension))
        return tuple(DriftZero() if d == "zero" else NonzeroOnInterval(tuple(doc.get("interval", (0.0, 1.0))))
                     for d in drifts_doc)

    if kind == "somewhere-positive":
        return ImaginaryStructure(dimension, SomewherePositive(float(doc.get("t_star", 0.0))), simple_drifts())
    if kind == "strictly-negative":
        return ImaginaryStructure(dimension, StrictlyNegative(), simple_drifts())
    if kind == "identically-zero":
        iv = doc.get("interval")
        return ImaginaryStructure(dimension, IdenticallyZero(tuple(iv) if iv else None), simple_drifts())
    if kind == "infinite-order":
        return ImaginaryStructure(dimension, InfiniteOrderSuspect(float(doc.get("t", 0.0))), simple_drifts())
    if kind == "degenerate":
        pts = [DegeneratePoint(float(z["t"]), _order_from_json(z["p"]), tuple(_order_from_json(q) for q in z["q"]))
               for z in doc["zeros"]]
        st = ImaginaryStructure.degenerate(pts)
        if st.dimension != dimension:
            raise MalformedStructure("structure drift orders do not match the dimension")
        return st
    raise MalformedStructure(f"unknown leading kind {kind!r}")
