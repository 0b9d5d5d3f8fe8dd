"""Truncated Fourier data on the torus: storage, norms, decay fits, synthesis.

A :class:`SpectralField` holds log-domain coefficients on the box
``|xi|_inf <= Xi`` at a single time.  :func:`solve_cauchy` fills such fields
from a :class:`~torus_cauchy.symbol_ode.SymbolSpec` and a :class:`DataSpec`.
"""

from __future__ import annotations

import csv
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InsufficientData, MalformedStructure, OverflowGuard
from .logdomain import OVERFLOW_GUARD, LogComplex, log_abs_sum, wrap_phase
from .symbol_ode import SymbolSpec, duhamel_coefficient

THREADS_ENV = "TORUS_CAUCHY_THREADS"
S_RANGE = (1.0, 10.0)
MIN_FIT_SAMPLES = 8
# RMS residual allowed per unit of spread in the fitted log-magnitudes
FIT_RESIDUAL_TOL = 1e-2


# ---------------------------------------------------------------------------
# storage


def frequency_box(dimension: int, truncation: int) -> np.ndarray:
    """All ``xi`` with ``|xi|_inf <= truncation`` in lexicographic order."""
    if dimension < 1 or truncation < 0:
        raise MalformedStructure("dimension must be >= 1 and truncation >= 0")
    axis = np.arange(-truncation, truncation + 1)
    grids = np.meshgrid(*([axis] * dimension), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def _lex_order(freqs: np.ndarray) -> np.ndarray:
    return np.lexsort(freqs.T[::-1])


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients at time ``timestamp`` stored as log-magnitude and phase.

    ``frequencies`` is an ``(M, N)`` integer array in lexicographic order;
    frequencies that are not stored, and stored entries with
    ``logmag = -inf``, are exact zeros.  The arrays are made read-only.
    """

    dimension: int
    truncation: int
    timestamp: float
    frequencies: np.ndarray
    logmag: np.ndarray
    phase: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=np.int64).reshape(-1, self.dimension)
        lm = np.asarray(self.logmag, dtype=float).reshape(-1)
        ph = np.asarray(self.phase, dtype=float).reshape(-1)
        if not (freqs.shape[0] == lm.size == ph.size):
            raise MalformedStructure("frequencies, logmag and phase must have matching lengths")
        if freqs.size and np.max(np.abs(freqs)) > self.truncation:
            raise MalformedStructure(f"frequency outside |xi|_inf <= {self.truncation}")
        if np.any(np.isnan(lm)) or np.any(lm == np.inf):
            raise MalformedStructure("log-magnitudes must be finite or -inf")
        order = _lex_order(freqs)
        freqs, lm, ph = freqs[order], lm[order], ph[order]
        if freqs.shape[0] > 1 and np.any(np.all(freqs[1:] == freqs[:-1], axis=1)):
            raise MalformedStructure("duplicate frequency in field")
        ph = np.where(np.isfinite(lm), wrap_phase(ph), 0.0) if ph.size else ph
        for name, arr in (("frequencies", freqs), ("logmag", lm), ("phase", ph)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "timestamp", float(self.timestamp))
        object.__setattr__(self, "_index", {tuple(int(v) for v in x): k for k, x in enumerate(freqs)})

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_mapping(
        cls, dimension: int, truncation: int, timestamp: float, coefficients: Mapping[tuple, LogComplex | complex]
    ) -> "SpectralField":
        items = [(tuple(np.atleast_1d(k)), v if isinstance(v, LogComplex) else LogComplex.from_complex(v))
                 for k, v in coefficients.items()]
        freqs = np.array([k for k, _ in items], dtype=np.int64).reshape(-1, dimension)
        return cls(dimension, truncation, timestamp, freqs,
                   np.array([v.logmag for _, v in items]), np.array([v.phase for _, v in items]))

    @classmethod
    def zeros(cls, dimension: int, truncation: int, timestamp: float = 0.0) -> "SpectralField":
        freqs = frequency_box(dimension, truncation)
        n = freqs.shape[0]
        return cls(dimension, truncation, timestamp, freqs, np.full(n, -np.inf), np.zeros(n))

    def replace_values(self, logmag: np.ndarray, phase: np.ndarray, timestamp: float | None = None) -> "SpectralField":
        """Same frequencies with new values (arrays are in this field's order)."""
        ts = self.timestamp if timestamp is None else timestamp
        return SpectralField(self.dimension, self.truncation, ts, self.frequencies, logmag, phase)

    # -- access ---------------------------------------------------------

    def __len__(self) -> int:
        return self.frequencies.shape[0]

    def __getitem__(self, xi) -> LogComplex:
        k = self._index.get(tuple(int(v) for v in np.atleast_1d(xi)))
        if k is None:
            return LogComplex.zero()
        return LogComplex(self.logmag[k], self.phase[k])

    def items(self) -> Iterable[tuple[tuple[int, ...], LogComplex]]:
        for x, lm, ph in zip(self.frequencies, self.logmag, self.phase):
            yield tuple(int(v) for v in x), LogComplex(lm, ph)

    @property
    def norms(self) -> np.ndarray:
        """Euclidean ``|xi|`` of every stored frequency."""
        return np.sqrt(np.sum(self.frequencies.astype(float) ** 2, axis=1))

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.logmag == -np.inf))

    def to_complex(self) -> np.ndarray:
        """Linear-domain coefficients; raises :class:`OverflowGuard` past the guard."""
        if np.any(self.logmag >= OVERFLOW_GUARD):
            raise OverflowGuard(f"log-magnitude = {np.max(self.logmag):.17g} exceeds guard")
        return np.exp(self.logmag + 1j * self.phase)


# ---------------------------------------------------------------------------
# data generators


class Generator:
    """Fourier coefficients of a datum or a time-independent forcing."""

    def log_values(self, freqs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def value(self, xi) -> LogComplex:
        lm, ph = self.log_values(np.atleast_2d(np.asarray(xi, dtype=np.int64)))
        return LogComplex(lm[0], ph[0])

    @property
    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True)
class Zero(Generator):
    def log_values(self, freqs):
        n = np.shape(freqs)[0]
        return np.full(n, -np.inf), np.zeros(n)

    @property
    def is_zero(self) -> bool:
        return True


@dataclass(frozen=True)
class GevreyDecay(Generator):
    """``amplitude * exp(-delta |xi|^(1/s))``.

    With ``axis=None`` the decay is isotropic.  With ``axis=j`` only the
    points ``eta * e_j`` carry mass, ``eta >= 1`` times ``sign``; the decay
    variable is then ``eta``.  ``amplitude`` may be given in log form.
    """

    delta: float
    s: float = 1.0
    axis: int | None = None
    sign: int = 1
    amplitude: complex | LogComplex = 1.0

    def __post_init__(self):
        if not self.delta > 0:
            raise MalformedStructure("GevreyDecay needs delta > 0")
        if not self.s >= 1:
            raise MalformedStructure("GevreyDecay needs s >= 1")
        if self.sign not in (1, -1):
            raise MalformedStructure("sign must be +1 or -1")

    def _amp(self) -> LogComplex:
        a = self.amplitude
        return a if isinstance(a, LogComplex) else LogComplex.from_complex(a)

    def log_values(self, freqs):
        freqs = np.asarray(freqs, dtype=float)
        amp = self._amp()
        if self.axis is None:
            r = np.sqrt(np.sum(freqs**2, axis=1))
            lm = amp.logmag - self.delta * r ** (1.0 / self.s)
        else:
            eta = self.sign * freqs[:, self.axis]
            off = np.delete(freqs, self.axis, axis=1)
            on_ray = (eta >= 1) & np.all(off == 0, axis=1)
            lm = np.where(on_ray, amp.logmag - self.delta * np.abs(eta) ** (1.0 / self.s), -np.inf)
        ph = np.where(np.isfinite(lm), amp.phase, 0.0)
        return lm, ph


def ExponentialDecay(rate: float, axis: int | None = None, sign: int = 1, amplitude=1.0) -> GevreyDecay:
    """``amplitude * exp(-rate |xi|)`` (the analytic case ``s = 1``)."""
    return GevreyDecay(rate, 1.0, axis, sign, amplitude)


@dataclass(frozen=True)
class SingleMode(Generator):
    xi0: tuple[int, ...]
    amplitude: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "xi0", tuple(int(v) for v in np.atleast_1d(self.xi0)))

    def log_values(self, freqs):
        freqs = np.asarray(freqs, dtype=np.int64)
        hit = np.all(freqs == np.array(self.xi0)[None, :], axis=1)
        v = LogComplex.from_complex(self.amplitude)
        return np.where(hit, v.logmag, -np.inf), np.where(hit, v.phase, 0.0)


@dataclass(frozen=True)
class Table(Generator):
    """Explicit ``{xi: value}`` map; absent frequencies are zero."""

    entries: Mapping[tuple, complex | LogComplex]

    def log_values(self, freqs):
        n = np.shape(freqs)[0]
        lm, ph = np.full(n, -np.inf), np.zeros(n)
        for k, x in enumerate(np.asarray(freqs, dtype=np.int64)):
            key = tuple(int(v) for v in x)
            v = self.entries.get(key, self.entries.get(key[0]) if len(key) == 1 else None)
            if v is None:
                continue
            v = v if isinstance(v, LogComplex) else LogComplex.from_complex(v)
            lm[k], ph[k] = v.logmag, v.phase
        return lm, ph


@dataclass(frozen=True)
class DataSpec:
    """Initial datum ``g`` and forcing ``f``; the forcing is constant in time."""

    g: Generator = field(default_factory=Zero)
    f: Generator = field(default_factory=Zero)


# ---------------------------------------------------------------------------
# solve


def _worker_count(workers: int | None) -> int:
    cap = os.environ.get(THREADS_ENV)
    n = 1 if workers is None else int(workers)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _homogeneous_batch(spec: SymbolSpec, t: float, freqs: np.ndarray) -> np.ndarray:
    """``W(t, xi)`` for every row of ``freqs``."""
    if t == 0:
        return np.zeros(freqs.shape[0], dtype=complex)
    prims = np.array([complex(c.primitive(t)) for c in spec.coefficients()])
    x = freqs.astype(float)
    cols = [np.sum(x * x, axis=1), *x.T, np.ones(x.shape[0])]
    cols += [x[:, 0] ** m for m, _ in spec.extra_monomials]
    return np.stack(cols, axis=1) @ prims


def solve_cauchy(
    spec: SymbolSpec,
    data: DataSpec,
    times: Sequence[float],
    truncation: int,
    nodes_per_unit: int | None = None,
    adaptive: bool = True,
    workers: int | None = None,
) -> list[SpectralField]:
    """Fourier coefficients of the solution at each requested time.

    Frequencies without forcing use the closed-form propagator directly;
    forced frequencies go through :func:`duhamel_coefficient`.  Results do
    not depend on ``workers``.
    """
    times = [float(t) for t in times]
    if truncation < 1:
        raise MalformedStructure("truncation must be >= 1")
    if any(b < a for a, b in zip(times, times[1:])):
        raise MalformedStructure("times must be sorted")
    freqs = frequency_box(spec.dimension, truncation)
    g_lm, g_ph = data.g.log_values(freqs)
    f_lm, f_ph = data.f.log_values(freqs)
    forced = np.flatnonzero(np.isfinite(f_lm))

    def nodes_for(t: float) -> int | None:
        return None if nodes_per_unit is None else max(8, math.ceil(nodes_per_unit * t))

    def one(args):
        k, t = args
        return duhamel_coefficient(
            spec, LogComplex(g_lm[k], g_ph[k]), LogComplex(f_lm[k], f_ph[k]), t, freqs[k],
            nodes=nodes_for(t), adaptive=adaptive,
        )

    out = []
    n_workers = _worker_count(workers)
    for t in times:
        w = _homogeneous_batch(spec, t, freqs)
        with np.errstate(invalid="ignore"):
            lm = np.where(np.isfinite(g_lm), g_lm + w.imag, -np.inf)
        ph = np.where(np.isfinite(lm), g_ph - w.real, 0.0)
        if forced.size and t > 0:
            jobs = [(int(k), t) for k in forced]
            if n_workers > 1:
                with ThreadPoolExecutor(n_workers) as pool:
                    vals = list(pool.map(one, jobs))
            else:
                vals = [one(j) for j in jobs]
            for (k, _), v in zip(jobs, vals):
                lm[k], ph[k] = v.logmag, v.phase
        out.append(SpectralField(spec.dimension, truncation, t, freqs, lm, ph))
    return out


# ---------------------------------------------------------------------------
# norms and fits


def sobolev_log_norm(fld: SpectralField, r: float) -> float:
    """``log`` of :func:`sobolev_norm`; ``-inf`` for the zero field."""
    terms = 2.0 * fld.logmag + 2.0 * r * np.log1p(fld.norms)
    if terms.size == 0:
        return -math.inf
    return 0.5 * log_abs_sum(terms)


def sobolev_norm(fld: SpectralField, r: float) -> float:
    """``(sum |u(xi)|^2 (1 + |xi|)^(2r))^(1/2)``; ``inf`` once past the overflow guard."""
    lg = sobolev_log_norm(fld, r)
    if lg >= OVERFLOW_GUARD:
        return math.inf
    return math.exp(lg)


@dataclass(frozen=True)
class DecayFit:
    """Least-squares model ``logmag ~ log C - delta |xi|^(1/s)``.

    ``residual`` is the RMS regression residual.  ``diagnostic`` is
    ``"ok"``, ``"positive-slope"`` (magnitudes grow along the ray),
    ``"clamped"`` (best ``s`` pinned at a range end with a poor fit) or
    ``"poor-fit"``.
    """

    s_hat: float
    delta_hat: float
    residual: float
    admissible: bool
    log_c: float = 0.0
    samples: int = 0
    ray: tuple[int, ...] = ()
    diagnostic: str = "ok"


def _fit_at(x: np.ndarray, y: np.ndarray, s: float) -> tuple[float, float, float]:
    z = x ** (1.0 / s)
    A = np.stack([np.ones_like(z), -z], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return rms, float(coef[1]), float(coef[0])


def _golden_min(fun, lo: float, hi: float, tol: float = 1e-10) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol * max(1.0, abs(a) + abs(b)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def fit_ray(x: Sequence[float], y: Sequence[float], s_range: tuple[float, float] = S_RANGE) -> DecayFit:
    """Fit one ray of samples ``(|xi|, logmag)``.

    A coarse scan of ``log s`` brackets the minimum, which is then refined by
    golden-section search; the residual need not be unimodal over the whole
    range.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(y) & (x > 0)
    x, y = x[keep], y[keep]
    if x.size < MIN_FIT_SAMPLES:
        raise InsufficientData(f"need >= {MIN_FIT_SAMPLES} nonzero magnitudes, got {x.size}")
    lo, hi = s_range
    grid = np.geomspace(lo, hi, 41)
    res = np.array([_fit_at(x, y, s)[0] for s in grid])
    k = int(np.argmin(res))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    s_hat = _golden_min(lambda s: _fit_at(x, y, s)[0], a, b)
    if _fit_at(x, y, grid[k])[0] < _fit_at(x, y, s_hat)[0]:
        s_hat = float(grid[k])
    rms, delta, log_c = _fit_at(x, y, s_hat)
    spread = max(1.0, float(np.std(y)))
    good = rms <= FIT_RESIDUAL_TOL * spread
    at_edge = min(abs(s_hat - lo), abs(s_hat - hi)) < 1e-6 * hi
    if delta <= 0:
        diagnostic = "positive-slope"
    elif good:
        diagnostic = "ok"
    elif at_edge:
        diagnostic = "clamped"
    else:
        diagnostic = "poor-fit"
    return DecayFit(s_hat, delta, rms, diagnostic == "ok", log_c, int(x.size), (), diagnostic)


def _rays(dimension: int) -> list[tuple[int, ...]]:
    rays = []
    for j in range(dimension):
        for sgn in (1, -1):
            e = [0] * dimension
            e[j] = sgn
            rays.append(tuple(e))
    if dimension > 1:
        for signs in itertools.product((1, -1), repeat=dimension):
            rays.append(signs)
    return rays


def gevrey_fit(fld: SpectralField, rays: Sequence[tuple[int, ...]] | None = None) -> DecayFit:
    """Worst (largest ``s_hat``) Gevrey decay fit over coordinate and diagonal rays.

    Rays with fewer than eight nonzero samples are skipped; an
    inadmissible ray fit is reported ahead of any admissible one.

    Raises
    ------
    InsufficientData
        If no ray has enough samples.
    """
    rays = _rays(fld.dimension) if rays is None else [tuple(r) for r in rays]
    fits = []
    for ray in rays:
        d = np.array(ray, dtype=np.int64)
        ks = np.arange(1, fld.truncation + 1)
        pts = ks[:, None] * d[None, :]
        vals = [fld[p] for p in pts]
        y = np.array([v.logmag for v in vals])
        x = ks * float(np.linalg.norm(d))
        try:
            fit = fit_ray(x, y)
        except InsufficientData:
            continue
        fits.append(DecayFit(fit.s_hat, fit.delta_hat, fit.residual, fit.admissible,
                             fit.log_c, fit.samples, ray, fit.diagnostic))
    if not fits:
        raise InsufficientData("no ray carries enough nonzero magnitudes")
    return max(fits, key=lambda f: (not f.admissible, f.s_hat))


# ---------------------------------------------------------------------------
# synthesis and CSV


def synthesize(fld: SpectralField, grid_points_per_dim: int) -> np.ndarray:
    """Samples ``u(x) = sum u(xi) exp(i xi.x)`` on the uniform grid ``x_m = 2 pi m / P``."""
    coef = fld.to_complex()
    P = int(grid_points_per_dim)
    x = 2.0 * np.pi * np.arange(P) / P
    live = np.flatnonzero(coef != 0)
    shape = (P,) * fld.dimension
    if live.size == 0:
        return np.zeros(shape, dtype=complex)
    c = coef[live]
    factors = [np.exp(1j * np.outer(fld.frequencies[live, j], x)) for j in range(fld.dimension)]
    letters = "abc"[: fld.dimension]
    expr = "k," + ",".join(f"k{ch}" for ch in letters) + "->" + letters
    return np.einsum(expr, c, *factors)


def format_float(v: float) -> str:
    if v == -math.inf:
        return "-inf"
    if v == math.inf:
        return "inf"
    return format(float(v), ".17g")


def write_field_csv(fld: SpectralField, path: str | os.PathLike) -> None:
    """Columns ``xi_1..xi_N, logmag, phase`` in lexicographic frequency order."""
    header = [f"xi_{j + 1}" for j in range(fld.dimension)] + ["logmag", "phase"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for x, lm, ph in zip(fld.frequencies, fld.logmag, fld.phase):
            w.writerow([str(int(v)) for v in x] + [format_float(lm), format_float(ph)])


def read_field_csv(path: str | os.PathLike, timestamp: float = 0.0) -> SpectralField:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    n = sum(1 for h in header if h.startswith("xi_"))
    if n == 0 or header[n:] != ["logmag", "phase"]:
        raise MalformedStructure(f"unexpected field CSV header {header!r}")
    freqs = np.array([[int(v) for v in r[:n]] for r in body], dtype=np.int64).reshape(-1, n)
    lm = np.array([float(r[n]) for r in body])
    ph = np.array([float(r[n + 1]) for r in body])
    trunc = int(np.max(np.abs(freqs))) if freqs.size else 1
    return SpectralField(n, max(trunc, 1), timestamp, freqs, lm, ph)
