"""Distribution engine for finite convolutions of independent gamma variables.

A convolution sum(scale_i * gamma(shape_i, 1)) is represented by a single
series expansion around the smallest scale beta1:

    F(x) = sum_k w_k P(rho + k, x / beta1),    rho = sum(shape_i)

with mixture weights w_k >= 0 summing to 1 (the classical recursive scheme:
w_0 = prod(beta1/beta_i)^shape_i and (k+1) w_{k+1} = sum_{i=1..k+1} c_i
w_{k+1-i} with c_i = sum_j shape_j (1 - beta1/beta_j)^i).  Truncation is by
accumulated weight: the omitted mass 1 - sum w_k bounds the CDF error
directly.  Per-term magnitudes are evaluated in log space against a per-index
log-gamma table; the weight recurrence itself runs in linear space where its
terms are probabilities.  Naive evaluation of the scaled series coefficients
underflows for extreme scale ratios, hence the split.

Densities and their first two x-derivatives come from differentiating the
series termwise; the same truncation bound applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from . import specfun
from .errors import ConvergenceError, DomainError

__all__ = [
    "GammaComponent",
    "GammaConvolution",
    "make_convolution",
    "EcdfBand",
    "ecdf_band",
    "h1_closed",
    "h2_closed",
    "TAIL_TARGET",
    "MAX_TERMS",
]

TAIL_TARGET = 1e-14
MAX_TERMS = 100_000
_SCALE_MERGE_RTOL = 1e-12
_BRACKET_MAX_ITER = 200
_EVAL_CHUNK = 512
_UNDERFLOW_LOG_FLOOR = -700.0


@dataclass(frozen=True)
class GammaComponent:
    """One gamma(shape, 1) variable multiplied by a positive scale."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (math.isfinite(self.shape) and self.shape > 0.0):
            raise DomainError(f"component shape must be positive and finite, got {self.shape!r}")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise DomainError(f"component scale must be positive and finite, got {self.scale!r}")


@dataclass(frozen=True)
class _Series:
    beta1: float
    rho: float
    weights: np.ndarray  # w_k, k = 0..K-1
    lgam: np.ndarray  # lnGamma(rho + k), k = 0..K
    tail: float  # 1 - sum(weights), in [0, TAIL_TARGET]


@dataclass(frozen=True)
class GammaConvolution:
    """Canonical, immutable convolution of gamma components.

    Components are stored sorted by scale; components whose scales agree to
    relative 1e-12 are merged by adding shapes.  Hashable, so instances can
    key caches.
    """

    components: tuple[GammaComponent, ...]

    def __post_init__(self):
        if not self.components:
            raise DomainError("a convolution needs at least one component")
        comps = sorted(self.components, key=lambda c: (c.scale, c.shape))
        merged: list[GammaComponent] = [comps[0]]
        for c in comps[1:]:
            last = merged[-1]
            if c.scale - last.scale <= _SCALE_MERGE_RTOL * c.scale:
                merged[-1] = GammaComponent(last.shape + c.shape, last.scale)
            else:
                merged.append(c)
        object.__setattr__(self, "components", tuple(merged))

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def total_shape(self) -> float:
        return math.fsum(c.shape for c in self.components)

    @property
    def mean(self) -> float:
        return math.fsum(c.shape * c.scale for c in self.components)

    @property
    def variance(self) -> float:
        return math.fsum(c.shape * c.scale * c.scale for c in self.components)

    @property
    def error_estimate(self) -> float:
        """Conservative absolute error bound for cdf/density values."""
        return self._series.tail + 2e-12

    @cached_property
    def _series(self) -> _Series:
        return _build_series(self.components)

    # -- evaluation ------------------------------------------------------

    def cdf(self, x):
        """P(sum <= x); vectorized, clamped to [0, 1]."""
        return _eval(self, np.asarray(x, dtype=float), _cdf_chunk)

    def density(self, x, order: int = 0):
        """Density (order 0) or its first/second x-derivative (order 1/2)."""
        if order not in (0, 1, 2):
            raise DomainError(f"order must be 0, 1 or 2, got {order!r}")
        return _eval(self, np.asarray(x, dtype=float), lambda s, xs: _density_chunk(s, xs, order))

    def quantile(self, p: float) -> float:
        """Inverse CDF for 0 < p < 1, geometric bracket expansion + Brent."""
        p = float(p)
        if not (0.0 < p < 1.0):
            raise DomainError(f"quantile requires 0 < p < 1, got {p!r}")
        lo = max(self.mean * 1e-3, 5e-300)
        hi = self.mean + 10.0 * math.sqrt(self.variance)
        it = 0
        while float(self.cdf(lo)) >= p:
            lo /= 8.0
            it += 1
            if it > _BRACKET_MAX_ITER:
                raise ConvergenceError(f"quantile bracket search failed at p={p}")
        it = 0
        while float(self.cdf(hi)) <= p:
            hi *= 2.0
            it += 1
            if it > _BRACKET_MAX_ITER:
                raise ConvergenceError(f"quantile bracket search failed at p={p}")
        root = brentq(lambda t: float(self.cdf(t)) - p, lo, hi,
                      xtol=5e-280, rtol=4 * np.finfo(float).eps, maxiter=200)
        if abs(float(self.cdf(root)) - p) > 1e-10:
            raise ConvergenceError(f"quantile did not meet tolerance at p={p}")
        return float(root)

    def sample(self, n: int, seed) -> np.ndarray:
        """n independent draws, deterministic given seed."""
        if n < 0:
            raise DomainError(f"sample size must be nonnegative, got {n!r}")
        rng = np.random.default_rng(seed)
        out = np.zeros(n)
        for c in self.components:
            out += c.scale * _gamma_variates(rng, c.shape, n)
        return out


def make_convolution(alpha: float, weights: Sequence[float],
                     supplements: Sequence[int] = ()) -> GammaConvolution:
    """Convolution sum(weights_i * gamma(alpha, 1)) at common shape alpha.

    Zero weights are dropped.  Each index in `supplements` adds one unit of
    shape to that weight's component (an independent exponential at the same
    scale); supplement indices must point at positive weights.
    """
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise DomainError(f"alpha must be positive and finite, got {alpha!r}")
    ws = [float(w) for w in weights]
    if not ws:
        raise DomainError("weights must be nonempty")
    for w in ws:
        if not math.isfinite(w) or w < 0.0:
            raise DomainError(f"weights must be nonnegative and finite, got {w!r}")
    extra = [0] * len(ws)
    for i in supplements:
        if not (0 <= int(i) < len(ws)):
            raise DomainError(f"supplement index {i!r} out of range")
        if ws[int(i)] == 0.0:
            raise DomainError(f"supplement index {i!r} points at a zero weight")
        extra[int(i)] += 1
    comps = [GammaComponent(alpha + k, w) for w, k in zip(ws, extra) if w > 0.0]
    if not comps:
        raise DomainError("all weights are zero")
    return GammaConvolution(tuple(comps))


# -- series construction --------------------------------------------------


def _build_series(components: tuple[GammaComponent, ...]) -> _Series:
    shapes = np.array([c.shape for c in components])
    scales = np.array([c.scale for c in components])
    beta1 = float(scales[0])
    rho = float(math.fsum(shapes))
    q = 1.0 - beta1 / scales  # q[0] == 0 exactly
    log_c0 = float(np.dot(shapes, np.log(beta1 / scales)))
    if log_c0 < _UNDERFLOW_LOG_FLOOR:
        raise ConvergenceError(
            "scale ratios too extreme for the series (leading weight underflows)")
    cap = 1024
    w = np.zeros(cap)
    c = np.zeros(cap)
    w[0] = math.exp(log_c0)
    # Kahan-compensated running sum: tens of thousands of terms are common
    # at deep scale ratios and naive accumulation floors out above the
    # tail target from rounding alone.
    total = w[0]
    comp = 0.0
    pw = shapes.copy()  # shapes * q^k, updated in place
    k = 0
    while 1.0 - total > TAIL_TARGET:
        if k + 1 >= MAX_TERMS:
            raise ConvergenceError(
                f"series needs more than {MAX_TERMS} terms (tail {1.0 - total:.3e})")
        if k + 1 >= cap:
            cap = min(2 * cap, MAX_TERMS + 1)
            w = np.concatenate([w, np.zeros(cap - len(w))])
            c = np.concatenate([c, np.zeros(cap - len(c))])
        pw *= q
        c[k + 1] = pw.sum()
        w[k + 1] = float(np.dot(c[1:k + 2], w[k::-1])) / (k + 1)
        y = w[k + 1] - comp
        t = total + y
        comp = (t - total) - y
        total = t
        k += 1
    n_terms = k + 1
    lgam = np.array([specfun.log_gamma(rho + j) for j in range(n_terms + 1)])
    return _Series(beta1=beta1, rho=rho, weights=w[:n_terms].copy(),
                   lgam=lgam, tail=max(0.0, 1.0 - total))


# -- evaluation kernels ----------------------------------------------------


def _eval(gc: GammaConvolution, xs: np.ndarray, kernel):
    scalar = xs.ndim == 0
    flat = np.atleast_1d(xs).astype(float).ravel()
    if not np.all(np.isfinite(flat)):
        raise DomainError("evaluation points must be finite")
    out = np.zeros(flat.shape)
    pos = flat > 0.0
    if np.any(pos):
        series = gc._series
        xp = flat[pos]
        res = np.empty(xp.shape)
        for start in range(0, len(xp), _EVAL_CHUNK):
            sl = slice(start, start + _EVAL_CHUNK)
            res[sl] = kernel(series, xp[sl])
        out[pos] = res
    if scalar:
        return float(out[0])
    return out.reshape(np.atleast_1d(xs).shape)


def _cdf_chunk(s: _Series, xp: np.ndarray) -> np.ndarray:
    y = xp / s.beta1
    lny = np.log(y)
    p0 = np.array([specfun.reg_lower_inc_gamma(s.rho, v) for v in y])
    n_terms = len(s.weights)
    if n_terms == 1:
        return np.clip(p0, 0.0, 1.0)
    karr = np.arange(1, n_terms)
    # u_j = y^(rho+j-1) e^-y / Gamma(rho+j): ladder steps P(rho+j) = P(rho+j-1) - u_j
    with np.errstate(under="ignore"):
        steps = np.exp((s.rho - 1.0 + karr)[:, None] * lny[None, :]
                       - y[None, :] - s.lgam[1:n_terms][:, None])
    ladder = p0[None, :] - np.cumsum(steps, axis=0)
    np.clip(ladder, 0.0, 1.0, out=ladder)
    vals = s.weights[0] * p0 + s.weights[1:] @ ladder
    return np.clip(vals, 0.0, 1.0)


def _density_chunk(s: _Series, xp: np.ndarray, order: int) -> np.ndarray:
    y = xp / s.beta1
    lny = np.log(y)
    n_terms = len(s.weights)
    karr = np.arange(n_terms)
    with np.errstate(under="ignore"):
        base = np.exp((s.rho - 1.0 + karr)[:, None] * lny[None, :]
                      - y[None, :] - s.lgam[:n_terms][:, None])
    if order == 0:
        return (s.weights @ base) / s.beta1
    am1 = (s.rho - 1.0 + karr)[:, None]
    u = am1 / y[None, :] - 1.0
    if order == 1:
        return (s.weights @ (base * u)) / s.beta1 ** 2
    return (s.weights @ (base * (u * u - am1 / (y * y)[None, :]))) / s.beta1 ** 3


# -- sampling --------------------------------------------------------------


def _gamma_variates(rng: np.random.Generator, shape: float, n: int) -> np.ndarray:
    """Marsaglia-Tsang squeeze; shape < 1 boosted via U^(1/shape)."""
    if shape < 1.0:
        u = rng.random(n)
        return _gamma_variates(rng, shape + 1.0, n) * u ** (1.0 / shape)
    d = shape - 1.0 / 3.0
    cc = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n)
    todo = np.arange(n)
    while todo.size:
        m = todo.size
        z = rng.standard_normal(m)
        u = rng.random(m)
        v = (1.0 + cc * z) ** 3
        ok = v > 0.0
        accept = np.zeros(m, dtype=bool)
        with np.errstate(divide="ignore", invalid="ignore"):
            accept[ok] = np.log(u[ok]) < (0.5 * z[ok] ** 2 + d - d * v[ok] + d * np.log(v[ok]))
        out[todo[accept]] = d * v[accept]
        todo = todo[~accept]
    return out


# -- empirical CDF band ----------------------------------------------------


@dataclass(frozen=True)
class EcdfBand:
    """Empirical CDF with a two-sided band of DKW half-width.

    half_width = sqrt(ln(2 / (1 - confidence)) / (2 n)); the true CDF lies
    inside the band with probability at least `confidence`.
    """

    sorted_samples: np.ndarray
    confidence: float
    half_width: float

    @property
    def n(self) -> int:
        return len(self.sorted_samples)

    def ecdf(self, x):
        return np.searchsorted(self.sorted_samples, x, side="right") / self.n

    def sup_deviation(self, cdf_at_sorted: np.ndarray) -> float:
        """Exact sup_x |ecdf - F| given F evaluated at the sorted samples."""
        f = np.asarray(cdf_at_sorted, dtype=float)
        if f.shape != self.sorted_samples.shape:
            raise DomainError("cdf_at_sorted must match the sample vector")
        hi = np.arange(1, self.n + 1) / self.n - f
        lo = f - np.arange(0, self.n) / self.n
        return float(max(hi.max(), lo.max()))

    def contains(self, cdf_at_sorted: np.ndarray) -> bool:
        return self.sup_deviation(cdf_at_sorted) <= self.half_width

    def sup_deviation_bound(self, grid: np.ndarray, cdf_at_grid: np.ndarray) -> float:
        """Rigorous upper bound on sup_x |ecdf - F| from F on a coarse grid.

        Both curves are nondecreasing, so on [g_j, g_{j+1}) the deviation is
        bounded by the worst staircase corner; outside the grid the bound is
        F(g_0) on the left and 1 - F(g_m) on the right.  Tight to O(max
        increment) without evaluating F at every sample.
        """
        g = np.asarray(grid, dtype=float)
        f = np.asarray(cdf_at_grid, dtype=float)
        if g.ndim != 1 or g.shape != f.shape or g.size < 2:
            raise DomainError("grid and cdf_at_grid must be matching 1-d arrays")
        if np.any(np.diff(g) <= 0.0):
            raise DomainError("grid must be strictly increasing")
        e_right = np.searchsorted(self.sorted_samples, g, side="right") / self.n
        # closed cells [g_j, g_{j+1}]: sup(ecdf) <= ecdf(g_{j+1}), inf F = F(g_j)
        over = np.max(e_right[1:] - f[:-1])
        under = np.max(f[1:] - e_right[:-1])
        edges = max(float(f[0]), 1.0 - float(f[-1]), float(e_right[0]),
                    1.0 - float(e_right[-1]))
        return float(max(over, under, edges, 0.0))


def ecdf_band(samples: np.ndarray, confidence: float = 0.99) -> EcdfBand:
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size == 0:
        raise DomainError("samples must be a nonempty 1-d array")
    if not np.all(np.isfinite(samples)):
        raise DomainError("samples must be finite")
    if not (0.0 < confidence < 1.0):
        raise DomainError(f"confidence must be in (0, 1), got {confidence!r}")
    hw = math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * samples.size))
    return EcdfBand(np.sort(samples), confidence, hw)


# -- closed-form references ------------------------------------------------


def h1_closed(delta: float, x):
    """Density of expo(delta) + expo(1) for 0 < delta < 1:
    (e^-x - e^-(x/delta)) / (1 - delta)."""
    if not (0.0 < delta < 1.0):
        raise DomainError(f"h1_closed requires 0 < delta < 1, got {delta!r}")
    x = np.asarray(x, dtype=float)
    return (np.exp(-x) - np.exp(-x / delta)) / (1.0 - delta)


def h2_closed(delta: float, x):
    """Density of gamma(2, delta) + gamma(2, 1) for 0 < delta < 1:
    (x (e^-x + e^-(x/delta)) - 2 delta h1(x)) / (1 - delta)^2."""
    if not (0.0 < delta < 1.0):
        raise DomainError(f"h2_closed requires 0 < delta < 1, got {delta!r}")
    x = np.asarray(x, dtype=float)
    h1 = h1_closed(delta, x)
    return (x * (np.exp(-x) + np.exp(-x / delta)) - 2.0 * delta * h1) / (1.0 - delta) ** 2
