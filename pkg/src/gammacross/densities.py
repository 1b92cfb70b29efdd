"""Small protocol tying a density to its first two derivatives.

Mode analysis and the stochastic-order checks all need (f, f', f'') triples
that accept numpy arrays.  The constructors here wrap the series engine,
plain unit-scale gamma densities, and finite mixtures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import specfun
from .errors import DomainError
from .gconv import GammaConvolution

__all__ = ["SmoothDensity", "from_convolution", "gamma_unit", "mix"]


@dataclass(frozen=True)
class SmoothDensity:
    """Array-capable callables for a density and its first two derivatives."""

    value: Callable
    d1: Callable
    d2: Callable

    def __call__(self, x):
        return self.value(x)


def from_convolution(gc: GammaConvolution) -> SmoothDensity:
    return SmoothDensity(
        value=lambda x: gc.density(x, 0),
        d1=lambda x: gc.density(x, 1),
        d2=lambda x: gc.density(x, 2),
    )


def gamma_unit(alpha: float) -> SmoothDensity:
    """Unit-scale gamma density g_alpha with analytic derivatives, x > 0."""
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise DomainError(f"alpha must be positive and finite, got {alpha!r}")
    lg = specfun.log_gamma(alpha)

    def value(x):
        x = np.asarray(x, dtype=float)
        return np.exp((alpha - 1.0) * np.log(x) - x - lg)

    def d1(x):
        x = np.asarray(x, dtype=float)
        return value(x) * ((alpha - 1.0) / x - 1.0)

    def d2(x):
        x = np.asarray(x, dtype=float)
        u = (alpha - 1.0) / x - 1.0
        return value(x) * (u * u - (alpha - 1.0) / (x * x))

    return SmoothDensity(value, d1, d2)


def mix(pairs: Sequence[tuple[float, SmoothDensity]]) -> SmoothDensity:
    """Convex (or just positive) combination sum(w_i * f_i)."""
    if not pairs:
        raise DomainError("mix requires at least one component")
    ws = [float(w) for w, _ in pairs]
    fs = [f for _, f in pairs]
    for w in ws:
        if not math.isfinite(w) or w < 0.0:
            raise DomainError(f"mixture weights must be nonnegative, got {w!r}")
    if not any(w > 0.0 for w in ws):
        raise DomainError("at least one mixture weight must be positive")
    return SmoothDensity(
        value=lambda x: sum(w * f.value(x) for w, f in zip(ws, fs)),
        d1=lambda x: sum(w * f.d1(x) for w, f in zip(ws, fs)),
        d2=lambda x: sum(w * f.d2(x) for w, f in zip(ws, fs)),
    )
