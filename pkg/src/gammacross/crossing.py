"""Certified sign analysis of D(x) = F_eta(x) - F_theta(x).

The certifier scans a log-spaced grid over the joint quantile window,
refines around sign transitions, groups points with |D| > tol into certified
sign runs, and brackets each opposite-sign run boundary to a root.  Endpoint
behavior is pinned analytically: near zero the sign of D equals the sign of
prod(theta) - prod(eta) (the CDF ratio tends to a power of the product
ratio), and in the far tail the largest scale wins, with ties broken by
multiplicity.  A rigorous endpoint sign that contradicts the adjacent
certified run, or any sub-tolerance zone between same-sign runs, downgrades
the outcome to UNDECIDED; certified crossings are never silently invented
or dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import specfun
from .errors import DomainError
from .gconv import GammaComponent, GammaConvolution, make_convolution
from .orders import log_majorizes

__all__ = [
    "Sign",
    "Classification",
    "Crossing",
    "CrossingReport",
    "near_zero_sign",
    "tail_sign",
    "perturbation_root_window",
    "sign_profile",
    "u_star",
    "h_diff",
    "lemma2_residual",
]

_RTOL = 1e-12
DEFAULT_GRID_SIZE = 2048
DEFAULT_TOL = 1e-8
_REFINE_PASSES = 3
_REFINE_POINTS = 8
_BISECT_MAX_ITER = 200


class Sign(Enum):
    MINUS = "-"
    PLUS = "+"
    INDETERMINATE = "?"

    def __str__(self) -> str:
        return self.value


class Classification(Enum):
    NO_CROSSING = "NO_CROSSING"
    SINGLE_CROSSING_BELOW = "SINGLE_CROSSING_BELOW"
    SINGLE_CROSSING_ABOVE = "SINGLE_CROSSING_ABOVE"
    MULTI = "MULTI"
    UNDECIDED = "UNDECIDED"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Crossing:
    """One certified sign change of D: location, direction ('-+' means D goes
    from negative to positive, i.e. F_theta crosses F_eta from above), and
    margin (the smaller of the two adjacent run peaks of |D|)."""

    location: float
    direction: str
    margin: float


@dataclass(frozen=True)
class CrossingReport:
    theta: tuple[float, ...]
    eta: tuple[float, ...]
    alpha: float
    window: tuple[float, float]
    grid_size: int
    tol: float
    sign_sequence: tuple[str, ...]
    crossings: tuple[Crossing, ...]
    classification: Classification
    error_estimate: float
    near_zero: str
    tail: str
    tail_rigorous: bool
    notes: tuple[str, ...] = field(default=())

    @property
    def n_crossings(self) -> int:
        return len(self.crossings)

    @property
    def label(self) -> str:
        if self.classification is Classification.MULTI:
            return f"MULTI({self.n_crossings})"
        return self.classification.value

    def __post_init__(self):
        changes = sum(1 for a, b in zip(self.sign_sequence, self.sign_sequence[1:]) if a != b)
        if self.classification is not Classification.UNDECIDED and changes != len(self.crossings):
            raise DomainError("crossing count must match certified sign changes")
        if self.classification is Classification.SINGLE_CROSSING_BELOW:
            if not (self.sign_sequence and self.sign_sequence[0] == "-"
                    and self.sign_sequence[-1] == "+"):
                raise DomainError("SINGLE_CROSSING_BELOW requires a -,+ sign sequence")
        for c in self.crossings:
            if not (c.margin > 0.0):
                raise DomainError("crossing margins must be positive")


def _weights(name: str, w) -> np.ndarray:
    arr = np.asarray(w, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError(f"{name} must be a nonempty 1-d vector")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise DomainError(f"{name} must be nonnegative and finite")
    if not np.any(arr > 0.0):
        raise DomainError(f"{name} must have a positive entry")
    return arr


def near_zero_sign(theta, eta, alpha: float) -> Sign:
    """Sign of D = F_eta - F_theta as x -> 0+.

    F_theta/F_eta tends to (prod theta / prod eta)^-alpha, so D > 0 iff
    prod(theta) > prod(eta).  alpha affects the magnitude, never the sign;
    it is validated and otherwise unused.  Product ties within relative
    1e-12 (compared in log space) give INDETERMINATE.
    """
    t = _weights("theta", theta)
    e = _weights("eta", eta)
    if t.size != e.size:
        raise DomainError("theta and eta must have equal length")
    if not (float(alpha) > 0.0 and math.isfinite(float(alpha))):
        raise DomainError(f"alpha must be positive and finite, got {alpha!r}")
    lt = -math.inf if np.any(t == 0.0) else math.fsum(math.log(v) for v in t)
    le = -math.inf if np.any(e == 0.0) else math.fsum(math.log(v) for v in e)
    if lt == le:
        return Sign.INDETERMINATE
    if math.isinf(lt) or math.isinf(le):
        return Sign.PLUS if lt > le else Sign.MINUS
    if abs(lt - le) <= _RTOL * max(1.0, abs(lt), abs(le)):
        return Sign.INDETERMINATE
    return Sign.PLUS if lt > le else Sign.MINUS


def _ties(a: float, b: float) -> bool:
    return abs(a - b) <= _RTOL * max(1.0, abs(a), abs(b))


def _tail_assessment(theta, eta) -> tuple[Sign, bool]:
    """Tail sign of D with a rigor flag.

    The largest scale dominates the tail; if the maxima tie, the one with
    more components at the maximum has the heavier tail.  Both comparisons
    are asymptotically rigorous.  Deeper ties fall back to a lexicographic
    comparison of the remaining entries, which is only a heuristic (the true
    tail constant involves products over the non-maximal scales); that
    fallback is flagged non-rigorous so the scan can override it.
    """
    t = np.sort(_weights("theta", theta))[::-1]
    e = np.sort(_weights("eta", eta))[::-1]
    if not _ties(t[0], e[0]):
        return (Sign.PLUS if t[0] > e[0] else Sign.MINUS), True
    mt = int(np.sum([_ties(v, t[0]) for v in t]))
    me = int(np.sum([_ties(v, e[0]) for v in e]))
    if mt != me:
        return (Sign.PLUS if mt > me else Sign.MINUS), True
    for a, b in zip(t[mt:], e[me:]):
        if not _ties(a, b):
            return (Sign.PLUS if a > b else Sign.MINUS), False
    if t.size != e.size:
        rest_t, rest_e = t[mt:], e[me:]
        if rest_t.size != rest_e.size:
            longer = rest_t if rest_t.size > rest_e.size else rest_e
            if np.any(longer > 0.0):
                return (Sign.PLUS if rest_t.size > rest_e.size else Sign.MINUS), False
    return Sign.INDETERMINATE, False


def tail_sign(theta, eta) -> Sign:
    """Sign of D = F_eta - F_theta as x -> +inf (ties resolved per the
    max/multiplicity/lexicographic ladder; INDETERMINATE on full ties)."""
    sign, _ = _tail_assessment(theta, eta)
    return sign


def perturbation_root_window(theta, alpha: float) -> tuple[float, float]:
    """Interval guaranteed to contain sign changes in near-perturbation
    comparisons: the supplemented densities are likelihood-ratio bracketed by
    gamma(n alpha + 2, min theta) and gamma(n alpha + 2, max theta), whose
    modes are (n alpha + 1) * scale."""
    t = _weights("theta", theta)
    a = float(alpha)
    if not (a > 0.0 and math.isfinite(a)):
        raise DomainError(f"alpha must be positive and finite, got {alpha!r}")
    pos = t[t > 0.0]
    factor = t.size * a + 1.0
    return float(factor * pos.min()), float(factor * pos.max())


@dataclass
class _Run:
    sign: int
    first: int
    last: int
    peak: float


def _classify_signs(d: np.ndarray, tol: float) -> np.ndarray:
    return np.where(d > tol, 1, np.where(d < -tol, -1, 0)).astype(int)


def _runs(signs: np.ndarray, d: np.ndarray) -> list[_Run]:
    # Maximal blocks of consecutive identical nonzero signs.  Zeros split
    # runs: a zero gap between same-sign runs is a sub-tolerance dip and the
    # caller downgrades it to UNDECIDED rather than merging it away.
    runs: list[_Run] = []
    for i, s in enumerate(signs):
        if s == 0:
            continue
        if runs and runs[-1].sign == s and runs[-1].last == i - 1:
            runs[-1].last = i
            runs[-1].peak = max(runs[-1].peak, abs(float(d[i])))
        else:
            runs.append(_Run(int(s), i, i, abs(float(d[i]))))
    return runs


def sign_profile(theta, eta, alpha: float, grid_size: int = DEFAULT_GRID_SIZE,
                 tol: float = DEFAULT_TOL, window: tuple[float, float] | None = None,
                 refine_passes: int = _REFINE_PASSES,
                 seed_window: tuple[float, float] | None = None) -> CrossingReport:
    """Certify the sign runs and crossings of D(x) = F_eta(x) - F_theta(x).

    Scans `grid_size` log-spaced points over `window` (default: the joint
    (1e-12, 1 - 1e-12) quantile span), refines around transitions, and
    assembles certified runs where |D| > tol.  `seed_window` adds grid
    density on an interval expected to contain crossings.
    """
    t = _weights("theta", theta)
    e = _weights("eta", eta)
    if t.size != e.size:
        raise DomainError("theta and eta must have equal length")
    a = float(alpha)
    if not (a > 0.0 and math.isfinite(a)):
        raise DomainError(f"alpha must be positive and finite, got {alpha!r}")
    if grid_size < 64:
        raise DomainError("grid_size must be at least 64")
    if not (0.0 < tol < 1.0):
        raise DomainError(f"tol must be in (0, 1), got {tol!r}")

    gc_t = make_convolution(a, t)
    gc_e = make_convolution(a, e)
    err_est = gc_t.error_estimate + gc_e.error_estimate
    if window is None:
        lo = min(gc_t.quantile(1e-12), gc_e.quantile(1e-12))
        hi = max(gc_t.quantile(1.0 - 1e-12), gc_e.quantile(1.0 - 1e-12))
    else:
        lo, hi = float(window[0]), float(window[1])
        if not (0.0 < lo < hi):
            raise DomainError(f"window must satisfy 0 < lo < hi, got {window!r}")

    def base_report(classification, sign_sequence=(), crossings=(), notes=()):
        near = near_zero_sign(t, e, a)
        tail_s, tail_rig = _tail_assessment(t, e)
        return CrossingReport(
            theta=tuple(float(v) for v in t), eta=tuple(float(v) for v in e),
            alpha=a, window=(lo, hi), grid_size=grid_size, tol=tol,
            sign_sequence=tuple(sign_sequence), crossings=tuple(crossings),
            classification=classification, error_estimate=err_est,
            near_zero=near.value, tail=tail_s.value, tail_rigorous=tail_rig,
            notes=tuple(notes))

    ts = np.sort(t)
    es = np.sort(e)
    if ts.size == es.size and np.all(np.abs(ts - es) <= _RTOL * np.maximum(1.0, np.abs(ts)))  :
        return base_report(Classification.NO_CROSSING,
                           notes=("identical weight multisets",))

    near = near_zero_sign(t, e, a)
    if near is Sign.INDETERMINATE and np.all(t > 0.0) and np.all(e > 0.0):
        if log_majorizes(t, e) or log_majorizes(e, t):
            return base_report(Classification.NO_CROSSING,
                               notes=("equal products with log-majorization dominance",))

    xs = np.geomspace(lo, hi, grid_size)
    if seed_window is not None:
        s_lo = max(lo, float(seed_window[0]))
        s_hi = min(hi, float(seed_window[1]))
        if s_lo < s_hi:
            xs = np.unique(np.concatenate([xs, np.geomspace(s_lo, s_hi, 256)]))

    def dval(pts):
        return gc_e.cdf(pts) - gc_t.cdf(pts)

    d = dval(xs)
    for _ in range(max(0, int(refine_passes))):
        signs = _classify_signs(d, tol)
        trans = np.nonzero(signs[1:] != signs[:-1])[0]
        if trans.size == 0:
            break
        extra = []
        for i in trans:
            seg = np.geomspace(xs[i], xs[i + 1], _REFINE_POINTS + 2)[1:-1]
            extra.append(seg)
        new_pts = np.unique(np.concatenate(extra))
        new_pts = np.setdiff1d(new_pts, xs)
        if new_pts.size == 0:
            break
        xs = np.concatenate([xs, new_pts])
        d = np.concatenate([d, dval(new_pts)])
        order = np.argsort(xs)
        xs = xs[order]
        d = d[order]

    signs = _classify_signs(d, tol)
    runs = _runs(signs, d)
    tail_s, tail_rig = _tail_assessment(t, e)

    notes: list[str] = []
    undecided: list[str] = []
    for r1, r2 in zip(runs, runs[1:]):
        if r1.sign == r2.sign:
            undecided.append(
                f"sub-tolerance zone between same-sign runs near x={xs[r1.last]:.6g}")
    if not runs:
        undecided.append("no certified sign anywhere in the window")
    if runs and near is not Sign.INDETERMINATE:
        first = Sign.PLUS if runs[0].sign > 0 else Sign.MINUS
        if first is not near:
            undecided.append("near-zero sign contradicts the first certified run")
    if runs and tail_rig and tail_s is not Sign.INDETERMINATE:
        last = Sign.PLUS if runs[-1].sign > 0 else Sign.MINUS
        if last is not tail_s:
            undecided.append("tail sign contradicts the last certified run")
    if runs and not tail_rig and tail_s is not Sign.INDETERMINATE:
        last = Sign.PLUS if runs[-1].sign > 0 else Sign.MINUS
        if last is not tail_s:
            notes.append("lexicographic tail heuristic overridden by the certified scan")

    crossings: list[Crossing] = []
    for r1, r2 in zip(runs, runs[1:]):
        if r1.sign == r2.sign:
            continue
        a_x = float(xs[r1.last])
        b_x = float(xs[r2.first])
        loc = _bisect_sign_change(dval, a_x, b_x, r1.sign)
        direction = "-+" if r1.sign < 0 else "+-"
        crossings.append(Crossing(loc, direction, min(r1.peak, r2.peak)))

    if undecided:
        return base_report(Classification.UNDECIDED, sign_sequence=_seq(runs),
                           crossings=crossings, notes=tuple(notes + undecided))
    if not crossings:
        return base_report(Classification.NO_CROSSING, sign_sequence=_seq(runs),
                           notes=tuple(notes))
    if len(crossings) == 1:
        cls = (Classification.SINGLE_CROSSING_BELOW if crossings[0].direction == "-+"
               else Classification.SINGLE_CROSSING_ABOVE)
        return base_report(cls, sign_sequence=_seq(runs), crossings=crossings,
                           notes=tuple(notes))
    return base_report(Classification.MULTI, sign_sequence=_seq(runs),
                       crossings=crossings, notes=tuple(notes))


def _seq(runs: Sequence[_Run]) -> tuple[str, ...]:
    return tuple("+" if r.sign > 0 else "-" for r in runs)


def _bisect_sign_change(dval, a: float, b: float, left_sign: int) -> float:
    for _ in range(_BISECT_MAX_ITER):
        if b - a <= 1e-10 * max(abs(a), abs(b)):
            break
        m = 0.5 * (a + b)
        dm = float(dval(m))
        if (dm > 0.0 and left_sign > 0) or (dm < 0.0 and left_sign < 0):
            a = m
        else:
            b = m
    return 0.5 * (a + b)


# -- two-component mixing comparison ----------------------------------------


def _prop_config(theta, eta) -> tuple[float, float, float, float]:
    t = np.sort(_weights("theta", theta))
    e = np.sort(_weights("eta", eta))
    if t.size != 2 or e.size != 2:
        raise DomainError("theta and eta must be 2-vectors")
    t1, t2 = float(t[0]), float(t[1])
    e1, e2 = float(e[0]), float(e[1])
    if not (t1 < e1 <= e2 < t2):
        raise DomainError(
            f"required configuration theta1 < eta1 <= eta2 < theta2, got {t1, e1, e2, t2}")
    return t1, t2, e1, e2


def u_star(theta, eta) -> float:
    """Closed-form location where the shared-total mixing CDFs H_theta and
    H_eta cross: (theta2 eta1 - eta2 theta1) / (theta2 - theta1 - eta2 + eta1)."""
    t1, t2, e1, e2 = _prop_config(theta, eta)
    return (t2 * e1 - e2 * t1) / (t2 - t1 - e2 + e1)


def h_diff(theta, eta, alpha: float, u: float) -> float:
    """H_theta(u) - H_eta(u) where H_v(u) = Pr(v1 W + v2 (1 - W) <= u) and
    W ~ beta(alpha, alpha): equals B((eta2-u)/(eta2-eta1)) -
    B((theta2-u)/(theta2-theta1)) with B the beta(alpha, alpha) CDF."""
    t1, t2, e1, e2 = _prop_config(theta, eta)
    a = float(alpha)
    if not (a > 0.0 and math.isfinite(a)):
        raise DomainError(f"alpha must be positive and finite, got {alpha!r}")
    u = float(u)
    if not math.isfinite(u):
        raise DomainError(f"u must be finite, got {u!r}")
    if e2 > e1:
        term_eta = specfun.beta_cdf(a, a, (e2 - u) / (e2 - e1))
    else:
        term_eta = 1.0 if u < e1 else 0.0
    term_theta = specfun.beta_cdf(a, a, (t2 - u) / (t2 - t1))
    return term_eta - term_theta


# -- two-coordinate perturbation identity ------------------------------------


def lemma2_residual(theta_star, delta: float, alpha: float, x: float,
                    g_tail: GammaConvolution | None = None, h: float = 1e-4) -> float:
    """Relative residual of the perturbation identity

        d/d delta F(x; delta) = alpha (theta2 - theta1) f_supp'(x)

    where F(.; delta) is the CDF of (theta1* - delta) X1 + (theta2* + delta) X2
    + G, theta_i are the perturbed weights, and f_supp is the density of the
    same sum with one extra exponential supplement at each perturbed scale.
    The left side is a central difference with step h.
    """
    ts = np.asarray(theta_star, dtype=float)
    if ts.shape != (2,):
        raise DomainError("theta_star must be a 2-vector")
    t1s, t2s = float(ts[0]), float(ts[1])
    if not (0.0 < t1s <= t2s and math.isfinite(t2s)):
        raise DomainError(f"theta_star must satisfy 0 < theta1 <= theta2, got {ts!r}")
    a = float(alpha)
    if not (a > 0.0 and math.isfinite(a)):
        raise DomainError(f"alpha must be positive and finite, got {alpha!r}")
    delta = float(delta)
    h = float(h)
    # delta = 0 is legal: the identity degenerates to 0 = 0 when theta1* = theta2*
    if not (h > 0.0 and delta >= 0.0 and t1s - delta - h > 0.0):
        raise DomainError("need h > 0, delta >= 0 and theta1* - delta - h > 0")
    x = float(x)
    if not (x > 0.0 and math.isfinite(x)):
        raise DomainError(f"x must be positive and finite, got {x!r}")
    tail = tuple(g_tail.components) if g_tail is not None else ()

    def conv(d: float, supplemented: bool) -> GammaConvolution:
        extra = 1.0 if supplemented else 0.0
        comps = (GammaComponent(a + extra, t1s - d), GammaComponent(a + extra, t2s + d))
        return GammaConvolution(comps + tail)

    lhs = (conv(delta + h, False).cdf(x) - conv(delta - h, False).cdf(x)) / (2.0 * h)
    supp = conv(delta, True)
    rhs = a * ((t2s + delta) - (t1s - delta)) * supp.density(x, 1)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-12)
