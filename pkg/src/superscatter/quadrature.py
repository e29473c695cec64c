"""Numerical engine: adaptive Gauss-Kronrod, Gauss-Hermite, roots and extrema.

The adaptive integrator evaluates every pending interval in one vectorized call,
so integrands must accept and return numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_hermite

from .errors import NoSignChange, NotAnExtremum, ToleranceNotReached

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15 constants).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes.
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadSpec:
    rel_tol: float = 1e-7
    max_subdivisions: int = 20000
    rule: str = "adaptive"
    abs_tol: float = 0.0
    initial_intervals: int = 8

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-2:
            raise ValueError(f"rel_tol must lie in (0, 1e-2], got {self.rel_tol}")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.rule not in ("adaptive", "fixed-node"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.abs_tol < 0 or self.initial_intervals < 1:
            raise ValueError("abs_tol must be >= 0 and initial_intervals >= 1")


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray | float
    error: float
    evaluations: int
    intervals: int


def _gk15(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * KRONROD_NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float)
    fx = fx.reshape(x.shape + fx.shape[1:])
    extra = (1,) * (fx.ndim - 2)
    hk = half.reshape(half.shape + extra)
    kron = hk * np.tensordot(KRONROD_WEIGHTS, np.moveaxis(fx, 1, 0), axes=1)
    gauss = hk * np.tensordot(GAUSS_WEIGHTS, np.moveaxis(fx, 1, 0), axes=1)
    diff = np.abs(kron - gauss)
    err = diff.reshape(len(lo), -1).max(axis=1)
    mag = np.abs(kron).reshape(len(lo), -1).max(axis=1)
    return kron, err, mag


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadSpec = QuadSpec(),
    points: Sequence[float] = (),
    full_output: bool = False,
):
    """Integrate a vectorized ``f`` over ``[a, b]``.

    ``f`` maps an array of abscissae of shape ``(n,)`` to ``(n,)`` or ``(n, k)``
    for vector-valued integrands.  Intervals are bisected until each one's
    Kronrod-Gauss difference is below its share of ``rel_tol * |I|``.
    ``points`` are interior break points (e.g. known kinks) used as initial edges.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    edges = np.unique(np.concatenate([[a, b], [p for p in points if a < p < b]]))
    n0 = spec.initial_intervals
    lo = np.concatenate([np.linspace(l, r, n0 + 1)[:-1] for l, r in zip(edges[:-1], edges[1:])])
    hi = np.concatenate([np.linspace(l, r, n0 + 1)[1:] for l, r in zip(edges[:-1], edges[1:])])
    width = b - a

    kron, err, mag = _gk15(f, lo, hi)
    evaluations = 15 * len(lo)
    if spec.rule == "fixed-node":
        total = kron.sum(axis=0)
        res = QuadResult(_scalar(total), float(err.sum()), evaluations, len(lo))
        return res if full_output else res.value

    done = np.zeros(kron.shape[1:])
    done_err = 0.0
    intervals = 0
    splits = 0
    while True:
        total = done + kron.sum(axis=0)
        scale = float(np.max(np.abs(total))) if np.ndim(total) else abs(float(total))
        allowed = max(spec.rel_tol * scale, spec.abs_tol) * (hi - lo) / width
        ok = (err <= allowed) | (err <= 50 * _EPS * mag) | ((hi - lo) <= 1e3 * _EPS * max(abs(a), abs(b), width))
        done = done + kron[ok].sum(axis=0)
        done_err += float(err[ok].sum())
        intervals += int(ok.sum())
        if ok.all():
            break
        lo_bad, hi_bad = lo[~ok], hi[~ok]
        splits += len(lo_bad)
        if splits > spec.max_subdivisions:
            raise ToleranceNotReached(
                f"adaptive quadrature on [{a}, {b}] exceeded {spec.max_subdivisions} subdivisions"
            )
        mid = 0.5 * (lo_bad + hi_bad)
        lo = np.concatenate([lo_bad, mid])
        hi = np.concatenate([mid, hi_bad])
        kron, err, mag = _gk15(f, lo, hi)
        evaluations += 15 * len(lo)
    res = QuadResult(_scalar(done), done_err, evaluations, intervals)
    return res if full_output else res.value


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


@lru_cache(maxsize=None)
def gauss_hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for expectations over a standard normal variable.

    ``E[f(Z)] ~= sum(w * f(z))`` with ``sum(w) == 1``.
    """
    x, w = roots_hermite(n)
    z = math.sqrt(2.0) * x
    w = w / math.sqrt(math.pi)
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


def find_root(f: Callable[[float], float], bracket: tuple[float, float], tol: float = 1e-14) -> float:
    """Brent root of ``f`` inside a sign-changing bracket."""
    a, b = bracket
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise NoSignChange(f"f({a})={fa:g} and f({b})={fb:g} have the same sign")
    return brentq(f, a, b, xtol=tol, rtol=4 * _EPS, maxiter=500)


def refine_extremum(samples, index: int, grid=None, points: int = 3) -> tuple[float, float]:
    """Refine a sampled local extremum by local polynomial interpolation.

    ``points=3`` fits the parabola through ``samples[index-1:index+2]``;
    ``points=5`` interpolates a quartic through five samples and Newton-solves
    its derivative starting from the parabolic vertex, falling back to three
    points next to the array ends.  Returns ``(location, value)``, with
    ``location`` in grid units if ``grid`` is given (uniform spacing assumed)
    and in index units otherwise.
    """
    y = np.asarray(samples, dtype=float)
    if not 0 < index < len(y) - 1:
        raise NotAnExtremum(f"index {index} has no neighbours on both sides")
    y0, y1, y2 = y[index - 1], y[index], y[index + 1]
    if not ((y1 >= y0 and y1 >= y2) or (y1 <= y0 and y1 <= y2)):
        raise NotAnExtremum(f"samples[{index}] is not a local extremum")
    curv = y0 - 2.0 * y1 + y2
    shift = 0.0 if curv == 0 else 0.5 * (y0 - y2) / curv
    value = y1 - 0.25 * (y0 - y2) * shift
    if points == 5 and 1 < index < len(y) - 2 and curv != 0:
        coef = np.polyfit(np.arange(-2.0, 3.0), y[index - 2:index + 3], 4)
        d1, d2 = np.polyder(coef), np.polyder(coef, 2)
        s = shift
        for _ in range(20):
            step = np.polyval(d1, s) / np.polyval(d2, s)
            s -= step
            if abs(step) < 1e-14:
                break
        if abs(s) <= 1.0:
            shift, value = s, float(np.polyval(coef, s))
    elif points not in (3, 5):
        raise ValueError("points must be 3 or 5")
    if grid is None:
        return index + shift, value
    x = np.asarray(grid, dtype=float)
    h = 0.5 * (x[index + 1] - x[index - 1])
    return x[index] + shift * h, value


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-4):
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def trapezoid_oracle(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int = 200_001) -> float:
    """Dense composite trapezoid rule used as an independent reference."""
    x = np.linspace(a, b, n)
    return float(np.trapezoid(f(x), x))
