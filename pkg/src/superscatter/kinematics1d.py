"""One-dimensional probe scattering off a superposed single "mirror".

Elastic kinematics fixes the final probe momentum from the two initial momenta,
so the scattered probe inherits the target's momentum fringes, rescaled by
``2m/(M+m)`` and shifted by the incident momentum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooCoarse, TooFewFringes
from .params import MassPair, ProbeBeam
from .quadrature import gauss_hermite, refine_extremum
from .target import TargetSuperposition, momentum_density

GH_START = 64
GH_MAX = 1024
# Below this flatness the sampled distribution carries no resolvable fringes.
FLAT_TOL = 1e-12


@dataclass(frozen=True)
class Kinematics1D:
    masses: MassPair

    @property
    def a(self) -> float:
        """Weight of the target's initial momentum in the final probe momentum."""
        m, M = self.masses.m, self.masses.M
        return 2.0 * m / (M + m)

    @property
    def b(self) -> float:
        m, M = self.masses.m, self.masses.M
        return (M - m) / (M + m)

    def pstar(self, p_in, p_fin):
        """Initial target momentum that sends ``p_in`` to ``p_fin``."""
        m, M = self.masses.m, self.masses.M
        return (M + m) / (2 * m) * np.asarray(p_fin) + (M - m) / (2 * m) * np.asarray(p_in)

    @property
    def jacobian(self) -> float:
        """dP*/dp_fin = (M+m)/2m."""
        return 1.0 / self.a


@dataclass(frozen=True)
class Distribution1D:
    grid: np.ndarray
    density: np.ndarray
    normalization: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(self.density < 0) or not self.normalization > 0:
            raise ValueError("density must be non-negative with positive integral")


@dataclass(frozen=True)
class VisibilityResult:
    visibility: float
    best_alpha: float
    method: str
    meta: dict = field(default_factory=dict, compare=False)


def pfin_of(k: Kinematics1D, p_in, P_in):
    """Final probe momentum of the elastic (non-forward) channel."""
    return k.a * np.asarray(P_in) - k.b * np.asarray(p_in)


def Pfin_of(k: Kinematics1D, p_in, P_in):
    return np.asarray(P_in) + np.asarray(p_in) - pfin_of(k, p_in, P_in)


def prob_pfin_1d(k: Kinematics1D, t: TargetSuperposition, p_in, p_fin,
                 epsilon: float = 1.0, cosine_approx: bool = False):
    """Probability density of the scattered probe at ``p_fin`` for a sharp ``p_in``."""
    P_star = k.pstar(p_in, p_fin)
    return epsilon**2 * k.jacobian * momentum_density(t, P_star, cosine_approx)


def fringe_spacing_1d(k: Kinematics1D, t: TargetSuperposition) -> float:
    return k.a * t.fringe_period


def default_grid_1d(k: Kinematics1D, t: TargetSuperposition, beam: ProbeBeam,
                    n: int = 4096, half_widths: float = 6.0) -> np.ndarray:
    """Grid centred on the elastic image of a target at rest.

    Spans ``half_widths`` target envelope widths (mapped to probe momentum) on
    each side, with at least 20 points per fringe.
    """
    center = -k.b * beam.p_in
    half = half_widths * t.envelope_width * k.a
    n_fringe = 2 * half / fringe_spacing_1d(k, t)
    n = max(n, int(math.ceil(20 * n_fringe)) + 1)
    return np.linspace(center - half, center + half, n)


def _fold_nodes_trapezoid(spread, n_per_period=8, span=10.0):
    # Gaussian weights on a uniform grid in units of the beam spread;
    # spread is the fringe phase change per standard deviation.
    h = min(0.125, 2 * math.pi / (n_per_period * spread))
    z = np.arange(-span, span + 0.5 * h, h)
    w = np.exp(-0.5 * z**2)
    return z, w / w.sum()


def _fold_raw(k, t, p0, dp, grid, z, w, epsilon, cosine_approx, chunk=512):
    raw = np.zeros_like(grid)
    for s in range(0, len(z), chunk):
        p_in = p0 + dp * z[s:s + chunk]
        vals = prob_pfin_1d(k, t, p_in[:, None], grid[None, :], epsilon, cosine_approx)
        raw += w[s:s + chunk] @ vals
    return raw


def fold_1d(k: Kinematics1D, t: TargetSuperposition, beam: ProbeBeam, grid=None,
            cosine_approx: bool = False, epsilon: float = 1.0, tol: float = 1e-6) -> Distribution1D:
    """Fold the sharp-momentum distribution with the beam's Gaussian spread.

    Probabilities (not amplitudes) are summed over the incident momentum.
    Gauss-Hermite nodes start at 64 and double until the sampled density moves
    by less than ``tol`` of its maximum; if the fringe phase varies too fast
    across the beam for 1024 nodes, a dense Gaussian-weighted trapezoid rule
    resolving every oscillation is used instead.
    """
    grid = default_grid_1d(k, t, beam) if grid is None else np.asarray(grid, dtype=float)
    fringe = fringe_spacing_1d(k, t)
    step = float(np.max(np.diff(grid)))
    if step > fringe / 10:
        raise GridTooCoarse(f"grid step {step:g} exceeds a tenth of the fringe spacing {fringe:g}")

    p0, dp = beam.p_in, beam.dp_in
    meta = {"cosine_approx": cosine_approx}
    if dp == 0:
        raw = prob_pfin_1d(k, t, p0, grid, epsilon, cosine_approx)
        meta.update(rule="none", nodes=0)
    else:
        # Phase of the fringe factor per unit incident momentum.
        kphase = abs(k.masses.M - k.masses.m) / (2 * k.masses.m) * t.d
        spread = kphase * dp
        n = GH_START
        # Gauss-Hermite with n nodes resolves E[cos(s Z)] for s up to about sqrt(n).
        while n <= GH_MAX and spread > 0.9 * math.sqrt(n):
            n *= 2
        raw = None
        while n <= GH_MAX:
            z, w = gauss_hermite(n)
            new = _fold_raw(k, t, p0, dp, grid, z, w, epsilon, cosine_approx)
            if raw is not None and np.max(np.abs(new - raw)) <= tol * np.max(np.abs(new)):
                meta.update(rule="gauss-hermite", nodes=n)
                raw = new
                break
            raw = new
            n *= 2
        else:
            z, w = _fold_nodes_trapezoid(spread)
            raw = _fold_raw(k, t, p0, dp, grid, z, w, epsilon, cosine_approx)
            meta.update(rule="trapezoid", nodes=len(z))

    raw = np.clip(raw, 0.0, None)
    norm = float(np.trapezoid(raw, grid))
    return Distribution1D(grid, raw / norm, norm, meta)


def visibility_1d_analytic(k: Kinematics1D, t: TargetSuperposition, beam: ProbeBeam) -> VisibilityResult:
    """Closed-form fringe contrast ``exp(-d^2 (M-m)^2 dp^2 / 8 m^2)``."""
    m, M = k.masses.m, k.masses.M
    A = math.exp(-(t.d**2) * (M - m) ** 2 * beam.dp_in**2 / (8.0 * m**2))
    return VisibilityResult(A, t.alpha, "analytic")


def local_extrema(y):
    """Indices of interior local maxima and minima."""
    y = np.asarray(y)
    c, left, right = y[1:-1], y[:-2], y[2:]
    maxima = np.flatnonzero((c > left) & (c >= right)) + 1
    minima = np.flatnonzero((c < left) & (c <= right)) + 1
    return maxima, minima


def peak_positions(dist: Distribution1D) -> np.ndarray:
    """Parabolically refined locations of all interior maxima."""
    maxima, _ = local_extrema(dist.density)
    return np.array([refine_extremum(dist.density, i, dist.grid, points=5)[0] for i in maxima])


def visibility_1d_numeric(dist: Distribution1D) -> VisibilityResult:
    """(max - min)/(max + min) of the central fringe, averaged over both neighbouring minima.

    The central fringe is the maximum closest to the density-weighted mean.
    A distribution flat to ``FLAT_TOL`` relative has visibility 0.
    """
    y, x = dist.density, dist.grid
    if np.ptp(y) <= FLAT_TOL * np.max(y):
        return VisibilityResult(0.0, 0.0, "numeric", {"flat": True})
    maxima, minima = local_extrema(y)
    if len(maxima) + len(minima) < 3:
        raise TooFewFringes(f"found {len(maxima)} maxima and {len(minima)} minima")
    center = float(np.sum(x * y) / np.sum(y))
    usable = [i for i in maxima if np.any(minima < i) and np.any(minima > i)]
    if not usable:
        raise TooFewFringes("no maximum is bracketed by minima")
    i_max = min(usable, key=lambda i: abs(x[i] - center))
    i_left = minima[minima < i_max].max()
    i_right = minima[minima > i_max].min()
    loc, top = refine_extremum(y, i_max, x, points=5)
    lows = [max(refine_extremum(y, i, x, points=5)[1], 0.0) for i in (i_left, i_right)]
    vis = float(np.mean([(top - lo) / (top + lo) for lo in lows]))
    return VisibilityResult(min(vis, 1.0), 0.0, "numeric", {"fringe_center": loc})
