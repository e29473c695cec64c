"""Two-dimensional probe scattering off a target confined to the x-axis.

The probe moves in the (x, y) plane; the target moves along x.  Energy and the
x-momentum are conserved, the y-momentum is not.  Rescaling the target
momentum to ``p_z = P sqrt(m/M)`` and rotating the (x, z) plane by
``kappa = arctan(sqrt(m/M))`` turns the collision into a single particle
scattering off a line, where the final momentum is uniformly distributed in
azimuth around the line at fixed axial and radial momentum.

All angles are radians and measured from the +x axis.  The incident probe
momentum is ``p (cos theta_in, sin theta_in)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDensity, ForwardSingularity, GridTooCoarse
from .kinematics1d import VisibilityResult
from .params import MassPair, ProbeBeam
from .quadrature import QuadSpec, gauss_hermite, golden_section_max, integrate
from .target import TargetSuperposition, envelope_components, momentum_density, normalization

# Radial integrals are skipped where |p_x_fin - p_x_in| < FORWARD_CUT * p_in.
FORWARD_CUT = 1e-3
RADIAL_SPEC = QuadSpec(rel_tol=1e-7, max_subdivisions=200_000, initial_intervals=32)
# Envelope exp(-P^2 w^2) is below 1e-15 beyond this many 1/w.
ENVELOPE_CUT = 6.0
GH2D_START = 32
GH2D_MAX = 512


@dataclass(frozen=True)
class RotatedFrame:
    """Mass-rescaled frame rotated by ``kappa`` about the y-axis."""

    masses: MassPair

    @property
    def kappa(self) -> float:
        return math.atan(math.sqrt(self.masses.m / self.masses.M))

    @property
    def sin(self) -> float:
        return math.sqrt(self.masses.m / (self.masses.m + self.masses.M))

    @property
    def cos(self) -> float:
        return math.sqrt(self.masses.M / (self.masses.m + self.masses.M))

    @property
    def tan(self) -> float:
        return math.sqrt(self.masses.m / self.masses.M)

    def rescale(self, P):
        """Target momentum to the z component ``P sqrt(m/M)``."""
        return np.asarray(P) * self.tan

    def unscale(self, p_z):
        return np.asarray(p_z) / self.tan


def to_rotated(f: RotatedFrame, p):
    """(p_x, p_y, p_z) -> rotated components; the last axis holds the vector."""
    p = np.asarray(p, dtype=float)
    px, py, pz = p[..., 0], p[..., 1], p[..., 2]
    s, c = f.sin, f.cos
    return np.stack([px * c - pz * s, py, px * s + pz * c], axis=-1)


def from_rotated(f: RotatedFrame, pbar):
    pbar = np.asarray(pbar, dtype=float)
    bx, by, bz = pbar[..., 0], pbar[..., 1], pbar[..., 2]
    s, c = f.sin, f.cos
    return np.stack([bx * c + bz * s, by, -bx * s + bz * c], axis=-1)


@dataclass(frozen=True)
class FinalState2D:
    p_x_fin: float
    p_y_fin: float
    P_fin: float


@dataclass(frozen=True)
class AngularDistribution:
    """Angular density normalized to unit integral over ``theta_grid``."""

    theta_grid: np.ndarray
    density: np.ndarray
    alpha: float
    meta: dict = field(default_factory=dict, compare=False)


def _pstar(ratio, pxi, pi2, pxf, pf2):
    dx = pxf - pxi
    return 0.5 * (dx + ratio * (pf2 - pi2) / dx)


def pstar_in(masses: MassPair, p_in_vec, p_fin_vec, cut: float = 0.0) -> float:
    """Initial target momentum that makes ``p_in_vec -> p_fin_vec`` kinematically allowed.

    Raises ForwardSingularity when ``|p_x_fin - p_x_in|`` is below ``cut`` times
    the incident momentum (and always when it is exactly zero).
    """
    pxi, pyi = p_in_vec
    pxf, pyf = p_fin_vec
    dx = pxf - pxi
    if dx == 0 or abs(dx) < cut * math.hypot(pxi, pyi):
        raise ForwardSingularity(f"|p_x_fin - p_x_in| = {abs(dx):g} inside the forward cut")
    return float(_pstar(masses.ratio(), pxi, pxi**2 + pyi**2, pxf, pxf**2 + pyf**2))


def final_state(masses: MassPair, p_in_vec, p_fin_vec) -> FinalState2D:
    P = pstar_in(masses, p_in_vec, p_fin_vec)
    return FinalState2D(p_fin_vec[0], p_fin_vec[1], P + p_in_vec[0] - p_fin_vec[0])


def prefactor_2d(masses: MassPair, epsilon: float = 1.0) -> float:
    """epsilon^2 sqrt(M (M+m)) / (2 pi m)."""
    m, M = masses.m, masses.M
    return epsilon**2 * math.sqrt(M * (M + m)) / (2 * math.pi * m)


def prob_2d(masses: MassPair, t: TargetSuperposition, p_in_vec, p_fin_vec,
            epsilon: float = 1.0, cosine_approx: bool = False, cut: float = FORWARD_CUT) -> float:
    """Density of the scattered probe in final momentum (p_x, p_y) for a sharp incident momentum."""
    P = pstar_in(masses, p_in_vec, p_fin_vec, cut)
    dx = abs(p_fin_vec[0] - p_in_vec[0])
    return float(prefactor_2d(masses, epsilon) * momentum_density(t, P, cosine_approx) / dx)


def dpstar_dp_in(masses: MassPair, p: float, theta_in: float, p_fin_vec) -> float:
    """Analytic derivative of P* with respect to the incident momentum magnitude.

    The final probe momentum is held fixed and the incident momentum moves along
    the beam direction.
    """
    r = masses.ratio()
    c = math.cos(theta_in)
    pxf, pyf = p_fin_vec
    dx = pxf - p * c
    pf2 = pxf**2 + pyf**2
    return 0.5 * (-c + r * (c * (pf2 - p**2) - 2 * p * dx) / dx**2)


# ---------------------------------------------------------------------------
# radial integration along a line of constant final angle


def radial_limit(masses: MassPair, t: TargetSuperposition, p: float) -> float:
    """Upper radial bound: three times the largest final momentum reachable from
    a target whose momentum lies inside the envelope cut."""
    P_cut = ENVELOPE_CUT / t.w
    return 3.0 * math.sqrt(p**2 + P_cut**2 / masses.ratio())


def radial_segments(masses, t, p, theta_in, theta_fin, cut=FORWARD_CUT):
    """Integration segments in the final momentum and the excluded forward window."""
    p_max = radial_limit(masses, t, p)
    cf = math.cos(theta_fin)
    pxi = p * math.cos(theta_in)
    if cf > 0:
        p_sing = pxi / cf
        half = cut * p / cf
        if p_sing - half < p_max:
            lo, hi = max(p_sing - half, 0.0), min(p_sing + half, p_max)
            segs = [(0.0, lo)] if lo > 0 else []
            if hi < p_max:
                segs.append((hi, p_max))
            return segs, (lo, hi)
    return [(0.0, p_max)], None


def _radial_integrand(masses, t, p, theta_in, theta_fin, pref):
    ratio = masses.ratio()
    pxi = p * math.cos(theta_in)
    cf, sf = math.cos(theta_fin), math.sin(theta_fin)

    def f(pf):
        pxf = pf * cf
        dx = pxf - pxi
        P = 0.5 * (dx + ratio * (pf**2 - p**2) / dx)
        env, ec, es = envelope_components(t, P)
        weight = pref * pf / np.abs(dx)
        return np.stack([weight * env, weight * ec, weight * es], axis=-1)

    return f


def angular_components(masses: MassPair, t: TargetSuperposition, p: float, theta_in: float,
                       theta_fin: float, epsilon: float = 1.0, spec: QuadSpec = RADIAL_SPEC,
                       cut: float = FORWARD_CUT):
    """Radial integrals of ``p_fin * prob`` split into envelope components.

    Returns ``(I_E, I_c, I_s)`` such that for phase alpha the angular density is
    ``N_alpha * (I_E + cos(alpha) I_c - sin(alpha) I_s)``, plus the excluded
    forward window (or None).
    """
    f = _radial_integrand(masses, t, p, theta_in, theta_fin, prefactor_2d(masses, epsilon))
    segs, window = radial_segments(masses, t, p, theta_in, theta_fin, cut)
    total = np.zeros(3)
    for a, b in segs:
        if b > a:
            total += integrate(f, a, b, spec)
    return total, window


def angular_density_direct(masses: MassPair, t: TargetSuperposition, p: float, theta_in: float,
                           theta_fin: float, epsilon: float = 1.0, spec: QuadSpec = RADIAL_SPEC,
                           cut: float = FORWARD_CUT) -> float:
    """Sharp-momentum angular density computed straight from ``momentum_density``."""
    ratio = masses.ratio()
    pref = prefactor_2d(masses, epsilon)
    pxi = p * math.cos(theta_in)
    cf = math.cos(theta_fin)

    def f(pf):
        dx = pf * cf - pxi
        P = 0.5 * (dx + ratio * (pf**2 - p**2) / dx)
        return pref * pf * momentum_density(t, P) / np.abs(dx)

    segs, _ = radial_segments(masses, t, p, theta_in, theta_fin, cut)
    return float(sum(integrate(f, a, b, spec) for a, b in segs if b > a))


def combine(components, t: TargetSuperposition, alpha: float):
    """Angular density for phase ``alpha`` from ``(..., 3)`` component arrays."""
    comps = np.asarray(components)
    return normalization(t, alpha) * (
        comps[..., 0] + math.cos(alpha) * comps[..., 1] - math.sin(alpha) * comps[..., 2]
    )


def _beam_nodes(beam: ProbeBeam, n: int):
    if beam.dp_in == 0:
        return np.array([beam.p_in]), np.array([1.0]), 0.0
    z, w = gauss_hermite(n)
    p = beam.p_in + beam.dp_in * z
    keep = p > 0
    return p[keep], w[keep], float(w[~keep].sum())


def folded_components(masses: MassPair, t: TargetSuperposition, beam: ProbeBeam, thetas,
                      epsilon: float = 1.0, spec: QuadSpec = RADIAL_SPEC,
                      cut: float = FORWARD_CUT, tol: float = 1e-6):
    """Components at each final angle, folded over the beam's momentum spread.

    Gauss-Hermite nodes double from 32 until the components change by less than
    ``tol`` relative to the envelope component.  Returns ``(comps, meta)`` with
    ``comps`` of shape ``(len(thetas), 3)``.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))

    def at_nodes(n):
        ps, ws, dropped = _beam_nodes(beam, n)
        comps = np.zeros((len(thetas), 3))
        windows = []
        for p, wgt in zip(ps, ws):
            for i, th in enumerate(thetas):
                c, win = angular_components(masses, t, p, beam.theta_in, th, epsilon, spec, cut)
                comps[i] += wgt * c
                if p == ps[len(ps) // 2]:
                    windows.append(win)
        return comps, windows, dropped

    if beam.dp_in == 0:
        comps, windows, _ = at_nodes(1)
        return comps, {"beam_nodes": 1, "forward_windows": windows}
    n = GH2D_START
    comps, windows, dropped = at_nodes(n)
    while n < GH2D_MAX:
        n *= 2
        new, windows, dropped = at_nodes(n)
        change = np.max(np.abs(new - comps)) / np.max(np.abs(new[:, 0]))
        comps = new
        if change <= tol:
            break
    return comps, {"beam_nodes": n, "forward_windows": windows, "dropped_weight": dropped}


def theta_grid_deg(theta_in: float, start: float = 10.0, stop: float = 170.0, step: float = 0.5,
                   forward_cut_deg: float = 1.0) -> np.ndarray:
    """Final-angle grid in degrees with the forward window around theta_in removed."""
    grid = np.arange(start, stop + 0.5 * step, step)
    grid = np.round(grid, 10)
    return grid[np.abs(grid - math.degrees(theta_in)) >= forward_cut_deg - 1e-9]


def _root_guard(masses, beam, thetas, window_sigmas=4.0):
    """Final angles at which both incident-momentum roots fall inside the beam window."""
    if beam.dp_in == 0:
        return []
    flagged = []
    for th in thetas:
        for pf in stationary_final_momenta(masses, beam.p_in, beam.theta_in, th):
            pfv = (pf * math.cos(th), pf * math.sin(th))
            try:
                P_f = final_state(masses, beam.p_vec, pfv).P_fin
            except ForwardSingularity:
                continue
            if count_kinematic_roots(masses, pfv, P_f, beam, window_sigmas) == 2:
                flagged.append(float(th))
                break
    return flagged


def angular_distribution(masses: MassPair, t: TargetSuperposition, beam: ProbeBeam, theta_grid,
                         epsilon: float = 1.0, spec: QuadSpec = RADIAL_SPEC,
                         cut: float = FORWARD_CUT, components=None) -> AngularDistribution:
    """Normalized angular distribution of the scattered probe for the target's phase.

    ``theta_grid`` is in radians.  Precomputed ``(comps, meta)`` from
    :func:`folded_components` may be passed to reuse them across phases.
    """
    thetas = np.asarray(theta_grid, dtype=float)
    if np.any(np.diff(thetas) <= 0) or thetas[0] <= 0 or thetas[-1] >= math.pi:
        raise ValueError("theta_grid must increase strictly inside (0, pi)")
    near = np.abs(thetas - beam.theta_in) < cut
    if np.any(near):
        raise ForwardSingularity("theta_grid touches the forward direction")
    period = angular_fringe_period(masses, t, beam)
    if period is not None and len(thetas) > 1 and np.max(np.diff(thetas)) > period / 4:
        raise GridTooCoarse(f"angular step exceeds a quarter of the fringe period {period:g} rad")
    comps, meta = components or folded_components(masses, t, beam, thetas, epsilon, spec, cut)
    raw = np.clip(combine(comps, t, t.alpha), 0.0, None)
    norm = float(np.trapezoid(raw, thetas))
    if not norm > 0:
        raise DegenerateDensity("angular density vanishes on the whole grid")
    meta = dict(meta, raw=raw, normalization=norm, root_guard=_root_guard(masses, beam, thetas))
    return AngularDistribution(thetas, raw / norm, t.alpha, meta)


def local_maxima_count(grid, values) -> int:
    """Interior local maxima, counted separately on each gap-free stretch of ``grid``.

    A gap (such as the excluded forward window) is any step larger than 1.5
    times the smallest step; maxima are never counted at a stretch's ends.
    """
    x = np.asarray(grid, dtype=float)
    y = np.asarray(values, dtype=float)
    steps = np.diff(x)
    breaks = np.flatnonzero(steps > 1.5 * steps.min()) + 1
    total = 0
    for seg in np.split(np.arange(len(x)), breaks):
        v = y[seg]
        if len(v) >= 3:
            total += int(np.count_nonzero((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])))
    return total


def angular_fringe_period(masses: MassPair, t: TargetSuperposition, beam: ProbeBeam):
    """Smallest angular fringe period seen at the stationary configurations, if any.

    Uses d|dP*/dtheta_fin| along the curve P* = 0, estimated by central differences.
    """
    periods = []
    h = 1e-5
    for th in np.linspace(0.05, math.pi - 0.05, 60):
        if abs(th - beam.theta_in) < 0.05:
            continue
        for pf in stationary_final_momenta(masses, beam.p_in, beam.theta_in, th):
            def P(theta):
                v = (pf * math.cos(theta), pf * math.sin(theta))
                return pstar_in(masses, beam.p_vec, v)
            try:
                slope = abs(P(th + h) - P(th - h)) / (2 * h)
            except ForwardSingularity:
                continue
            if slope > 0:
                periods.append(2 * math.pi / (t.d * slope))
    return min(periods) if periods else None


def stationary_final_momenta(masses: MassPair, p: float, theta_in: float, theta_fin: float):
    """Final momenta along ``theta_fin`` scattering off a target initially at rest (P* = 0).

    Solves ``(p_f cos th_f - p cos th_in)^2 + (M/m)(p_f^2 - p^2) = 0``; the
    trivial forward solution and non-positive roots are discarded.
    """
    r = masses.ratio()
    c, cf = math.cos(theta_in), math.cos(theta_fin)
    disc = r * (cf**2 - c**2 + r)
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    roots = [p * (c * cf + s * sq) / (cf**2 + r) for s in (1.0, -1.0)]
    out = []
    for pf in roots:
        if pf <= 1e-12 * p:
            continue
        if abs(pf * cf - p * c) < 1e-9 * p:
            continue
        out.append(pf)
    return sorted(set(out))


# ---------------------------------------------------------------------------
# visibility


def _visibility_from_components(comps, t: TargetSuperposition, tol: float = 1e-4):
    def vis(alpha):
        a = combine(comps, t, alpha)
        b = combine(comps, t, alpha + math.pi)
        return (a - b) / (a + b)

    if combine(comps, t, 0.0) + combine(comps, t, math.pi) <= 0:
        raise DegenerateDensity("both phase densities vanish")
    scan = np.linspace(0.0, math.pi, 64, endpoint=False)
    values = np.array([abs(vis(a)) for a in scan])
    i = int(np.argmax(values))
    step = scan[1] - scan[0]
    best, best_val = golden_section_max(lambda a: abs(vis(a)), scan[i] - step, scan[i] + step, tol)
    if vis(best) < 0:
        best += math.pi
    return float(best_val), float(best % (2 * math.pi))


def visibility_2d(masses: MassPair, t: TargetSuperposition, beam: ProbeBeam, theta_fin: float,
                  epsilon: float = 1.0, spec: QuadSpec = RADIAL_SPEC,
                  cut: float = FORWARD_CUT) -> VisibilityResult:
    """Phase-maximized ``(P_a - P_{a+pi}) / (P_a + P_{a+pi})`` at one final angle."""
    if abs(theta_fin - beam.theta_in) < cut:
        raise ForwardSingularity("theta_fin lies in the forward cut")
    comps, meta = folded_components(masses, t, beam, [theta_fin], epsilon, spec, cut)
    vis, best = _visibility_from_components(comps[0], t)
    return VisibilityResult(min(vis, 1.0), best, "numeric", dict(meta, components=comps[0]))


def caustic_final_momenta(masses: MassPair, p: float, theta_in: float, theta_fin: float):
    """Final momenta along ``theta_fin`` where ``P*`` is stationary in ``|p_fin|``.

    These radial caustics carry the fringes that survive integration over the
    final momentum magnitude.  Real roots exist only for
    ``|cos theta_fin| <= |cos theta_in|``.
    """
    r = masses.ratio()
    c, cf = math.cos(theta_in), math.cos(theta_fin)
    if abs(cf) < 1e-12 or cf**2 > c**2:
        return []
    q = math.sqrt(r * (c**2 - cf**2) / (cf**2 + r))
    roots = [p / cf * (c + s * q) for s in (1.0, -1.0)]
    return sorted(pf for pf in roots if pf > 1e-12 * p and abs(pf * cf - p * c) > 1e-9 * p)


def visibility_envelope_2d(masses: MassPair, t: TargetSuperposition, beam: ProbeBeam,
                           theta_fin: float) -> VisibilityResult:
    """Small-spread factor ``exp(-d^2 (dP*/dp)^2 dp^2 / 2)`` at the radial caustics.

    The angular fringes come from final momenta where ``P*`` is stationary along
    the ray; there the fringe phase ``P* d`` shifts with the incident momentum
    at the rate ``dP*/dp``.  With two caustics their factors are averaged with
    stationary-phase weights ``p_f exp(-P*^2 w^2) / (|dx| sqrt|P*''|)``.  The
    result multiplies the sharp-beam visibility.
    """
    p, th = beam.p_in, beam.theta_in
    roots = caustic_final_momenta(masses, p, th, theta_fin)
    if not roots:
        raise DegenerateDensity("the ray has no radial caustic; its fringes wash out even for a sharp beam")
    r = masses.ratio()
    cf, sf = math.cos(theta_fin), math.sin(theta_fin)
    pxi, pi2 = p * math.cos(th), p * p

    def along(pf):
        return _pstar(r, pxi, pi2, pf * cf, pf * pf)

    envs, weights, slopes, pstars = [], [], [], []
    for pf in roots:
        h = 1e-4 * pf
        curv = (along(pf + h) - 2 * along(pf) + along(pf - h)) / h**2
        P = along(pf)
        slope = dpstar_dp_in(masses, p, th, (pf * cf, pf * sf))
        envs.append(math.exp(-(t.d**2) * slope**2 * beam.dp_in**2 / 2))
        weights.append(pf * math.exp(-(P * t.w) ** 2) / abs(pf * cf - pxi) / math.sqrt(abs(curv)))
        slopes.append(slope)
        pstars.append(P)
    if sum(weights) == 0:
        raise DegenerateDensity("caustics lie outside the target envelope")
    env = float(np.average(envs, weights=weights))
    return VisibilityResult(env, t.alpha, "analytic",
                            {"caustic_p_fin": roots, "pstar": pstars, "dpstar_dp": slopes, "weights": weights})


def transfer_condition(masses: MassPair, beam: ProbeBeam) -> float:
    """Target final momentum ``M p / (m cos theta_in)`` at which orthogonality transfers."""
    return masses.M * beam.p_in / (masses.m * math.cos(beam.theta_in))


def transfer_final_momenta(masses: MassPair, beam: ProbeBeam, theta_fin: float):
    """Final probe momenta along ``theta_fin`` whose target recoil meets the transfer condition."""
    r = masses.ratio()
    p = beam.p_in
    c, cf = math.cos(beam.theta_in), math.cos(theta_fin)
    if abs(r - c**2) <= 1e-12 * r:
        # The quadratic collapses to p_f = 0; only the rays theta_fin = theta_in
        # and pi - theta_in (where every p_f qualifies) remain.
        return []
    qa = r - cf**2
    qb = -2 * cf * p * (r - c**2) / c
    qc = p**2 * (r - c**2)
    if qa == 0:
        roots = [] if qb == 0 else [-qc / qb]
    else:
        disc = qb**2 - 4 * qa * qc
        if disc < 0:
            return []
        sq = math.sqrt(disc)
        roots = [(-qb + sq) / (2 * qa), (-qb - sq) / (2 * qa)]
    pxi = p * c
    return sorted({x for x in roots if x > 0 and abs(x * cf - pxi) > 1e-9 * p})


def count_kinematic_roots(masses: MassPair, p_fin_vec, P_fin: float, beam: ProbeBeam,
                          window_sigmas: float | None = None) -> int:
    """Number of incident momenta along the beam direction leading to this final state.

    Momentum fixes ``P_in = Q - p cos(theta_in)`` with ``Q = p_x_fin + P_fin``;
    energy conservation is then quadratic in ``p``.  Only positive roots are
    counted, and with ``window_sigmas`` only those within that many beam spreads
    of the mean momentum.
    """
    m, M = masses.m, masses.M
    c = math.cos(beam.theta_in)
    pxf, pyf = p_fin_vec
    Q = pxf + P_fin
    E = (pxf**2 + pyf**2) / (2 * m) + P_fin**2 / (2 * M)
    qa = 1 / m + c**2 / M
    qb = -2 * Q * c / M
    qc = Q**2 / M - 2 * E
    disc = qb**2 - 4 * qa * qc
    if disc < -1e-12 * qb**2 and disc < 0:
        return 0
    if abs(disc) <= 1e-12 * max(qb**2, abs(4 * qa * qc)):
        roots = [-qb / (2 * qa)]
    else:
        sq = math.sqrt(disc)
        roots = [(-qb + sq) / (2 * qa), (-qb - sq) / (2 * qa)]
    roots = [x for x in roots if x > 0]
    if window_sigmas is not None:
        half = window_sigmas * beam.dp_in
        roots = [x for x in roots if abs(x - beam.p_in) <= half]
    return len(roots)
