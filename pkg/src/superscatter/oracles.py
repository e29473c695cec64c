"""Independent brute-force references for the analytic fast paths.

Every oracle is deterministic given its seed.  Random streams come from
numpy's PCG64 with per-shard seeds spawned from one ``SeedSequence``, so a run
is reproducible regardless of how many events are requested per shard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import fsolve

from .kinematics1d import Kinematics1D, Pfin_of, pfin_of
from .kinematics2d import (
    RotatedFrame,
    combine,
    folded_components,
    from_rotated,
    pstar_in,
    to_rotated,
    transfer_condition,
)
from .params import MassPair, ProbeBeam, ValidatedParams
from .quadrature import find_root
from .target import TargetSuperposition, momentum_density, wavefunction

SHARD = 1_000_000


@dataclass(frozen=True)
class OracleReport:
    name: str
    value: float
    reference: float
    rel_err: float
    samples: int
    seed: int | None = None

    @classmethod
    def compare(cls, name, value, reference, samples, seed=None):
        scale = max(abs(reference), 1e-300)
        return cls(name, float(value), float(reference), abs(value - reference) / scale, int(samples), seed)


def _shards(n: int, seed: int):
    counts = [SHARD] * (n // SHARD) + ([n % SHARD] if n % SHARD else [])
    children = np.random.SeedSequence(seed).spawn(len(counts))
    for count, child in zip(counts, children):
        yield count, np.random.Generator(np.random.PCG64(child))


def sample_target_momentum(t: TargetSuperposition, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` target momenta from ``[1 + cos(P d + alpha)] exp(-P^2 w^2)`` by rejection."""
    out = np.empty(n)
    filled = 0
    sigma = 1.0 / (math.sqrt(2.0) * t.w)
    while filled < n:
        need = n - filled
        P = rng.normal(0.0, sigma, size=2 * need + 16)
        u = rng.random(P.size)
        keep = P[u < 0.5 * (1.0 + np.cos(P * t.d + t.alpha))][:need]
        out[filled:filled + keep.size] = keep
        filled += keep.size
    return out


def sample_beam_momentum(beam: ProbeBeam, n: int, rng: np.random.Generator) -> np.ndarray:
    """Incident momentum magnitudes; the Gaussian is truncated to positive values."""
    if beam.dp_in == 0:
        return np.full(n, beam.p_in)
    out = np.empty(n)
    filled = 0
    while filled < n:
        p = rng.normal(beam.p_in, beam.dp_in, size=n - filled)
        p = p[p > 0]
        out[filled:filled + p.size] = p
        filled += p.size
    return out


@dataclass(frozen=True)
class Events2D:
    p_in: np.ndarray      # (n, 2) incident probe momentum
    P_in: np.ndarray      # (n,) incident target momentum
    p_fin: np.ndarray     # (n, 2)
    P_fin: np.ndarray     # (n,)


def scatter_rotated(masses: MassPair, p_in: np.ndarray, P_in: np.ndarray, phi: np.ndarray):
    """Scatter in the rotated frame with final azimuth ``phi`` about the rotated z axis."""
    frame = RotatedFrame(masses)
    vec = np.stack([p_in[:, 0], p_in[:, 1], frame.rescale(P_in)], axis=-1)
    bar = to_rotated(frame, vec)
    rho = np.hypot(bar[:, 0], bar[:, 1])
    out_bar = np.stack([rho * np.cos(phi), rho * np.sin(phi), bar[:, 2]], axis=-1)
    out = from_rotated(frame, out_bar)
    return out[:, :2], frame.unscale(out[:, 2])


def sample_events_2d(masses: MassPair, t: TargetSuperposition, beam: ProbeBeam, n: int,
                     rng: np.random.Generator) -> Events2D:
    """Events drawn from the target density, the beam, and a uniform scattering azimuth."""
    p = sample_beam_momentum(beam, n, rng)
    p_in = np.stack([p * math.cos(beam.theta_in), p * math.sin(beam.theta_in)], axis=-1)
    P_in = sample_target_momentum(t, n, rng)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=n)
    p_fin, P_fin = scatter_rotated(masses, p_in, P_in, phi)
    return Events2D(p_in, P_in, p_fin, P_fin)


@dataclass(frozen=True)
class AngularHistogram:
    edges: np.ndarray     # radians
    counts: np.ndarray
    n: int
    seed: int

    @property
    def density(self) -> np.ndarray:
        """Events per radian per event: an estimate of the raw angular density / epsilon^2."""
        return self.counts / (self.n * np.diff(self.edges))

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.counts) / (self.n * np.diff(self.edges))


def mc_sample_rotated(masses: MassPair, t: TargetSuperposition, beam: ProbeBeam, n: int,
                      seed: int, edges=None) -> AngularHistogram:
    """Histogram of final probe angles from ``n`` rotated-frame scattering events.

    Angles are ``atan2(p_y, p_x)`` in ``(-pi, pi]``; ``edges`` defaults to 1 degree
    bins over ``[0, pi]``.  Events outside the edges still count towards ``n``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    edges = np.radians(np.arange(0.0, 180.5, 1.0)) if edges is None else np.asarray(edges, float)
    counts = np.zeros(len(edges) - 1, dtype=np.int64)
    for count, rng in _shards(n, seed):
        ev = sample_events_2d(masses, t, beam, count, rng)
        theta = np.arctan2(ev.p_fin[:, 1], ev.p_fin[:, 0])
        counts += np.histogram(theta, bins=edges)[0]
    return AngularHistogram(edges, counts, n, seed)


def sample_events_1d(k: Kinematics1D, t: TargetSuperposition, beam: ProbeBeam, n: int,
                     rng: np.random.Generator):
    """``(p_in, P_in, p_fin, P_fin)`` arrays for elastic 1D collisions."""
    p_in = sample_beam_momentum(beam, n, rng)
    P_in = sample_target_momentum(t, n, rng)
    return p_in, P_in, pfin_of(k, p_in, P_in), Pfin_of(k, p_in, P_in)


def elastic_1d_bruteforce(m: float, M: float, p_in: float, P_in: float):
    """Non-trivial root of 1D momentum and energy conservation, via the centre-of-mass frame."""
    V = (p_in + P_in) / (m + M)
    u, U = p_in / m - V, P_in / M - V
    return m * (V - u), M * (V - U)


def pstar_bruteforce(masses: MassPair, p_in_vec, p_fin_vec, guess: float = 0.0) -> float:
    """Solve both conservation laws numerically for ``(P_in, P_fin)``; returns ``P_in``."""
    m, M = masses.m, masses.M
    pxi, pyi = p_in_vec
    pxf, pyf = p_fin_vec
    e_in = (pxi**2 + pyi**2) / (2 * m)
    e_fin = (pxf**2 + pyf**2) / (2 * m)

    def eqs(x):
        P_i, P_f = x
        return [pxi + P_i - pxf - P_f, e_in + P_i**2 / (2 * M) - e_fin - P_f**2 / (2 * M)]

    sol, info, ok, msg = fsolve(eqs, [guess, guess + pxi - pxf], full_output=True, xtol=1e-14)
    # A stall at machine precision is reported as failure; judge by the residual instead.
    scale = abs(pxi) + abs(pxf) + e_in + e_fin
    if ok != 1 and not np.max(np.abs(info["fvec"])) <= 1e-10 * scale:
        raise ArithmeticError(f"conservation solve failed: {msg}")
    return float(sol[0])


def dft_momentum_density(t: TargetSuperposition, P, half_width: float | None = None, n: int = 2**16):
    """Momentum density by direct quadrature of the sampled position amplitude.

    Uses the ``exp(+i P X)`` transform convention of :mod:`target`.
    """
    P = np.atleast_1d(np.asarray(P, dtype=float))
    L = half_width or (t.d / 2 + 12 * t.w)
    X = np.linspace(-L, L, n)
    dX = X[1] - X[0]
    psi = wavefunction(t, X)
    out = np.empty(P.shape)
    for s in range(0, len(P), 256):
        phase = np.exp(1j * np.outer(P[s:s + 256], X))
        amp = phase @ psi * dX / math.sqrt(2 * math.pi)
        out[s:s + 256] = np.abs(amp) ** 2
    return out


# ---------------------------------------------------------------------------
# conservation and the transfer condition


@dataclass(frozen=True)
class ConservationReport:
    momentum: float       # max relative violation of the conserved momentum component
    energy: float         # max relative violation of kinetic energy
    py_changed: float     # fraction of events whose probe p_y changed (2D only)
    samples: int


def conservation_1d(k: Kinematics1D, t: TargetSuperposition, beam: ProbeBeam, n: int,
                    seed: int) -> ConservationReport:
    m, M = k.masses.m, k.masses.M
    worst_p = worst_e = 0.0
    for count, rng in _shards(n, seed):
        p_in, P_in, p_fin, P_fin = sample_events_1d(k, t, beam, count, rng)
        mom = np.abs(p_fin + P_fin - p_in - P_in) / (np.abs(p_in) + np.abs(P_in))
        e_in = p_in**2 / (2 * m) + P_in**2 / (2 * M)
        e_fin = p_fin**2 / (2 * m) + P_fin**2 / (2 * M)
        worst_p = max(worst_p, float(mom.max()))
        worst_e = max(worst_e, float((np.abs(e_fin - e_in) / e_in).max()))
    return ConservationReport(worst_p, worst_e, 1.0, n)


def conservation_2d(masses: MassPair, t: TargetSuperposition, beam: ProbeBeam, n: int,
                    seed: int) -> ConservationReport:
    m, M = masses.m, masses.M
    worst_p = worst_e = 0.0
    changed = 0
    for count, rng in _shards(n, seed):
        ev = sample_events_2d(masses, t, beam, count, rng)
        px_in, px_fin = ev.p_in[:, 0] + ev.P_in, ev.p_fin[:, 0] + ev.P_fin
        scale = np.abs(ev.p_in[:, 0]) + np.abs(ev.P_in)
        e_in = (ev.p_in**2).sum(axis=1) / (2 * m) + ev.P_in**2 / (2 * M)
        e_fin = (ev.p_fin**2).sum(axis=1) / (2 * m) + ev.P_fin**2 / (2 * M)
        worst_p = max(worst_p, float((np.abs(px_fin - px_in) / scale).max()))
        worst_e = max(worst_e, float((np.abs(e_fin - e_in) / e_in).max()))
        changed += int(np.count_nonzero(np.abs(ev.p_fin[:, 1] - ev.p_in[:, 1]) > 1e-9 * beam.p_in))
    return ConservationReport(worst_p, worst_e, changed / n, n)


def fd_dpstar_dp(masses: MassPair, p: float, theta_in: float, p_fin_vec, rel_step: float = 1e-5) -> float:
    """Central-difference derivative of P* in the incident momentum magnitude."""
    h = rel_step * p
    c, s = math.cos(theta_in), math.sin(theta_in)
    hi = pstar_in(masses, ((p + h) * c, (p + h) * s), p_fin_vec)
    lo = pstar_in(masses, ((p - h) * c, (p - h) * s), p_fin_vec)
    return (hi - lo) / (2 * h)


def transfer_final_state(masses: MassPair, beam: ProbeBeam, p_x_fin: float):
    """Probe final momentum with the given x component whose target recoil equals
    the transfer value ``M p / (m cos theta_in)``; None if no real p_y exists."""
    r = masses.ratio()
    p = beam.p_in
    pxi = p * math.cos(beam.theta_in)
    dx = p_x_fin - pxi
    Pt = transfer_condition(masses, beam) - pxi + p_x_fin
    py2 = (2 * Pt - dx) * dx / r - p_x_fin**2 + p**2
    if not py2 > 0 or dx == 0:
        return None
    return p_x_fin, math.sqrt(py2)


def transfer_root_oracle(masses: MassPair, beam: ProbeBeam, p_x_fin: float) -> float:
    """Target final momentum at the zero of the finite-difference dP*/dp, searched
    along ``p_y`` at fixed ``p_x_fin``."""
    p = beam.p_in
    pxi = p * math.cos(beam.theta_in)

    def slope(py):
        return fd_dpstar_dp(masses, p, beam.theta_in, (p_x_fin, py))

    grid = np.linspace(1e-3 * p, 6 * p, 2000)
    vals = np.array([slope(y) for y in grid])
    idx = np.flatnonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))
    if len(idx) == 0:
        raise ArithmeticError("finite-difference derivative has no zero along this line")
    i = int(idx[0])
    py = find_root(slope, (grid[i], grid[i + 1]), tol=1e-13 * p)
    P = pstar_in(masses, beam.p_vec, (p_x_fin, py))
    return P + pxi - p_x_fin


# ---------------------------------------------------------------------------
# named suites for the command line


def _window_probability(masses, t, beam, lo, hi, panels=10, order=6):
    """Composite Gauss-Legendre integral of the angular density over ``[lo, hi]``."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    thetas = (half[:, None] * x + 0.5 * (edges[:-1] + edges[1:])[:, None]).ravel()
    comps, _ = folded_components(masses, t, beam, thetas)
    return float(combine(comps, t, t.alpha) @ (half[:, None] * w).ravel())


def run_named(name: str, params: ValidatedParams, seed: int, events: int) -> OracleReport:
    """Run one named oracle against its fast path for the given parameters."""
    masses, beam, t = params.masses, params.beam, params.target
    p, th = beam.p_in, beam.theta_in
    if name == "elastic-1d":
        k = Kinematics1D(masses)
        P_in = 0.3 * p
        ref = float(pfin_of(k, p, P_in))
        value = elastic_1d_bruteforce(masses.m, masses.M, p, P_in)[0]
        return OracleReport.compare(name, value, ref, 1)
    if name == "pstar":
        p_in = (p * math.cos(th), p * math.sin(th))
        p_fin = (1.2 * p * math.cos(math.radians(60)), 1.2 * p * math.sin(math.radians(60)))
        ref = pstar_in(masses, p_in, p_fin)
        return OracleReport.compare(name, pstar_bruteforce(masses, p_in, p_fin, ref + 0.1), ref, 1)
    if name == "density-dft":
        P = 0.37 * t.fringe_period
        ref = float(momentum_density(t, P))
        return OracleReport.compare(name, dft_momentum_density(t, P)[0], ref, 2**16)
    if name == "transfer":
        ref = transfer_condition(masses, beam)
        value = transfer_root_oracle(masses, beam, -0.5 * p)
        return OracleReport.compare(name, value, ref, 2000)
    if name == "conservation":
        rep = conservation_2d(masses, t, beam, events, seed)
        worst = max(rep.momentum, rep.energy)
        return OracleReport(name, worst, 0.0, worst, rep.samples, seed)
    if name == "mc-angular":
        lo = th + math.radians(5)
        hi = min(th + math.radians(25), math.radians(179))
        hist = mc_sample_rotated(masses, t, beam, events, seed, edges=np.array([lo, hi]))
        value = hist.counts[0] / events
        ref = _window_probability(masses, t, beam, lo, hi)
        return OracleReport.compare(name, value, ref, events, seed)
    raise ValueError(f"unknown oracle {name!r}")
