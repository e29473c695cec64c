"""The target particle prepared in two Gaussian packets at X = -d/2 and X = +d/2.

Position amplitude::

    phi(X) = C * [g(X + d/2) + exp(i alpha) g(X - d/2)],   g(X) = exp(-X^2 / 2 w^2)

The momentum amplitude uses ``phi~(P) = (2 pi)^(-1/2) * int exp(+i P X) phi(X) dX``
so that the momentum density reads ``N [1 + cos(P d + alpha)] exp(-P^2 w^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import PacketsOverlap, ParamsMismatch, ValidationError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TargetSuperposition:
    """Two-packet target: separation ``d``, packet width ``w``, relative phase ``alpha``."""

    d: float
    w: float
    alpha: float = 0.0

    def __post_init__(self):
        if not (self.d > 0 and math.isfinite(self.d)):
            raise ValidationError(f"separation d must be positive, got {self.d}")
        if not (self.w > 0 and math.isfinite(self.w)):
            raise ValidationError(f"packet width w must be positive, got {self.w}")
        if not self.w < self.d / 2:
            raise PacketsOverlap(f"packet width w={self.w} must be smaller than d/2={self.d / 2}")
        if not math.isfinite(self.alpha):
            raise ValidationError(f"alpha must be finite, got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha) % TWO_PI)

    @property
    def overlap(self) -> float:
        """Overlap integral of the two packets relative to one packet's norm."""
        return math.exp(-self.d**2 / (4.0 * self.w**2))

    @property
    def fringe_period(self) -> float:
        """Momentum-space fringe period 2*pi*hbar/d."""
        return TWO_PI / self.d

    @property
    def envelope_width(self) -> float:
        return 1.0 / self.w

    def with_alpha(self, alpha: float) -> "TargetSuperposition":
        return TargetSuperposition(self.d, self.w, alpha)


@dataclass(frozen=True)
class MomentumDensity:
    """Callable momentum density together with its characteristic scales."""

    density: Callable[[np.ndarray], np.ndarray]
    fringe_period: float
    envelope_width: float

    def __call__(self, P):
        return self.density(P)


def normalization(t: TargetSuperposition, alpha: float | None = None) -> float:
    """Closed-form N making the momentum density integrate to one."""
    a = t.alpha if alpha is None else alpha
    return t.w / (math.sqrt(math.pi) * (1.0 + math.cos(a) * t.overlap))


def envelope_components(t: TargetSuperposition, P):
    """Unnormalized pieces ``(E, E cos(Pd), E sin(Pd))`` with ``E = exp(-P^2 w^2)``.

    For any phase, ``rho_alpha = N_alpha * (E + cos(alpha) Ec - sin(alpha) Es)``.
    """
    P = np.asarray(P, dtype=float)
    env = np.exp(-((P * t.w) ** 2))
    phase = P * t.d
    return env, env * np.cos(phase), env * np.sin(phase)


def momentum_density(t: TargetSuperposition, P, cosine_approx: bool = False):
    """Target momentum density ``|phi~_alpha(P)|^2``.

    With ``cosine_approx`` the Gaussian envelope and normalization are dropped and
    the bare fringe factor ``1 + cos(P d + alpha)`` is returned.
    """
    P = np.asarray(P, dtype=float)
    fringe = 1.0 + np.cos(P * t.d + t.alpha)
    if cosine_approx:
        return fringe
    return normalization(t) * fringe * np.exp(-((P * t.w) ** 2))


def momentum_density_fn(t: TargetSuperposition, cosine_approx: bool = False) -> MomentumDensity:
    return MomentumDensity(
        lambda P: momentum_density(t, P, cosine_approx), t.fringe_period, t.envelope_width
    )


def wavefunction(t: TargetSuperposition, X):
    """Normalized complex position amplitude."""
    X = np.asarray(X, dtype=float)
    c = 1.0 / math.sqrt(2.0 * t.w * math.sqrt(math.pi) * (1.0 + math.cos(t.alpha) * t.overlap))
    left = np.exp(-((X + t.d / 2) ** 2) / (2 * t.w**2))
    right = np.exp(-((X - t.d / 2) ** 2) / (2 * t.w**2))
    return c * (left + np.exp(1j * t.alpha) * right)


def position_density(t: TargetSuperposition, X):
    """``|phi_alpha(X)|^2``: humps at +-d/2 plus the cos(alpha) overlap term."""
    X = np.asarray(X, dtype=float)
    w2 = t.w**2
    c2 = 1.0 / (2.0 * t.w * math.sqrt(math.pi) * (1.0 + math.cos(t.alpha) * t.overlap))
    humps = np.exp(-((X + t.d / 2) ** 2) / w2) + np.exp(-((X - t.d / 2) ** 2) / w2)
    cross = 2.0 * math.cos(t.alpha) * np.exp(-(X**2 + t.d**2 / 4) / w2)
    return c2 * (humps + cross)


def fringe_phase_shift(t1: TargetSuperposition, t2: TargetSuperposition) -> float:
    """Phase by which the fringe comb of ``t2`` is displaced relative to ``t1``.

    The momentum-space displacement is ``-shift / d``.
    """
    if t1.d != t2.d or t1.w != t2.w:
        raise ParamsMismatch("fringe shift is only defined between states differing in alpha")
    return (t2.alpha - t1.alpha) % TWO_PI


def modular_momentum(t: TargetSuperposition, P):
    """Momentum modulo the fringe period ``h/d``, in ``[0, 2 pi/d)``."""
    return np.mod(np.asarray(P, dtype=float), t.fringe_period)
