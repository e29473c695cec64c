"""Units, physical parameter bundles and the ``key = value`` parameter file.

Internally hbar = 1 and the incident probe wavelength is the unit of length,
so the mean incident momentum is ``2*pi``.  SI lengths only appear when a
parameter file is read or echoed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    AngleOutOfRange,
    ConfigParse,
    NonPositiveMass,
    NonPositiveMomentum,
    SpreadTooWide,
    ValidationError,
)
from .target import TargetSuperposition

HBAR = 1.0
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class UnitSystem:
    """Internal unit system; ``length_unit`` is metres per internal length."""

    length_unit: float = 1.0
    hbar: float = HBAR

    def __post_init__(self):
        if not self.length_unit > 0 or not math.isfinite(self.length_unit):
            raise ValidationError(f"length_unit must be positive, got {self.length_unit}")
        if self.hbar != HBAR:
            raise ValidationError("hbar is fixed to 1 in internal units")


@dataclass(frozen=True)
class MassPair:
    """Probe mass ``m`` and target mass ``M``."""

    m: float
    M: float

    def __post_init__(self):
        for name, value in (("m", self.m), ("M", self.M)):
            if not (value > 0 and math.isfinite(value)):
                raise NonPositiveMass(f"mass {name} must be positive and finite, got {value}")

    def ratio(self) -> float:
        """Target-to-probe mass ratio M/m."""
        return self.M / self.m


@dataclass(frozen=True)
class ProbeBeam:
    """Incident probe: mean momentum, incidence angle (radians), Gaussian spread."""

    p_in: float
    theta_in: float = 0.0
    dp_in: float = 0.0

    def __post_init__(self):
        if not (self.p_in > 0 and math.isfinite(self.p_in)):
            raise NonPositiveMomentum(f"p_in must be positive, got {self.p_in}")
        if not (self.dp_in >= 0 and math.isfinite(self.dp_in)):
            raise NonPositiveMomentum(f"dp_in must be non-negative, got {self.dp_in}")
        if not self.dp_in / self.p_in < 1:
            raise SpreadTooWide(f"dp_in/p_in = {self.dp_in / self.p_in:g} must be < 1")
        if not 0 <= self.theta_in < math.pi / 2:
            raise AngleOutOfRange(f"theta_in must lie in [0, pi/2), got {self.theta_in}")

    @property
    def p_vec(self) -> tuple[float, float]:
        """Mean incident momentum as (p_x, p_y)."""
        return (self.p_in * math.cos(self.theta_in), self.p_in * math.sin(self.theta_in))

    def with_momentum(self, p: float) -> "ProbeBeam":
        return ProbeBeam(p, self.theta_in, self.dp_in * p / self.p_in)


@dataclass(frozen=True)
class CouplingConstant:
    epsilon: float = 1.0

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")


# Single-slit reference setting: w = lambda/5, d = 7 lambda, lambda = 0.5 um, M/m = 0.5, 45 deg.
DEFAULT_SETTINGS: dict[str, float] = {
    "mass_probe": 1.0,
    "mass_target": 0.5,
    "lambda_in": 0.5e-6,
    "dp_over_p": 0.0,
    "theta_in_deg": 45.0,
    "d_over_lambda": 7.0,
    "w_over_lambda": 0.2,
    "alpha": 0.0,
}
PARAM_KEYS = tuple(DEFAULT_SETTINGS)


@dataclass(frozen=True)
class ValidatedParams:
    """A parameter bundle whose individual and cross-type invariants hold."""

    masses: MassPair
    beam: ProbeBeam
    target: TargetSuperposition
    coupling: CouplingConstant = CouplingConstant()
    units: UnitSystem = UnitSystem()
    settings: tuple[tuple[str, float], ...] = field(default=(), compare=False)

    def as_settings(self) -> dict[str, float]:
        """File-level ``key -> value`` view of this bundle."""
        if self.settings:
            return dict(self.settings)
        lam = TWO_PI / self.beam.p_in
        return {
            "mass_probe": self.masses.m,
            "mass_target": self.masses.M,
            "lambda_in": lam * self.units.length_unit,
            "dp_over_p": self.beam.dp_in / self.beam.p_in,
            "theta_in_deg": math.degrees(self.beam.theta_in),
            "d_over_lambda": self.target.d / lam,
            "w_over_lambda": self.target.w / lam,
            "alpha": self.target.alpha,
        }


def validate_params(
    masses: MassPair,
    beam: ProbeBeam,
    target: TargetSuperposition,
    coupling: CouplingConstant | None = None,
    units: UnitSystem | None = None,
) -> ValidatedParams:
    """Bundle already-constructed parameter objects.

    Each type checks its own invariants on construction; the packet-support
    condition ``w < d/2`` is enforced by :class:`TargetSuperposition`.
    """
    for obj, cls in ((masses, MassPair), (beam, ProbeBeam), (target, TargetSuperposition)):
        if not isinstance(obj, cls):
            raise ValidationError(f"expected {cls.__name__}, got {type(obj).__name__}")
    return ValidatedParams(
        masses, beam, target, coupling or CouplingConstant(), units or UnitSystem()
    )


def params_from_settings(settings: Mapping[str, float]) -> ValidatedParams:
    """Build parameters from file-level keys; missing keys take the single-slit reference values."""
    unknown = sorted(set(settings) - set(PARAM_KEYS))
    if unknown:
        raise ConfigParse(f"unknown parameter key(s): {', '.join(unknown)}")
    s = {**DEFAULT_SETTINGS, **{k: float(v) for k, v in settings.items()}}
    if not s["lambda_in"] > 0:
        raise NonPositiveMomentum(f"lambda_in must be positive, got {s['lambda_in']}")
    p_in = TWO_PI  # lambda_in is the internal length unit
    params = ValidatedParams(
        masses=MassPair(s["mass_probe"], s["mass_target"]),
        beam=ProbeBeam(p_in, math.radians(s["theta_in_deg"]), s["dp_over_p"] * p_in),
        target=TargetSuperposition(s["d_over_lambda"], s["w_over_lambda"], s["alpha"]),
        units=UnitSystem(s["lambda_in"]),
        settings=tuple((k, s[k]) for k in PARAM_KEYS),
    )
    return params


def parse_assignment(line: str) -> tuple[str, float]:
    if "=" not in line:
        raise ConfigParse(f"expected 'key = value', got {line!r}")
    key, value = (part.strip() for part in line.split("=", 1))
    if key not in PARAM_KEYS:
        raise ConfigParse(f"unknown parameter key: {key!r}")
    try:
        return key, float(value)
    except ValueError:
        raise ConfigParse(f"value for {key!r} is not a number: {value!r}") from None


def parse_lines(lines: Iterable[str]) -> dict[str, float]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    settings: dict[str, float] = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if line:
            key, value = parse_assignment(line)
            settings[key] = value
    return settings


def read_param_file(path: str | Path) -> dict[str, float]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigParse(f"cannot read parameter file {path}: {exc.strerror}") from exc
    return parse_lines(text.splitlines())


def format_echo(params: ValidatedParams) -> str:
    """Single-line ``k = v; ...`` echo that :func:`parse_echo` reads back exactly."""
    return "; ".join(f"{k} = {v!r}" for k, v in params.as_settings().items())


def parse_echo(echo: str) -> ValidatedParams:
    return params_from_settings(parse_lines(echo.split(";")))
