"""Probe scattering off a single free target prepared in a two-location superposition.

Two models are provided: a one-dimensional "single mirror" Fabry-Perot setup
(:mod:`superscatter.kinematics1d`) and a two-dimensional "single slit" Young
setup (:mod:`superscatter.kinematics2d`).  Units are hbar = 1 with the incident
probe wavelength as the length unit.
"""

from .errors import ScatterError, ValidationError
from .params import (
    CouplingConstant,
    MassPair,
    ProbeBeam,
    UnitSystem,
    ValidatedParams,
    params_from_settings,
    validate_params,
)
from .target import TargetSuperposition, momentum_density

__version__ = "0.1.0"

__all__ = [
    "CouplingConstant",
    "MassPair",
    "ProbeBeam",
    "ScatterError",
    "TargetSuperposition",
    "UnitSystem",
    "ValidatedParams",
    "ValidationError",
    "__version__",
    "momentum_density",
    "params_from_settings",
    "validate_params",
]
