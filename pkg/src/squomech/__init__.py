"""Steady-state Gaussian entanglement and EPR steering of a squeezed
whispering-gallery optomechanical resonator with two mechanical modes."""

from .model import (
    DerivedQuantities,
    EffectiveDrive,
    ModelParams,
    PhysicalDrive,
    Reservoir,
    derive,
)

__all__ = [
    "DerivedQuantities",
    "EffectiveDrive",
    "ModelParams",
    "PhysicalDrive",
    "Reservoir",
    "derive",
]

__version__ = "0.1.0"
