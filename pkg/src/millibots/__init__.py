"""millibots: simulator and control stack for modular magnetic millirobots."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .magnetics import (
    Dipole,
    MagnetSpec,
    PairInteraction,
    dipole_field,
    force_on_dipole,
    magnetic_moment,
    pair_interaction,
    required_field,
    torque_on_dipole,
)

__version__ = "0.1.0"

__all__ = [
    "Dipole",
    "KERNEL_BACKEND",
    "MagnetSpec",
    "PairInteraction",
    "dipole_field",
    "force_on_dipole",
    "magnetic_moment",
    "pair_interaction",
    "required_field",
    "torque_on_dipole",
]
