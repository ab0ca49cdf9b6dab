"""Closed-form magnetostatics for spherical permanent magnets.

Dipole torque and gradient force, the point-dipole field, pairwise
radial/tangential interaction forces with their energy, and the minimum
uniform field needed to break a dipole bond at a given magnet separation.

Sign convention: positive radial force is repulsive (outward along the
separation vector), so F_r = -dU/dr holds literally and attraction below
the magic angle shows up as F_r < 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import (
    MAGNET_RADIUS,
    MAGNETIZATION,
    MU0_OVER_4PI,
    RECONFIG_GAP_UM,
)
from .errors import InvalidConfigurationError, InvalidSpecError, SingularityError

# Radial force changes sign where cos^2(theta) = 1/3.
MAGIC_ANGLE_RAD = math.acos(math.sqrt(1.0 / 3.0))
MAGIC_ANGLE_DEG = math.degrees(MAGIC_ANGLE_RAD)


@dataclass(frozen=True)
class MagnetSpec:
    """Uniformly magnetized sphere."""

    radius: float = MAGNET_RADIUS  # m
    magnetization: float = MAGNETIZATION  # A/m

    def __post_init__(self):
        if not (self.radius > 0.0):
            raise InvalidSpecError(f"magnet radius must be positive, got {self.radius}")
        if not (self.magnetization > 0.0):
            raise InvalidSpecError(
                f"magnetization must be positive, got {self.magnetization}"
            )

    @property
    def volume(self) -> float:
        """Sphere volume, m^3."""
        return (4.0 / 3.0) * math.pi * self.radius**3

    @property
    def moment_magnitude(self) -> float:
        """Saturated dipole moment magnitude, A*m^2."""
        return self.magnetization * self.volume


DEFAULT_MAGNET = MagnetSpec()


@dataclass(frozen=True)
class Dipole:
    """Point dipole at a workspace position.

    The moment may be 2D (in-plane) or 3D; 2D moments are promoted to 3D
    with zero z component.
    """

    position: np.ndarray
    moment: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "moment", _as3(self.moment))


@dataclass(frozen=True)
class PairInteraction:
    """Radial/tangential force decomposition for two parallel dipoles."""

    separation: float  # m
    angle: float  # rad, between the dipole axis and the separation vector
    radial_force: float  # N, positive = repulsive
    tangential_force: float  # N
    energy: float  # J


def _as3(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape == (2,):
        return np.array([v[0], v[1], 0.0])
    if v.shape == (3,):
        return v.copy()
    raise ValueError(f"expected a 2- or 3-vector, got shape {v.shape}")


def magnetic_moment(spec: MagnetSpec) -> float:
    """Dipole moment magnitude M * (4/3) pi r^3 for a saturated sphere."""
    return spec.moment_magnitude


def torque_on_dipole(d: Dipole, b_field) -> np.ndarray:
    """Torque m x B on a dipole in a uniform field, N*m (3-vector).

    For planar inputs the z component is the only nonzero entry.
    """
    b = _as3(b_field)
    if not (np.all(np.isfinite(d.moment)) and np.all(np.isfinite(b))):
        raise ValueError("torque requires finite moment and field")
    return np.cross(d.moment, b)


def force_on_dipole(d: Dipole, gradient) -> np.ndarray:
    """Gradient force (m . grad) B, with `gradient` the Jacobian dB_i/dx_j.

    Accepts a 2x2 in-plane Jacobian or the full 3x3; returns a force vector
    of matching dimension.
    """
    g = np.asarray(gradient, dtype=float)
    if g.shape == (2, 2):
        return g @ d.moment[:2]
    if g.shape == (3, 3):
        return g @ d.moment
    raise ValueError(f"gradient must be 2x2 or 3x3, got {g.shape}")


def dipole_field(source: Dipole, at) -> np.ndarray:
    """Point-dipole field (mu0 / 4 pi r^3) [3 (m.rhat) rhat - m] at `at`, tesla."""
    at = np.asarray(at, dtype=float)
    pos = source.position
    if at.shape != pos.shape:
        # Allow mixing 2D positions with 3D query points and vice versa.
        at3 = np.zeros(3)
        at3[: at.shape[0]] = at
        pos3 = np.zeros(3)
        pos3[: pos.shape[0]] = pos
        r_vec = at3 - pos3
    else:
        r_vec = at - pos
        if r_vec.shape == (2,):
            r_vec = np.array([r_vec[0], r_vec[1], 0.0])
    r = float(np.linalg.norm(r_vec))
    if r == 0.0:
        raise SingularityError("dipole field requested at the source position")
    rhat = r_vec / r
    m = source.moment
    return (MU0_OVER_4PI / r**3) * (3.0 * np.dot(m, rhat) * rhat - m)


def pair_interaction(m1: float, m2: float, r: float, theta: float) -> PairInteraction:
    """Interaction of two parallel dipoles separated by r at angle theta.

    Returns the radial force (positive repulsive), the tangential force,
    and the pair energy.
    """
    if r <= 0.0:
        raise SingularityError(f"pair separation must be positive, got {r}")
    c = math.cos(theta)
    s = math.sin(theta)
    prefactor = 3.0 * MU0_OVER_4PI * m1 * m2 / r**4
    f_r = prefactor * (1.0 - 3.0 * c * c)
    f_t = prefactor * (2.0 * c * s)
    energy = MU0_OVER_4PI * m1 * m2 / r**3 * (1.0 - 3.0 * c * c)
    return PairInteraction(
        separation=r, angle=theta, radial_force=f_r, tangential_force=f_t, energy=energy
    )


def field_at_gap(gap_um: int, spec: MagnetSpec = DEFAULT_MAGNET) -> float:
    """Uniform field (T) matching the neighbor dipole field at `gap_um` separation.

    On the perpendicular bisector (m . rhat = 0) the dipole field magnitude
    is (mu0 / 4 pi) m / d^3; an applied field of at least this magnitude can
    rotate the partner magnet and break the bond. Takes the gap in integer
    micrometers so simulator bond thresholds and the named reconfiguration
    cases evaluate the exact same float expression.
    """
    if gap_um <= 0:
        raise InvalidConfigurationError(f"separation must be positive, got {gap_um} um")
    d = gap_um * 1e-6
    return MU0_OVER_4PI * spec.moment_magnitude / d**3


def required_field(config, spec: MagnetSpec = DEFAULT_MAGNET) -> float:
    """Minimum uniform field (T) for a named reconfiguration case.

    `config` is one of 'chain_to_gripper', 'chain_to_square', 'disassembly',
    or a custom magnet separation in meters.
    """
    if isinstance(config, str):
        if config not in RECONFIG_GAP_UM:
            raise InvalidConfigurationError(
                f"unknown case {config!r}; expected one of {sorted(RECONFIG_GAP_UM)}"
            )
        return field_at_gap(RECONFIG_GAP_UM[config], spec)
    d = float(config)
    if d <= 0.0:
        raise InvalidConfigurationError(f"separation must be positive, got {d}")
    return MU0_OVER_4PI * spec.moment_magnitude / d**3


def dipole_pair_force(m_i, m_j, r_vec) -> np.ndarray:
    """Force on dipole i exerted by dipole j, with r_vec = pos_i - pos_j.

    General vector form; for parallel moments it reduces to the
    radial/tangential decomposition of `pair_interaction`.
    """
    m_i = _as3(m_i)
    m_j = _as3(m_j)
    r_vec = _as3(r_vec)
    r = float(np.linalg.norm(r_vec))
    if r == 0.0:
        raise SingularityError("coincident dipoles")
    rhat = r_vec / r
    mi_r = float(np.dot(m_i, rhat))
    mj_r = float(np.dot(m_j, rhat))
    mi_mj = float(np.dot(m_i, m_j))
    pref = 3.0 * MU0_OVER_4PI / r**4
    return pref * (mj_r * m_i + mi_r * m_j + mi_mj * rhat - 5.0 * mi_r * mj_r * rhat)
