"""Two-axis Helmholtz/Maxwell electromagnet model.

Maps four coil currents to a uniform in-plane field plus a linear,
divergence-free gradient field:

    B(r) = [Bx, By, 0] + diag(Gx - Gy/2, -Gx/2 + Gy, -(Gx + Gy)/2) r

with Bx,y = k_H * I_H and Gx,y = k_M * I_M. Default calibration constants
come from ideal-coil formulas applied to the as-built geometry; a
calibration file can override any of them with bench-measured values.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .constants import MU0, WORKSPACE_HALF
from .errors import InfeasibleTargetError, InvalidSpecError

COIL_NAMES = ("Hx", "Hy", "Mx", "My")

# Helmholtz pair (spacing = radius): B = (4/5)^(3/2) mu0 n I / R at center.
HELMHOLTZ_FACTOR = (4.0 / 5.0) ** 1.5

# Maxwell pair (spacing = sqrt(3) R, opposing currents): axial gradient at
# center is 3 mu0 n I a R^2 / (R^2 + a^2)^(5/2) with a = sqrt(3) R / 2,
# which reduces to the constant below times mu0 n I / R^2.
MAXWELL_FACTOR = (3.0 * math.sqrt(3.0) / 2.0) / (7.0 / 4.0) ** 2.5


class WorkspaceBoundsWarning(UserWarning):
    """Field was queried outside the 35 x 35 mm workspace."""


@dataclass(frozen=True)
class CoilSpec:
    """One coil pair of the as-built two-axis system."""

    name: str
    diameter: float  # m
    spacing: float  # m
    turns: int  # per coil
    max_current: float = 10.0  # A

    def __post_init__(self):
        if self.name not in COIL_NAMES:
            raise InvalidSpecError(f"unknown coil name {self.name!r}")
        if self.diameter <= 0.0:
            raise InvalidSpecError(f"{self.name}: diameter must be positive")
        if self.turns < 0:
            raise InvalidSpecError(f"{self.name}: negative turn count")

    @property
    def radius(self) -> float:
        return self.diameter / 2.0


# Physical specifications of the four pairs (diameter, spacing, turns per coil).
DEFAULT_COILS = {
    "Hx": CoilSpec("Hx", 0.100, 0.050, 100),
    "Hy": CoilSpec("Hy", 0.176, 0.088, 176),
    "Mx": CoilSpec("Mx", 0.104, 0.090, 100),
    "My": CoilSpec("My", 0.152, 0.132, 152),
}


@dataclass(frozen=True)
class CoilCommand:
    """Currents for the four pairs at a point in time. The only actuation channel."""

    i_hx: float = 0.0  # A
    i_hy: float = 0.0
    i_mx: float = 0.0
    i_my: float = 0.0
    timestamp: float = 0.0  # s

    def currents(self) -> tuple[float, float, float, float]:
        return (self.i_hx, self.i_hy, self.i_mx, self.i_my)


@dataclass(frozen=True)
class FieldSample:
    """Eq.-style field evaluation at one query point."""

    uniform: np.ndarray  # (2,) [Bx, By] T
    gradient: np.ndarray  # (3,3) T/m, diagonal and traceless
    total: np.ndarray  # (3,) B at the query point, T
    saturated: bool = False  # any commanded current was clipped
    in_bounds: bool = True


def calibration_constants(specs: dict[str, CoilSpec] | None = None) -> dict[str, float]:
    """Analytic field/current constants per pair.

    Helmholtz pairs give T/A, Maxwell pairs (T/m)/A. Zero turns give zero.
    """
    specs = specs or DEFAULT_COILS
    out = {}
    for name in COIL_NAMES:
        spec = specs[name]
        if spec.radius <= 0.0:
            raise InvalidSpecError(f"{name}: zero radius")
        if name.startswith("H"):
            out[f"k_{name}"] = HELMHOLTZ_FACTOR * MU0 * spec.turns / spec.radius
        else:
            out[f"k_{name}"] = MAXWELL_FACTOR * MU0 * spec.turns / spec.radius**2
    return out


def load_calibration_file(path) -> dict[str, float]:
    """Parse a `k_<coil> = <value> <unit>` calibration override file.

    Units must be T/A for Helmholtz and T/m/A for Maxwell entries. Lines
    starting with '#' and blank lines are ignored.
    """
    overrides = {}
    expected_units = {"k_Hx": "T/A", "k_Hy": "T/A", "k_Mx": "T/m/A", "k_My": "T/m/A"}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            key, rhs = (part.strip() for part in line.split("=", 1))
            value_str, unit = rhs.split(None, 1)
            value = float(value_str)
        except ValueError as exc:
            raise InvalidSpecError(f"{path}:{lineno}: cannot parse {line!r}") from exc
        if key not in expected_units:
            raise InvalidSpecError(f"{path}:{lineno}: unknown constant {key!r}")
        if unit.strip() != expected_units[key]:
            raise InvalidSpecError(
                f"{path}:{lineno}: {key} must be in {expected_units[key]}, got {unit.strip()!r}"
            )
        overrides[key] = value
    return overrides


class CoilSystem:
    """Immutable current-to-field map for one two-axis coil setup."""

    def __init__(
        self,
        specs: dict[str, CoilSpec] | None = None,
        calibration: dict[str, float] | None = None,
        max_current: float = 10.0,
    ):
        self.specs = dict(specs or DEFAULT_COILS)
        if max_current != 10.0:
            self.specs = {
                n: replace(s, max_current=max_current) for n, s in self.specs.items()
            }
        constants = calibration_constants(self.specs)
        if calibration:
            constants.update(calibration)
        self.k_hx = constants["k_Hx"]
        self.k_hy = constants["k_Hy"]
        self.k_mx = constants["k_Mx"]
        self.k_my = constants["k_My"]
        self.max_current = max_current

    def clip(self, cmd: CoilCommand) -> tuple[CoilCommand, bool]:
        """Clamp currents to the per-coil limit; report whether any clipped."""
        limit = self.max_current
        clipped = [max(-limit, min(limit, i)) for i in cmd.currents()]
        saturated = any(c != i for c, i in zip(clipped, cmd.currents()))
        if saturated:
            cmd = CoilCommand(*clipped, timestamp=cmd.timestamp)
        return cmd, saturated

    def uniform_and_gradient(
        self, cmd: CoilCommand
    ) -> tuple[float, float, float, float, bool]:
        """(Bx, By, Gx, Gy, saturated) for a command, after clipping."""
        cmd, saturated = self.clip(cmd)
        bx = self.k_hx * cmd.i_hx
        by = self.k_hy * cmd.i_hy
        gx = self.k_mx * cmd.i_mx
        gy = self.k_my * cmd.i_my
        return bx, by, gx, gy, saturated

    def field_at(self, cmd: CoilCommand, r) -> FieldSample:
        """Evaluate the field model at position r (2- or 3-vector, meters).

        Out-of-workspace queries warn but still evaluate; over-limit
        currents are clipped and flagged.
        """
        r = np.asarray(r, dtype=float)
        r3 = np.zeros(3)
        r3[: r.shape[0]] = r
        in_bounds = abs(r3[0]) <= WORKSPACE_HALF and abs(r3[1]) <= WORKSPACE_HALF
        if not in_bounds:
            warnings.warn(
                f"field query at {r3[:2] * 1e3} mm is outside the 35x35 mm workspace",
                WorkspaceBoundsWarning,
                stacklevel=2,
            )
        bx, by, gx, gy, saturated = self.uniform_and_gradient(cmd)
        g = np.diag([gx - gy / 2.0, -gx / 2.0 + gy, -(gx + gy) / 2.0])
        total = np.array([bx, by, 0.0]) + g @ r3
        return FieldSample(
            uniform=np.array([bx, by]),
            gradient=g,
            total=total,
            saturated=saturated,
            in_bounds=in_bounds,
        )

    def currents_for(self, target_b, target_g=(0.0, 0.0), timestamp: float = 0.0) -> CoilCommand:
        """Invert the linear map: currents producing a uniform field and gradient.

        Raises InfeasibleTargetError naming the limiting coil if any channel
        would exceed the current limit.
        """
        bx, by = (float(v) for v in target_b)
        gx, gy = (float(v) for v in target_g)
        wanted = {
            "Hx": bx / self.k_hx,
            "Hy": by / self.k_hy,
            "Mx": gx / self.k_mx,
            "My": gy / self.k_my,
        }
        for name, current in wanted.items():
            if abs(current) > self.max_current:
                raise InfeasibleTargetError(
                    f"target needs {current:.2f} A on {name} "
                    f"(limit {self.max_current:g} A)",
                    limiting_coil=name,
                )
        return CoilCommand(
            wanted["Hx"], wanted["Hy"], wanted["Mx"], wanted["My"], timestamp=timestamp
        )

    def max_uniform_field(self) -> float:
        """Achievable |B| ceiling along one axis at the current limit, T."""
        return min(self.k_hx, self.k_hy) * self.max_current


DEFAULT_SYSTEM = CoilSystem()
