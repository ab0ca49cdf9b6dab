"""World state and simulation configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..constants import CONTACT_DIST, CONTACT_UM, SLACK_UM, WORKSPACE_HALF
from ..magnetics import DEFAULT_MAGNET, field_at_gap
from ..errors import ScenarioError

MTYPE_CODES = {"free": 0, "fixed": 1, "gripper": 2}


@dataclass
class ModuleState:
    """One cube module."""

    id: int
    mtype: str  # free | fixed | gripper
    pos: np.ndarray  # (2,) m
    heading: float = 0.0  # rad; fixed-module moment direction
    orient: int = 0  # down-face phase of the flip cycle, 0..3
    moment: np.ndarray = None  # (3,) A*m^2; defaults to resting +z
    anchor: int | None = None  # neighbor id the magnet has slid toward
    bonds: set = field(default_factory=set)

    def __post_init__(self):
        self.pos = np.asarray(self.pos, dtype=float).copy()
        if self.mtype not in MTYPE_CODES:
            raise ScenarioError(f"unknown module type {self.mtype!r}")
        if self.moment is None:
            mm = DEFAULT_MAGNET.moment_magnitude
            if self.mtype == "fixed":
                self.moment = np.array(
                    [mm * math.cos(self.heading), mm * math.sin(self.heading), 0.0]
                )
            else:
                self.moment = np.array([0.0, 0.0, mm])
        else:
            self.moment = np.asarray(self.moment, dtype=float).copy()


@dataclass
class Bond:
    """Bonded pair with its nominal magnet gap and break thresholds."""

    i: int
    j: int
    gap_um: int
    threshold: float  # uniform field that breaks it, T
    hold: float  # dipole grip force at the gap, N


@dataclass(frozen=True)
class SimEvent:
    time: float
    kind: str  # bond_formed | bond_broken | assembly_complete |
    #            reconfiguration_complete | stall | goal_reached
    participants: tuple = ()

    def to_dict(self) -> dict:
        return {"t": self.time, "kind": self.kind, "participants": list(self.participants)}


@dataclass(frozen=True)
class GaitParams:
    step_mean: float  # m per cycle along the commanded direction
    step_sigma: float
    lateral_sigma: float


def default_gaits() -> dict:
    # Fixed-module cycle statistics back out of the bench-characterized
    # 10-cycle totals under per-cycle independence; free-module numbers are
    # uncalibrated placeholders (heading scatter ~25 deg as lateral noise).
    free = GaitParams(0.9e-3, 0.5e-3, 0.9e-3 * math.tan(math.radians(25.0)))
    return {
        ("fixed", "H"): GaitParams(0.884e-3, 0.323e-3, 0.2e-3),
        ("fixed", "HM"): GaitParams(3.144e-3, 1.812e-3, 0.2e-3),
        ("free", "H"): free,
        ("free", "HM"): free,
        ("gripper", "H"): free,
        ("gripper", "HM"): free,
    }


@dataclass
class SimConfig:
    timestep: float = 1e-3  # s
    gamma: float = 0.05  # N*s/m drag
    stiction: float = 5e-5  # N; holds modules static below ~7 mm attraction
    tip_threshold: float = 1.5e-4  # T; below this magnets rest out-of-plane
    cutoff: float = 0.02  # m, dipole interaction range
    bond_form_dist: float = 1.05 * CONTACT_DIST
    bond_slack: float = 1e-4  # m
    contact_tol: float = 1e-5  # m
    k_bond: float = 10.0  # N/m
    min_separation: float = 1.5e-3  # m; closer pairs abort the run
    relax_iters: int = 4
    project_iters: int = 4
    suppress_clear_dist: float = 6e-3  # fully separated (disassembly path)
    suppress_clear_angle: float = math.radians(60.0)  # swung past the old face
    sample_dt: float = 0.02  # s, trajectory sampling
    gaits: dict = field(default_factory=default_gaits)
    stall_probability: float = 0.0
    stall_relief_per_amp: float = 10.0  # ramp current -> stall exponent gain
    seed: int = 0

    def __post_init__(self):
        if self.timestep <= 0.0:
            raise ScenarioError("timestep must be positive")
        if self.cutoff < self.bond_form_dist:
            raise ScenarioError("interaction cutoff must cover the bond-form distance")
        if not 0.0 <= self.stall_probability <= 1.0:
            raise ScenarioError("stall probability must be in [0, 1]")


class World:
    """Mutable collection of modules, bonds and suppressed pairs."""

    def __init__(self, modules: list[ModuleState], bonds: list[tuple] = ()):
        self.modules = sorted(modules, key=lambda m: m.id)
        ids = [m.id for m in self.modules]
        if ids != list(range(len(ids))):
            raise ScenarioError(f"module ids must be 0..n-1, got {ids}")
        for m in self.modules:
            if np.max(np.abs(m.pos)) > WORKSPACE_HALF:
                raise ScenarioError(f"module {m.id} is outside the workspace")
        self.bonds: dict[tuple, Bond] = {}
        # recently broken pairs -> bond axis at break time; while present the
        # pair neither couples moments nor re-forms (magnets rotated away)
        self.suppressed: dict[tuple, np.ndarray] = {}
        self.time = 0.0
        self._assembled = False
        for i, j in bonds:
            self.add_bond(i, j)

    # -- bond bookkeeping ---------------------------------------------------

    def module(self, mid: int) -> ModuleState:
        return self.modules[mid]

    def _gap_um(self, i: int, j: int) -> int:
        """Nominal magnet separation from the anchor (slide) state, micrometers."""
        total = CONTACT_UM
        for a, b in ((i, j), (j, i)):
            mod = self.modules[a]
            slack = SLACK_UM[mod.mtype]
            total -= slack if mod.anchor == b else -slack
        return total

    def prospective_gap_um(self, i: int, j: int) -> int:
        """Gap the bond (i, j) would get if formed now (anchors may be unset)."""
        total = CONTACT_UM
        for a, b in ((i, j), (j, i)):
            mod = self.modules[a]
            slack = SLACK_UM[mod.mtype]
            if mod.anchor == b or mod.anchor is None:
                total -= slack
            else:
                total += slack
        return total

    def _bond_from_gap(self, i: int, j: int, gap_um: int) -> Bond:
        mm = DEFAULT_MAGNET.moment_magnitude
        gap = gap_um * 1e-6
        hold = 2.0 * 3.0e-7 * mm * mm / gap**4  # head-to-tail grip at the gap
        return Bond(i=i, j=j, gap_um=gap_um, threshold=field_at_gap(gap_um), hold=hold)

    def add_bond(self, i: int, j: int):
        i, j = (i, j) if i < j else (j, i)
        if (i, j) in self.bonds:
            return
        for a, b in ((i, j), (j, i)):
            if self.modules[a].anchor is None:
                self.modules[a].anchor = b
        self.bonds[(i, j)] = self._bond_from_gap(i, j, self._gap_um(i, j))
        self.modules[i].bonds.add(j)
        self.modules[j].bonds.add(i)

    def remove_bond(self, i: int, j: int):
        i, j = (i, j) if i < j else (j, i)
        self.bonds.pop((i, j))
        self.modules[i].bonds.discard(j)
        self.modules[j].bonds.discard(i)
        for a, b in ((i, j), (j, i)):
            mod = self.modules[a]
            if mod.anchor == b:
                mod.anchor = min(mod.bonds) if mod.bonds else None
                # magnet slid to a new neighbor: its bond gaps change
                for other in mod.bonds:
                    key = (a, other) if a < other else (other, a)
                    self.bonds[key] = self._bond_from_gap(
                        key[0], key[1], self._gap_um(key[0], key[1])
                    )

    def bond_list(self) -> list[Bond]:
        return [self.bonds[k] for k in sorted(self.bonds)]

    def fully_connected(self) -> bool:
        n = len(self.modules)
        if n < 2 or not self.bonds:
            return False
        seen = {0}
        stack = [0]
        while stack:
            cur = stack.pop()
            for nb in sorted(self.modules[cur].bonds):
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == n

    def copy(self) -> "World":
        clone = World(
            [
                ModuleState(
                    id=m.id, mtype=m.mtype, pos=m.pos.copy(), heading=m.heading,
                    orient=m.orient, moment=m.moment.copy(), anchor=m.anchor,
                    bonds=set(m.bonds),
                )
                for m in self.modules
            ]
        )
        clone.bonds = {k: replace(b) for k, b in self.bonds.items()}
        clone.suppressed = {k: v.copy() for k, v in self.suppressed.items()}
        clone.time = self.time
        clone._assembled = self._assembled
        return clone
