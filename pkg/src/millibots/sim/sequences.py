"""Canned worlds and field sequences for the reconfiguration maneuvers.

The exact bench field schedules are not on record; these are plausible
reconstructions parameterized so experiments can sweep them. All
sequences drive uniform fields only (reconfiguration needs no gradients).
"""

from __future__ import annotations

import numpy as np

from ..coils import CoilCommand, CoilSystem, DEFAULT_SYSTEM
from ..constants import CONTACT_DIST
from ..magnetics import required_field
from .world import ModuleState, World


def field_command(
    coils: CoilSystem, bx: float, by: float, gx: float = 0.0, gy: float = 0.0,
    t: float = 0.0,
) -> CoilCommand:
    """Currents realizing a uniform field (T) and gradient (T/m) at time t."""
    return coils.currents_for((bx, by), (gx, gy), timestamp=t)


def single_module_world(mtype: str = "fixed", pos=(0.0, 0.0)) -> World:
    return World([ModuleState(id=0, mtype=mtype, pos=np.asarray(pos, dtype=float))])


def pair_world(separation: float, mtype: str = "free", moments: str = "rest") -> World:
    """Two modules on the x axis, `separation` apart (center to center)."""
    half = separation / 2.0
    mm = None
    if moments == "axis":
        from ..magnetics import DEFAULT_MAGNET

        mm = np.array([DEFAULT_MAGNET.moment_magnitude, 0.0, 0.0])
    mods = [
        ModuleState(id=0, mtype=mtype, pos=(-half, 0.0),
                    moment=None if mm is None else mm.copy()),
        ModuleState(id=1, mtype=mtype, pos=(half, 0.0),
                    moment=None if mm is None else mm.copy()),
    ]
    return World(mods)


def bonded_pair_world(mtype: str = "free") -> World:
    """Face-bonded two-module chain along x (the disassembly fixture)."""
    from ..magnetics import DEFAULT_MAGNET

    mm = np.array([DEFAULT_MAGNET.moment_magnitude, 0.0, 0.0])
    mods = [
        ModuleState(id=0, mtype=mtype, pos=(-CONTACT_DIST / 2.0, 0.0), moment=mm.copy()),
        ModuleState(id=1, mtype=mtype, pos=(CONTACT_DIST / 2.0, 0.0), moment=mm.copy()),
    ]
    return World(mods, bonds=[(0, 1)])


def gripper_chain_world() -> World:
    """Gripper-free-gripper chain along x, bonded in assembly order.

    The free magnet is anchored to the first gripper, so the weakest bond
    (free to second gripper) sits at the 3.2 mm magnet gap.
    """
    from ..magnetics import DEFAULT_MAGNET

    mm = np.array([DEFAULT_MAGNET.moment_magnitude, 0.0, 0.0])
    d = CONTACT_DIST
    mods = [
        ModuleState(id=0, mtype="gripper", pos=(-d, 0.0), moment=mm.copy()),
        ModuleState(id=1, mtype="free", pos=(0.0, 0.0), moment=mm.copy()),
        ModuleState(id=2, mtype="gripper", pos=(d, 0.0), moment=mm.copy()),
    ]
    return World(mods, bonds=[(0, 1), (1, 2)])


def two_chain_world(chain_gap: float = 7.6e-3) -> World:
    """Two bonded 2-chains along x, stacked `chain_gap` apart in y.

    The chains carry opposite polarity: anti-parallel side-by-side dipoles
    attract, which is what merges the stack into a 4-cycle.
    """
    from ..magnetics import DEFAULT_MAGNET

    mm = np.array([DEFAULT_MAGNET.moment_magnitude, 0.0, 0.0])
    half = CONTACT_DIST / 2.0
    y = chain_gap / 2.0
    mods = [
        ModuleState(id=0, mtype="free", pos=(-half, -y), moment=mm.copy()),
        ModuleState(id=1, mtype="free", pos=(half, -y), moment=mm.copy()),
        ModuleState(id=2, mtype="free", pos=(-half, y), moment=-mm.copy()),
        ModuleState(id=3, mtype="free", pos=(half, y), moment=-mm.copy()),
    ]
    return World(mods, bonds=[(0, 1), (2, 3)])


def assembly_sequence(
    coils: CoilSystem = DEFAULT_SYSTEM,
    assist_field: float = 1.5e-3,
    duration: float = 120.0,
):
    """Steady in-plane assist field along x; assembles aligned free modules."""
    cmds = []
    if assist_field > 0.0:
        cmds.append(field_command(coils, assist_field, 0.0, t=0.0))
    return cmds, duration, "chain(2)"


def chain_to_gripper_sequence(
    coils: CoilSystem = DEFAULT_SYSTEM,
    pulse: float = 2.0e-3,
    pulse_s: float = 0.2,
    steer_field: float = 1.5e-3,
    settle_s: float = 8.0,
):
    """Perpendicular pulse breaks the weak bond; an anti-parallel hold docks
    the freed module on the chain flank.

    With the freed moment forced against the chain axis, the pair's
    tangential force climbs it monotonically to the perpendicular dock,
    where anti-parallel side-by-side attraction re-bonds it; the steer
    magnitude stays just under the re-form threshold of the old axis.
    """
    cmds = [
        field_command(coils, 0.0, pulse, t=0.0),
        field_command(coils, -steer_field, 0.0, t=pulse_s),
    ]
    return cmds, pulse_s + settle_s, "gripper"


def chain_to_square_sequence(
    coils: CoilSystem = DEFAULT_SYSTEM,
    field: float = 1.914e-3,
    settle_s: float = 10.0,
):
    """Transverse assist field while two anti-polarized 2-chains stack.

    The anti-parallel side attraction does the merging; the field only
    stabilizes alignment against pose scatter.
    """
    cmds = [field_command(coils, 0.0, field, t=0.0)]
    return cmds, settle_s, "square"


def disassembly_sequence(
    coils: CoilSystem = DEFAULT_SYSTEM,
    pulse: float | None = None,
    pulse_s: float = 0.5,
    settle_s: float = 2.0,
):
    """Strong perpendicular pulse breaks every bond and scatters the modules."""
    if pulse is None:
        pulse = required_field("disassembly")
    cmds = [
        field_command(coils, 0.0, pulse, t=0.0),
        field_command(coils, 0.0, 0.0, t=pulse_s),
    ]
    return cmds, pulse_s + settle_s, "liquid"
