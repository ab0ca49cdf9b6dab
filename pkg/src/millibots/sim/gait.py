"""Cycle-level locomotion model.

Locomotion is a parameterized gait abstraction: each commanded cycle
displaces the module by a Gaussian step along the commanded compass
direction plus lateral scatter, calibrated to the bench 10-cycle
displacement statistics. Stall injection models local resistance; ramped
coil current relieves it exponentially.
"""

from __future__ import annotations

import numpy as np

from ..errors import CannotWalkError, InvalidDirectionError
from ..planning import COMPASS
from .world import ModuleState, SimConfig, SimEvent

MODES = ("H", "HM")

# Walking current that produces the calibrated gait statistics (1.5 mT
# through the Helmholtz constant); ramp current scales steps relative to it.
_NOMINAL_CURRENT = 0.834  # A

_UNIT = [np.array(v, dtype=float) / np.linalg.norm(v) for v in COMPASS]


def allowed_directions(mtype: str) -> tuple:
    """Fixed modules walk all 8 compass directions, free modules the 4 cardinals."""
    if mtype == "fixed":
        return tuple(range(8))
    return (0, 2, 4, 6)


def gait_cycle(
    module: ModuleState,
    direction: int,
    mode: str,
    cfg: SimConfig,
    rng: np.random.Generator,
    amplitude: float = 1.0,
    ramp: float = 0.0,
) -> list[SimEvent]:
    """Execute one gait cycle toward a compass direction, mutating the module.

    `amplitude` scales the commanded currents (and with them the step
    statistics); `ramp` is extra current in amperes from stall recovery,
    which both lengthens the step and suppresses further stalls.
    """
    if module.bonds:
        raise CannotWalkError(f"module {module.id} is bonded and cannot walk")
    if mode not in MODES:
        raise InvalidDirectionError(f"unknown actuation mode {mode!r}")
    if direction not in allowed_directions(module.mtype):
        raise InvalidDirectionError(
            f"direction {direction} not allowed for a {module.mtype} module"
        )
    params = cfg.gaits[(module.mtype, mode)]

    # The flip completes even when translation stalls, so the orientation
    # phase advances on every commanded cycle.
    module.orient = (module.orient + 1) % 4

    p_stall = cfg.stall_probability
    if p_stall > 0.0:
        p_eff = p_stall ** (1.0 + cfg.stall_relief_per_amp * max(0.0, ramp))
        if rng.random() < p_eff:
            return [SimEvent(0.0, "stall", (module.id,))]

    # step length follows the commanded amplitude; ramp current only defeats
    # resistance (the flip geometry, not the field, sets the stride)
    scale = amplitude
    step = rng.normal(params.step_mean * scale, params.step_sigma * scale)
    lateral = rng.normal(0.0, params.lateral_sigma * scale)
    u = _UNIT[direction]
    perp = np.array([-u[1], u[0]])
    module.pos += step * u + lateral * perp
    return []
