"""Closed-loop FSM navigation.

Maps planned compass moves to coil commands through the orientation-aware
truth table, monitors progress after each commanded gait cycle, ramps the
field on stalls, and aborts after r_max failed retries on a waypoint.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .coils import CoilCommand
from .errors import InvalidDirectionError, MillibotError
from .planning import COMPASS, NavPlan
from .sim.gait import gait_cycle
from .sim.world import SimConfig, SimEvent, World

# Nominal currents for one gait cycle: ~1.5 mT uniform, ~0.05 T/m bias.
BASE_HELMHOLTZ_CURRENT = 0.834  # A
BASE_MAXWELL_CURRENT = 1.7  # A

_CARDINALS = ("E", "N", "W", "S")
_CARD_INDEX = {"E": 0, "N": 2, "W": 4, "S": 6}


def load_fsm_table() -> dict:
    """The versioned direction-to-coil data table shipped with the package."""
    with resources.files("millibots.data").joinpath("fsm_table.json").open() as fh:
        table = json.load(fh)
    if table.get("version") != 1:
        raise MillibotError(f"unsupported FSM table version {table.get('version')}")
    return table


FSM_TABLE = load_fsm_table()


class SaturationError(MillibotError):
    """Ramped currents exceeded the coil limit; triggers the abort path."""


@dataclass(frozen=True)
class MotionCommand:
    """One commanded gait cycle."""

    direction: int  # compass index
    kind: str  # helmholtz_pulse | helmholtz_maxwell
    coil_command: CoilCommand
    amplitude: float = 1.0
    ramp: float = 0.0  # A


@dataclass
class FsmState:
    waypoint_index: int = 0
    orientation: int = 0
    retries: int = 0
    ramp: float = 0.0  # A added so far at this waypoint
    phase: str = "idle"  # idle|pulsing|stepping|ramping|aborted|done
    last_direction: int | None = None


@dataclass
class NavParams:
    tolerance: float = 1.0e-3  # m, final goal
    waypoint_tolerance: float = 2.0e-3  # m, intermediate targets
    r_max: int = 5
    delta_i: float = 0.1  # A per retry
    lookahead: float = 3.0e-3  # m, target spacing along the plan
    amp_min: float = 0.08
    max_current: float = 10.0
    n_directions: int = 8
    # the goal check runs on noisy observations; insist on this much slack
    # so the true position still lands inside the tolerance disc
    obs_margin: float = 0.4e-3


@dataclass
class NavResult:
    reached: bool
    aborted: str | None = None  # stall | io | saturation
    abort_waypoint: int | None = None  # index into plan.waypoints
    cycles: int = 0
    retries: dict = field(default_factory=dict)  # plan waypoint index -> retries
    final_error: float = math.inf  # m, from the last observation
    trajectory: list = field(default_factory=list)  # observed positions
    events: list = field(default_factory=list)
    fsm: FsmState | None = None


def compute_direction(current, target, n_directions: int = 8, tolerance: float = 0.0):
    """Compass direction whose angle is nearest to the bearing, ties clockwise.

    Returns None (already-at-target signal) when within tolerance.
    """
    dx = target[0] - current[0]
    dy = target[1] - current[1]
    if math.hypot(dx, dy) <= tolerance:
        return None
    if n_directions not in (4, 8):
        raise InvalidDirectionError(f"n_directions must be 4 or 8, got {n_directions}")
    sector = 2.0 * math.pi / n_directions
    angle = math.atan2(dy, dx)
    idx = math.ceil(angle / sector - 0.5) % n_directions
    return idx * (8 // n_directions)


def _cardinal_components(direction: int) -> list[tuple[str, float]]:
    """Split a compass index into weighted cardinal components."""
    dx, dy = COMPASS[direction]
    weight = 1.0 / math.sqrt(2.0) if dx and dy else 1.0
    parts = []
    if dx:
        parts.append(("E" if dx > 0 else "W", weight))
    if dy:
        parts.append(("N" if dy > 0 else "S", weight))
    return parts


def realize_command(
    direction: int,
    kind: str,
    ramp: float = 0.0,
    orientation: int = 0,
    amplitude: float = 1.0,
    max_current: float = 10.0,
    timestamp: float = 0.0,
) -> MotionCommand:
    """Coil currents driving one gait cycle toward a compass direction.

    Helmholtz currents rock the flip axis with the polarity the down-face
    phase requires; Maxwell currents bias translation (zero for pulses).
    Ramp current is added to every active coil.
    """
    if direction not in range(8):
        raise InvalidDirectionError(f"invalid compass direction {direction!r}")
    if kind not in ("helmholtz_pulse", "helmholtz_maxwell"):
        raise InvalidDirectionError(f"unknown actuation kind {kind!r}")
    table = FSM_TABLE
    polarity = table["polarity"][orientation % 4]
    currents = {"Hx": 0.0, "Hy": 0.0, "Mx": 0.0, "My": 0.0}
    for card, weight in _cardinal_components(direction):
        h_axis = table["helmholtz_axis"][card]
        h_sign = table["helmholtz_sign"][card] * polarity
        currents[h_axis] += h_sign * (amplitude * BASE_HELMHOLTZ_CURRENT + ramp) * weight
        if kind == "helmholtz_maxwell":
            m_axis = table["maxwell_axis"][card]
            m_sign = table["maxwell_sign"][card]
            currents[m_axis] += m_sign * (amplitude * BASE_MAXWELL_CURRENT + ramp) * weight
    for name, value in currents.items():
        if abs(value) > max_current:
            raise SaturationError(
                f"{name} needs {value:.2f} A, exceeding the {max_current:g} A limit"
            )
    return MotionCommand(
        direction=direction,
        kind=kind,
        coil_command=CoilCommand(
            currents["Hx"], currents["Hy"], currents["Mx"], currents["My"],
            timestamp=timestamp,
        ),
        amplitude=amplitude,
        ramp=ramp,
    )


def decode_command(mc: MotionCommand, true_orientation: int) -> tuple[int, str, float, float]:
    """Plant-side inverse of `realize_command`.

    Returns (actual direction, mode, amplitude scale, ramp). A polarity
    mismatch between the commanded and the true down-face phase reverses
    the motion direction.
    """
    table = FSM_TABLE
    cc = mc.coil_command
    direction = mc.direction
    # recover the polarity encoded in the helmholtz currents
    card0, weight0 = _cardinal_components(mc.direction)[0]
    h_axis = table["helmholtz_axis"][card0]
    h_current = cc.i_hx if h_axis == "Hx" else cc.i_hy
    encoded = math.copysign(1.0, h_current) * table["helmholtz_sign"][card0]
    true_polarity = table["polarity"][true_orientation % 4]
    if encoded != true_polarity:
        direction = (direction + 4) % 8  # out-of-phase rocking walks backward
    mode = "HM" if (cc.i_mx or cc.i_my) else "H"
    active = max(abs(cc.i_hx), abs(cc.i_hy))
    if weight0 != 1.0:
        active = active / weight0
    scale = max(0.0, (active - mc.ramp) / BASE_HELMHOLTZ_CURRENT)
    return direction, mode, scale, mc.ramp


class SimPlant:
    """Simulated actuation+sensing interface: gait plant plus noisy camera."""

    def __init__(
        self,
        world: World,
        cfg: SimConfig,
        module_id: int = 0,
        obs_sigma: float = 0.2e-3,
        cycle_time: float = 0.5,
        seed: int | None = None,
    ):
        self.world = world
        self.cfg = cfg
        self.module = world.modules[module_id]
        self.obs_sigma = obs_sigma
        self.cycle_time = cycle_time
        self.rng = np.random.default_rng(cfg.seed if seed is None else seed)
        self.time = 0.0

    def observe(self) -> np.ndarray:
        noise = self.rng.normal(0.0, self.obs_sigma, 2) if self.obs_sigma > 0 else 0.0
        return self.module.pos + noise

    def true_position(self) -> np.ndarray:
        return self.module.pos.copy()

    def true_orientation(self) -> int:
        return self.module.orient

    def apply(self, mc: MotionCommand) -> list[SimEvent]:
        direction, mode, amplitude, ramp = decode_command(mc, self.module.orient)
        events = gait_cycle(
            self.module, direction, mode, self.cfg, self.rng,
            amplitude=amplitude, ramp=ramp,
        )
        self.time += self.cycle_time
        return [SimEvent(self.time, e.kind, e.participants) for e in events]


def select_targets(plan: NavPlan, params: NavParams) -> list[int]:
    """Waypoint indices to actually command: spaced by the lookahead along
    the path, always ending on the goal.

    One gait cycle covers several grid cells, so commanding every cell
    would fight the step granularity; the un-commanded cells stay within a
    chord of the followed path well inside the inflation margin.
    """
    if len(plan.waypoints) == 1:
        return [0]
    positions = plan.waypoint_positions()
    targets = []
    acc = 0.0
    for k in range(1, len(plan.waypoints)):
        p0 = positions[k - 1]
        p1 = positions[k]
        acc += math.hypot(p1[0] - p0[0], p1[1] - p0[1])
        if acc >= params.lookahead or k == len(plan.waypoints) - 1:
            targets.append(k)
            acc = 0.0
    goal = len(plan.waypoints) - 1
    if targets[-1] != goal:
        targets.append(goal)
    # stage the final approach: a near-goal target leaves the goal's full
    # retry budget for sub-tolerance trimming
    staging = 1.2e-3
    gx, gy = positions[goal]
    k = goal - 1
    while k > 0 and math.hypot(positions[k][0] - gx, positions[k][1] - gy) < staging:
        k -= 1
    if k > 0 and k not in targets:
        targets.insert(-1, k)
        targets.sort()
    return targets


def navigate(plan: NavPlan, plant, params: NavParams | None = None) -> NavResult:
    """Run the FSM navigation loop over a plan against a plant.

    Per waypoint: command a cycle toward it, check the observed distance,
    ramp the field and reapply on shortfall up to r_max, then either record
    the orientation update and move on or abort with the waypoint index.
    """
    params = params or NavParams()
    fsm = FsmState()
    result = NavResult(reached=False, fsm=fsm)
    targets = select_targets(plan, params)
    positions = plan.waypoint_positions()
    goal_idx = len(plan.waypoints) - 1
    first_step = True

    try:
        obs = np.asarray(plant.observe(), dtype=float)
    except IOError:
        result.aborted = "io"
        fsm.phase = "aborted"
        return result
    result.trajectory.append(obs.copy())

    # controller's model of the plant gait (mean, sigma); amplitudes aim
    # short of the target by two sigma so a fixed direction never overshoots
    gait_model = {"H": (0.884e-3, 0.323e-3), "HM": (3.144e-3, 1.812e-3)}

    for widx in targets:
        fsm.waypoint_index = widx
        target = np.asarray(positions[widx])
        if widx == goal_idx:
            tol = max(params.tolerance - params.obs_margin, params.tolerance / 2.0)
        else:
            tol = params.waypoint_tolerance
        fsm.retries = 0
        fsm.ramp = 0.0

        # already-at-target signal: no command needed for this waypoint
        u = compute_direction(obs, target, params.n_directions, tolerance=tol)
        if u is None:
            result.retries[widx] = 0
            continue

        def command_cycle(u, kind):
            nonlocal obs
            dist = float(np.linalg.norm(target - obs))
            mu, sigma = gait_model["H" if kind == "helmholtz_pulse" else "HM"]
            amplitude = min(1.0, max(params.amp_min, dist / (mu + sigma)))
            mc = realize_command(
                u, kind, ramp=fsm.ramp, orientation=fsm.orientation,
                amplitude=amplitude, max_current=params.max_current,
            )
            result.events.extend(plant.apply(mc))
            result.cycles += 1
            fsm.orientation = (fsm.orientation + 1) % 4
            obs = np.asarray(plant.observe(), dtype=float)
            result.trajectory.append(obs.copy())

        try:
            fsm.phase = "pulsing" if first_step else "stepping"
            command_cycle(u, "helmholtz_pulse" if first_step else "helmholtz_maxwell")
            first_step = False
            while (
                float(np.linalg.norm(target - obs)) > tol and fsm.retries < params.r_max
            ):
                fsm.phase = "ramping"
                fsm.ramp += params.delta_i
                fsm.retries += 1
                # reapply toward the waypoint from where the module now is
                fresh = compute_direction(obs, target, params.n_directions)
                if fresh is not None:
                    u = fresh
                command_cycle(u, "helmholtz_maxwell")
        except SaturationError:
            result.aborted = "saturation"
            result.abort_waypoint = widx
            fsm.phase = "aborted"
            return result
        except IOError:
            result.aborted = "io"
            result.abort_waypoint = widx
            fsm.phase = "aborted"
            return result

        result.retries[widx] = fsm.retries
        if float(np.linalg.norm(target - obs)) <= tol:
            fsm.last_direction = u  # UpdateOrientation: down-face phase + last move
            fsm.phase = "stepping"
        else:
            result.aborted = "stall"
            result.abort_waypoint = widx
            fsm.phase = "aborted"
            return result

    result.reached = True
    fsm.phase = "done"
    result.final_error = float(np.linalg.norm(np.asarray(positions[goal_idx]) - obs))
    result.events.append(SimEvent(getattr(plant, "time", 0.0), "goal_reached", ()))
    return result
