"""Time-stepped dipole-interaction simulation.

The engine owns a World, packs its state into flat arrays, and advances it
through the selected step kernel. Bond formation/breaking, anchor updates
and event emission happen here at Python level; the kernel only reports
flags and candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from .._kernels.reference import N_PARAMS, P_BOND_SLACK, P_CONTACT, P_CONTACT_TOL, \
    P_CUTOFF, P_DT, P_FORM_DIST, P_GAMMA, P_KBOND, P_MIN_SEP, P_MOM_MAG, P_STICTION, P_TIP
from ..coils import CoilCommand, CoilSystem, DEFAULT_SYSTEM
from ..constants import CONTACT_DIST
from ..errors import ScenarioError, SimulationDivergedError
from ..magnetics import DEFAULT_MAGNET
from .detect import detect_configuration
from .world import MTYPE_CODES, SimConfig, SimEvent, World

_MAX_FORM = 64


@dataclass(frozen=True)
class TrajectoryFrame:
    time: float
    pos: np.ndarray  # (N,2) m
    heading: np.ndarray  # (N,)
    orient: np.ndarray  # (N,) int
    bonds: tuple  # ((i,j), ...)

    def to_dict(self) -> dict:
        return {
            "t": self.time,
            "modules": [
                {
                    "id": k,
                    "x_mm": self.pos[k, 0] * 1e3,
                    "y_mm": self.pos[k, 1] * 1e3,
                    "heading": float(self.heading[k]),
                    "orient": int(self.orient[k]),
                }
                for k in range(self.pos.shape[0])
            ],
            "bonds": [list(b) for b in self.bonds],
        }


class Engine:
    """Steps a World under coil commands using the selected kernel backend."""

    def __init__(
        self,
        world: World,
        cfg: SimConfig | None = None,
        coils: CoilSystem | None = None,
        kernel=None,
    ):
        self.world = world
        self.cfg = cfg or SimConfig()
        self.coils = coils or DEFAULT_SYSTEM
        self.kernel = kernel or _kernels.step_kernel
        n = len(world.modules)
        self._pos = np.zeros((n, 2))
        self._heading = np.zeros(n)
        self._moment = np.zeros((n, 3))
        self._mtype = np.array(
            [MTYPE_CODES[m.mtype] for m in world.modules], dtype=np.int32
        )
        self._rel = np.zeros((n, n), dtype=np.uint8)
        self._couple = np.ones((n, n))
        self._forces = np.zeros((n, 2))
        self._radial = np.zeros((n, n))
        self._form_out = np.zeros((_MAX_FORM, 2), dtype=np.int32)
        self._params = np.zeros(N_PARAMS)
        p = self._params
        c = self.cfg
        p[P_MOM_MAG] = DEFAULT_MAGNET.moment_magnitude
        p[P_DT] = c.timestep
        p[P_GAMMA] = c.gamma
        p[P_STICTION] = c.stiction
        p[P_TIP] = c.tip_threshold
        p[P_CUTOFF] = c.cutoff
        p[P_CONTACT] = CONTACT_DIST
        p[P_CONTACT_TOL] = c.contact_tol
        p[P_BOND_SLACK] = c.bond_slack
        p[P_FORM_DIST] = c.bond_form_dist
        p[P_KBOND] = c.k_bond
        p[P_MIN_SEP] = c.min_separation
        self._bond_arrays_dirty = True
        self._bonds_arr = np.zeros((0, 2), dtype=np.int32)
        self._thresh_arr = np.zeros(0)
        self._hold_arr = np.zeros(0)
        self._break_out = np.zeros(0, dtype=np.uint8)

    # -- array sync ----------------------------------------------------------

    def _sync_in(self):
        for k, m in enumerate(self.world.modules):
            self._pos[k] = m.pos
            self._heading[k] = m.heading
            self._moment[k] = m.moment
        if self._bond_arrays_dirty:
            bonds = self.world.bond_list()
            self._bonds_arr = np.array(
                [[b.i, b.j] for b in bonds], dtype=np.int32
            ).reshape(len(bonds), 2)
            # one-ulp slack so pulses set through the current round trip
            # still count as ties at exactly the threshold
            self._thresh_arr = np.array([b.threshold * (1.0 - 1e-12) for b in bonds])
            self._hold_arr = np.array([b.hold for b in bonds])
            self._break_out = np.zeros(len(bonds), dtype=np.uint8)
            self._rel[:] = 0
            self._couple[:] = 1.0
            for b in bonds:
                self._rel[b.i, b.j] = self._rel[b.j, b.i] = 1
                # bonded magnets sit at their gap, not at the cube centers:
                # scale the 1/r^3 moment coupling by the cubed ratio
                scale = (3000.0 / b.gap_um) ** 3
                self._couple[b.i, b.j] = self._couple[b.j, b.i] = scale
            for i, j in self.world.suppressed:
                self._rel[i, j] = self._rel[j, i] = 2
            self._bond_arrays_dirty = False

    def _sync_out(self):
        for k, m in enumerate(self.world.modules):
            m.pos[:] = self._pos[k]
            m.moment[:] = self._moment[k]

    # -- stepping -------------------------------------------------------------

    def step(self, cmd: CoilCommand) -> list[SimEvent]:
        """Advance one timestep under the given coil command."""
        world = self.world
        bx, by, gx, gy, _ = self.coils.uniform_and_gradient(cmd)
        self._sync_in()
        n_formed, div_i, div_j = self.kernel(
            self._pos, self._heading, self._moment, self._mtype, self._rel,
            self._couple, self._bonds_arr, self._thresh_arr, self._hold_arr,
            bx, by, gx, gy, self._params,
            self.cfg.relax_iters, self.cfg.project_iters,
            self._forces, self._radial, self._break_out, self._form_out,
        )
        if div_i >= 0:
            raise SimulationDivergedError(
                f"non-finite or singular interaction between modules "
                f"{div_i} and {div_j} at t={world.time:.4f}s",
                pair=(div_i, div_j),
            )
        self._sync_out()
        world.time += self.cfg.timestep
        events = []

        # breaks first, in stored bond order
        bonds_now = self.world.bond_list()
        for k, flag in enumerate(self._break_out):
            if flag:
                b = bonds_now[k]
                world.remove_bond(b.i, b.j)
                axis = world.modules[b.i].pos - world.modules[b.j].pos
                norm = float(np.linalg.norm(axis))
                axis = axis / norm if norm > 0.0 else np.array([1.0, 0.0])
                world.suppressed[(b.i, b.j)] = axis
                events.append(SimEvent(world.time, "bond_broken", (b.i, b.j)))
                self._bond_arrays_dirty = True

        # clear suppression once the pair separated or swung off the old face
        for (i, j), old_axis in sorted(world.suppressed.items()):
            delta = world.modules[i].pos - world.modules[j].pos
            d = float(np.linalg.norm(delta))
            cleared = d > self.cfg.suppress_clear_dist
            if not cleared and d > 0.0:
                cosang = abs(float(np.dot(delta / d, old_axis)))
                cleared = cosang < math.cos(self.cfg.suppress_clear_angle)
            if cleared:
                del world.suppressed[(i, j)]
                self._bond_arrays_dirty = True

        # then formation candidates, in kernel (ascending-pair) order
        for k in range(n_formed):
            i, j = int(self._form_out[k, 0]), int(self._form_out[k, 1])
            if (i, j) in world.bonds or (i, j) in world.suppressed:
                continue
            # a bond cannot close under a field that would immediately break it
            gap_um = world.prospective_gap_um(i, j)
            axis = world.modules[i].pos - world.modules[j].pos
            dist = float(np.linalg.norm(axis))
            if dist > 0.0:
                axis = axis / dist
                dot = bx * axis[0] + by * axis[1]
                bperp = math.sqrt((bx - dot * axis[0]) ** 2 + (by - dot * axis[1]) ** 2)
                if bperp >= world._bond_from_gap(i, j, gap_um).threshold * (1.0 - 1e-12):
                    continue
            world.add_bond(i, j)
            events.append(SimEvent(world.time, "bond_formed", (i, j)))
            self._bond_arrays_dirty = True

        if not world._assembled and world.fully_connected():
            world._assembled = True
            events.append(
                SimEvent(world.time, "assembly_complete",
                         tuple(m.id for m in world.modules))
            )
        elif world._assembled and not world.fully_connected():
            world._assembled = False

        return events

    def snapshot(self) -> TrajectoryFrame:
        w = self.world
        return TrajectoryFrame(
            time=w.time,
            pos=np.array([m.pos for m in w.modules]),
            heading=np.array([m.heading for m in w.modules]),
            orient=np.array([m.orient for m in w.modules], dtype=int),
            bonds=tuple(sorted(w.bonds)),
        )

    def run_sequence(
        self,
        sequence: list[CoilCommand],
        duration: float | None = None,
        target_label: str | None = None,
        stop_on_target: bool = True,
    ) -> tuple[list[TrajectoryFrame], list[SimEvent]]:
        """Integrate `step` over a timed command list.

        Commands take effect at their timestamps (nondecreasing, relative to
        the current world time); the field holds between commands. Samples
        the trajectory every cfg.sample_dt and emits reconfiguration_complete
        when `target_label` is first detected.
        """
        times = [c.timestamp for c in sequence]
        if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
            raise ScenarioError("sequence timestamps must be nondecreasing")
        if duration is None:
            duration = (times[-1] if times else 0.0) + 2.0
        t0 = self.world.time
        dt = self.cfg.timestep
        n_steps = int(round(duration / dt))
        sample_every = max(1, int(round(self.cfg.sample_dt / dt)))
        active = CoilCommand()
        next_cmd = 0
        trajectory = [self.snapshot()]
        events: list[SimEvent] = []
        done = False
        for istep in range(n_steps):
            t_rel = self.world.time - t0
            while next_cmd < len(sequence) and times[next_cmd] <= t_rel + 0.5 * dt:
                active = sequence[next_cmd]
                next_cmd += 1
            events.extend(self.step(active))
            if (istep + 1) % sample_every == 0 or istep == n_steps - 1:
                trajectory.append(self.snapshot())
                if target_label is not None and not done:
                    if detect_configuration(self.world) == target_label:
                        events.append(
                            SimEvent(self.world.time, "reconfiguration_complete",
                                     tuple(m.id for m in self.world.modules))
                        )
                        done = True
                        if stop_on_target:
                            break
        return trajectory, events
