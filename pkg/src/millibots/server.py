"""Streaming wire-protocol server for the operator console.

One simulation loop broadcasts JSON state updates over WebSocket text
frames at the broadcast rate; client commands are validated in the
connection handler (every command gets exactly one ack or error carrying
its sequence number) and applied atomically between simulation steps.
A field-ownership token serializes command access: the first client to
send a command holds it until disconnect, mirroring the physical
constraint that one global field drives every module.

Message types: state_update, event, ack, error (server to client);
set_field, set_goal, start_sequence, pause, resume, reset (client to
server). See docs/formats.md for payloads.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import threading

import numpy as np
import websockets

from . import _kernels
from .control import NavParams, SimPlant, navigate
from .errors import InfeasibleTargetError, InvalidEndpointError, MillibotError, \
    UnreachableGoalError
from .planning import DEFAULT_INFLATION, DEFAULT_RESOLUTION, build_grid, plan
from .coils import CoilCommand
from .sim import Engine, SimEvent, detect_configuration
from .sim import sequences as seqs

BROADCAST_HZ = 20.0

_SEQUENCES = {
    "assemble_chain": seqs.assembly_sequence,
    "chain_to_gripper": seqs.chain_to_gripper_sequence,
    "chain_to_square": seqs.chain_to_square_sequence,
    "disassemble": seqs.disassembly_sequence,
}


class SimServer:
    def __init__(self, scenario, speedup: float = 1.0):
        self.scenario = scenario
        self.speedup = speedup
        self.world = scenario.make_world()
        self.coils = scenario.make_coils()
        self.obstacles_mm = [
            (np.asarray(poly) * 1e3).tolist() for poly in scenario.obstacles
        ]
        self.engine = Engine(self.world, scenario.sim, self.coils)
        self.schedule = scenario.make_commands(self.coils)
        self.schedule_t0 = 0.0
        self.current = CoilCommand()
        self.paused = False
        self.seq = 0
        self.owner = None
        self.clients: dict = {}  # websocket -> asyncio.Queue
        self.pending: list = []
        self.nav_thread: threading.Thread | None = None
        self.nav_state: dict = {"active": False}
        self.plan_cells: list = []
        self._stop = asyncio.Event()

    # -- protocol helpers ------------------------------------------------------

    def _enqueue_all(self, message: dict) -> None:
        data = json.dumps(message, sort_keys=True)
        for queue in self.clients.values():
            queue.put_nowait(data)

    def broadcast_event(self, event) -> None:
        self.seq += 1
        self._enqueue_all({"type": "event", "seq": self.seq, **event.to_dict()})

    def state_update(self) -> dict:
        self.seq += 1
        bx, by, gx, gy, _ = self.coils.uniform_and_gradient(self.current)
        return {
            "type": "state_update",
            "seq": self.seq,
            "time": self.world.time,
            "paused": self.paused,
            "modules": [
                {
                    "id": m.id,
                    "type": m.mtype,
                    "x_mm": m.pos[0] * 1e3,
                    "y_mm": m.pos[1] * 1e3,
                    "heading": m.heading,
                    "orient": m.orient,
                    "bonds": sorted(m.bonds),
                }
                for m in self.world.modules
            ],
            "currents": {
                "i_hx": self.current.i_hx, "i_hy": self.current.i_hy,
                "i_mx": self.current.i_mx, "i_my": self.current.i_my,
            },
            "field_mT": [bx * 1e3, by * 1e3],
            "gradients_T_per_m": [gx, gy],
            "label": detect_configuration(self.world),
            "obstacles_mm": self.obstacles_mm,
            "plan_cells": self.plan_cells,
            "nav": dict(self.nav_state),
            "owner_connected": self.owner is not None,
            "backend": _kernels.BACKEND,
        }

    # -- command handling --------------------------------------------------------

    def handle_command(self, ws, msg: dict) -> dict:
        """Validate a client command; returns the ack/error reply."""
        seq = msg.get("seq")
        mtype = msg.get("type")
        if self.owner not in (None, ws):
            return {"type": "error", "seq": seq, "message": "field busy"}
        if mtype == "set_field":
            if self.nav_state.get("active"):
                return {"type": "error", "seq": seq,
                        "message": "field busy (navigation active)"}
            try:
                cmd = self._parse_field(msg)
            except (InfeasibleTargetError, ValueError, KeyError) as exc:
                return {"type": "error", "seq": seq, "message": str(exc)}
            self.owner = ws
            self.pending.append(("field", cmd))
        elif mtype == "set_goal":
            try:
                goal = (float(msg["x_mm"]) * 1e-3, float(msg["y_mm"]) * 1e-3)
            except (KeyError, TypeError, ValueError):
                return {"type": "error", "seq": seq, "message": "set_goal needs x_mm, y_mm"}
            try:
                nav_plan = self._plan_to(goal)
            except (InvalidEndpointError, UnreachableGoalError) as exc:
                return {"type": "error", "seq": seq, "message": str(exc)}
            self.owner = ws
            self.pending.append(("goal", nav_plan))
        elif mtype == "start_sequence":
            name = msg.get("name")
            if name not in _SEQUENCES:
                return {"type": "error", "seq": seq,
                        "message": f"unknown sequence {name!r}"}
            self.owner = ws
            self.pending.append(("sequence", name))
        elif mtype == "pause":
            self.owner = ws
            self.pending.append(("pause", None))
        elif mtype == "resume":
            self.owner = ws
            self.pending.append(("resume", None))
        elif mtype == "reset":
            self.owner = ws
            self.pending.append(("reset", None))
        else:
            return {"type": "error", "seq": seq, "message": f"unknown type {mtype!r}"}
        return {"type": "ack", "seq": seq}

    def _parse_field(self, msg: dict) -> CoilCommand:
        if "currents" in msg:
            c = msg["currents"]
            return CoilCommand(
                float(c.get("i_hx", 0.0)), float(c.get("i_hy", 0.0)),
                float(c.get("i_mx", 0.0)), float(c.get("i_my", 0.0)),
            )
        t = msg.get("target", {})
        return self.coils.currents_for(
            (float(t.get("bx_mT", 0.0)) * 1e-3, float(t.get("by_mT", 0.0)) * 1e-3),
            (float(t.get("gx_T_per_m", 0.0)), float(t.get("gy_T_per_m", 0.0))),
        )

    def _plan_to(self, goal):
        nav = self.scenario.navigation or {}
        grid = build_grid(
            self.scenario.obstacles,
            resolution=nav.get("resolution", DEFAULT_RESOLUTION),
            inflation=nav.get("inflation", DEFAULT_INFLATION),
        )
        module = self.world.modules[0]
        return plan(grid, grid.cell_of(module.pos), grid.cell_of(goal))

    def _apply_pending(self, loop) -> None:
        for kind, payload in self.pending:
            if kind == "field":
                self.current = payload
                self.schedule = []
            elif kind == "pause":
                self.paused = True
            elif kind == "resume":
                self.paused = False
            elif kind == "reset":
                t_now = self.world.time  # state_update time stays monotonic
                self.world = self.scenario.make_world()
                self.world.time = t_now
                self.engine = Engine(self.world, self.scenario.sim, self.coils)
                self.current = CoilCommand()
                self.schedule = list(self.scenario.make_commands(self.coils))
                self.schedule_t0 = t_now
                self.plan_cells = []
                self.nav_state = {"active": False}
            elif kind == "sequence":
                cmds, duration, target = _SEQUENCES[payload](self.coils)
                self.schedule = list(cmds)
                self.schedule_t0 = self.world.time
                self.nav_state = {"active": False}
            elif kind == "goal":
                self._start_navigation(payload, loop)
        self.pending.clear()

    # -- navigation session ----------------------------------------------------------

    def _start_navigation(self, nav_plan, loop) -> None:
        if self.nav_thread is not None and self.nav_thread.is_alive():
            return
        self.plan_cells = [list(c) for c in nav_plan.waypoints]
        nav_cfg = self.scenario.navigation or {}
        self.nav_state = {"active": True, "reached": None}
        server = self

        class PacedPlant(SimPlant):
            def apply(self, mc):
                events = super().apply(mc)
                for e in events:
                    loop.call_soon_threadsafe(server.broadcast_event, e)
                # pace cycles so viewers watch progress at the sim rate
                import time as _time

                _time.sleep(self.cycle_time / max(server.speedup, 1e-6) * 0.1)
                return events

        plant = PacedPlant(self.world, self.scenario.sim,
                           obs_sigma=nav_cfg.get("obs_sigma", 0.2e-3))
        params = NavParams(
            tolerance=nav_cfg.get("tolerance", 1.0e-3),
            r_max=nav_cfg.get("r_max", 5),
            delta_i=nav_cfg.get("delta_i", 0.1),
        )

        def run():
            result = navigate(nav_plan, plant, params)
            def finish():
                server.nav_state = {
                    "active": False,
                    "reached": result.reached,
                    "aborted": result.aborted,
                    "cycles": result.cycles,
                }
                for e in result.events:
                    server.broadcast_event(e)
            loop.call_soon_threadsafe(finish)

        self.nav_thread = threading.Thread(target=run, daemon=True)
        self.nav_thread.start()

    # -- main loop ------------------------------------------------------------------

    async def sim_loop(self) -> None:
        loop = asyncio.get_running_loop()
        tick = 1.0 / BROADCAST_HZ
        dt = self.scenario.sim.timestep
        while not self._stop.is_set():
            self._apply_pending(loop)
            nav_active = self.nav_state.get("active", False)
            if not self.paused and not nav_active:
                t_rel = self.world.time - self.schedule_t0
                for cmd in self.schedule:
                    if cmd.timestamp <= t_rel:
                        self.current = cmd
                steps = max(1, int(round(tick * self.speedup / dt)))
                for _ in range(steps):
                    try:
                        for event in self.engine.step(self.current):
                            self.broadcast_event(event)
                    except MillibotError as exc:
                        self.broadcast_event(
                            SimEvent(self.world.time, "error", (str(exc),))
                        )
                        self.paused = True
                        break
            self._enqueue_all(self.state_update())
            await asyncio.sleep(tick)

    async def handler(self, ws) -> None:
        queue: asyncio.Queue = asyncio.Queue(maxsize=256)
        self.clients[ws] = queue

        async def sender():
            while True:
                data = await queue.get()
                await ws.send(data)

        send_task = asyncio.create_task(sender())
        try:
            async for raw in ws:
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError as exc:
                    reply = {"type": "error", "seq": None, "message": f"bad json: {exc.msg}"}
                else:
                    reply = self.handle_command(ws, msg)
                await ws.send(json.dumps(reply, sort_keys=True))
        except websockets.ConnectionClosed:
            pass
        finally:
            send_task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await send_task
            del self.clients[ws]
            if self.owner is ws:
                self.owner = None

    def stop(self) -> None:
        self._stop.set()


async def serve(scenario, host: str = "127.0.0.1", port: int = 8765,
                speedup: float = 1.0, ready_event=None) -> None:
    """Run the server until cancelled."""
    server = SimServer(scenario, speedup=speedup)
    async with websockets.serve(server.handler, host, port):
        print(f"millibots server on ws://{host}:{port} "
              f"(scenario {scenario.name!r}, x{speedup:g})")
        if ready_event is not None:
            ready_event.set()
        await server.sim_loop()
