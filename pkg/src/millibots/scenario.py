"""Scenario file loading and validation.

Scenario files are JSON with human-scale units (millimeters, millitesla,
degrees, seconds); everything converts to SI at load. See docs/formats.md
for the schema. `builtin_scenario` generates the shipped setups
programmatically so the CLI and tests share one source of truth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coils import CoilSystem, load_calibration_file
from .constants import WORKSPACE_HALF
from .errors import ScenarioError
from .magnetics import DEFAULT_MAGNET, required_field
from .planning import DEFAULT_INFLATION, DEFAULT_RESOLUTION, maze_obstacles
from .sim.world import ModuleState, SimConfig, World

SCENARIO_VERSION = 1

_SIM_KEYS = {
    "timestep": "timestep",
    "gamma": "gamma",
    "stiction": "stiction",
    "tip_threshold": "tip_threshold",
    "stall_probability": "stall_probability",
    "seed": "seed",
    "sample_dt": "sample_dt",
}

_MOMENT_PRESETS = {
    "rest": (0.0, 0.0, 1.0),
    "x": (1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
}


@dataclass
class Scenario:
    """Parsed scenario: world factory plus run settings."""

    name: str
    modules: list[dict]
    bonds: list[tuple]
    sim: SimConfig
    obstacles: list = field(default_factory=list)  # polygons, meters
    field_sequence: list = field(default_factory=list)  # dicts, SI
    duration: float = 10.0
    target: str | None = None
    navigation: dict | None = None
    calibration: dict | None = None
    workspace_half: float = WORKSPACE_HALF

    def make_world(self) -> World:
        mods = []
        for spec in self.modules:
            mods.append(
                ModuleState(
                    id=spec["id"],
                    mtype=spec["type"],
                    pos=np.array([spec["x"], spec["y"]]),
                    heading=spec.get("heading", 0.0),
                    moment=spec.get("moment"),
                )
            )
        return World(mods, bonds=self.bonds)

    def make_coils(self) -> CoilSystem:
        return CoilSystem(calibration=self.calibration)

    def make_commands(self, coils: CoilSystem) -> list:
        cmds = []
        for entry in self.field_sequence:
            if "i_hx" in entry or "i_hy" in entry or "i_mx" in entry or "i_my" in entry:
                from .coils import CoilCommand

                cmds.append(
                    CoilCommand(
                        entry.get("i_hx", 0.0), entry.get("i_hy", 0.0),
                        entry.get("i_mx", 0.0), entry.get("i_my", 0.0),
                        timestamp=entry["t"],
                    )
                )
            else:
                cmds.append(
                    coils.currents_for(
                        (entry.get("bx", 0.0), entry.get("by", 0.0)),
                        (entry.get("gx", 0.0), entry.get("gy", 0.0)),
                        timestamp=entry["t"],
                    )
                )
        return cmds


def _parse_module(raw: dict, idx: int) -> dict:
    try:
        mid = int(raw.get("id", idx))
        mtype = raw["type"]
        x = float(raw["x_mm"]) * 1e-3
        y = float(raw["y_mm"]) * 1e-3
    except KeyError as exc:
        raise ScenarioError(f"module {idx}: missing field {exc}") from exc
    heading = math.radians(float(raw.get("heading_deg", 0.0)))
    moment = None
    m_raw = raw.get("moment")
    if m_raw is not None:
        if isinstance(m_raw, str):
            if m_raw not in _MOMENT_PRESETS:
                raise ScenarioError(
                    f"module {idx}: moment preset must be one of {sorted(_MOMENT_PRESETS)}"
                )
            direction = np.array(_MOMENT_PRESETS[m_raw])
        else:
            direction = np.asarray(m_raw, dtype=float)
            if direction.shape != (3,) or not np.linalg.norm(direction):
                raise ScenarioError(f"module {idx}: moment must be a 3-vector")
            direction = direction / np.linalg.norm(direction)
        moment = direction * DEFAULT_MAGNET.moment_magnitude
    return {"id": mid, "type": mtype, "x": x, "y": y, "heading": heading,
            "moment": moment}


def parse_scenario(data: dict, base_dir: Path | None = None, name: str = "") -> Scenario:
    if data.get("scenario_version") != SCENARIO_VERSION:
        raise ScenarioError(
            f"unsupported scenario_version {data.get('scenario_version')!r} "
            f"(expected {SCENARIO_VERSION})"
        )
    modules = [_parse_module(m, i) for i, m in enumerate(data.get("modules", []))]
    ids = sorted(m["id"] for m in modules)
    if ids != list(range(len(ids))):
        raise ScenarioError(f"module ids must be 0..n-1, got {ids}")

    bonds = [tuple(int(v) for v in b) for b in data.get("bonds", [])]
    for b in bonds:
        if len(b) != 2 or not all(0 <= v < len(modules) for v in b):
            raise ScenarioError(f"bad bond {b}")

    sim_kwargs = {}
    for key, attr in _SIM_KEYS.items():
        if key in data.get("sim", {}):
            sim_kwargs[attr] = data["sim"][key]
    if "timestep_ms" in data.get("sim", {}):
        sim_kwargs["timestep"] = data["sim"]["timestep_ms"] * 1e-3
    sim = SimConfig(**sim_kwargs)

    obstacles = [
        np.asarray(poly, dtype=float) * 1e-3 for poly in data.get("obstacles", [])
    ]

    sequence = []
    last_t = -math.inf
    for k, entry in enumerate(data.get("field_sequence", [])):
        t = float(entry.get("t", 0.0))
        if t < last_t:
            raise ScenarioError(f"field_sequence[{k}]: timestamps must be nondecreasing")
        last_t = t
        parsed = {"t": t}
        for mt_key, si_key, scale in (
            ("bx_mT", "bx", 1e-3), ("by_mT", "by", 1e-3),
            ("gx_T_per_m", "gx", 1.0), ("gy_T_per_m", "gy", 1.0),
            ("i_hx", "i_hx", 1.0), ("i_hy", "i_hy", 1.0),
            ("i_mx", "i_mx", 1.0), ("i_my", "i_my", 1.0),
        ):
            if mt_key in entry:
                parsed[si_key] = float(entry[mt_key]) * scale
        sequence.append(parsed)

    calibration = data.get("calibration")
    if "calibration_file" in data:
        path = Path(data["calibration_file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        calibration = load_calibration_file(path)

    navigation = None
    if "navigation" in data:
        nav = data["navigation"]
        try:
            goal = (nav["goal_mm"][0] * 1e-3, nav["goal_mm"][1] * 1e-3)
        except (KeyError, IndexError, TypeError) as exc:
            raise ScenarioError("navigation.goal_mm must be [x, y]") from exc
        navigation = {
            "goal": goal,
            "tolerance": nav.get("tolerance_mm", 1.0) * 1e-3,
            "r_max": int(nav.get("r_max", 5)),
            "delta_i": float(nav.get("delta_i_A", 0.1)),
            "obs_sigma": nav.get("obs_sigma_mm", 0.2) * 1e-3,
            "resolution": nav.get("resolution_mm", DEFAULT_RESOLUTION * 1e3) * 1e-3,
            "inflation": nav.get("inflation_mm", DEFAULT_INFLATION * 1e3) * 1e-3,
        }

    scenario = Scenario(
        name=data.get("name", name),
        modules=modules,
        bonds=bonds,
        sim=sim,
        obstacles=obstacles,
        field_sequence=sequence,
        duration=float(data.get("duration_s", 10.0)),
        target=data.get("target"),
        navigation=navigation,
        calibration=calibration,
    )
    scenario.make_world()  # validate module placement and bonds now
    return scenario


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return parse_scenario(data, base_dir=path.parent, name=path.stem)


def builtin_scenario(name: str) -> dict:
    """Shipped scenario dicts, also written to scenarios/ as JSON."""
    mt = 1e3  # T -> mT for file units
    if name == "assembly":
        return {
            "scenario_version": 1,
            "name": "assembly",
            "modules": [
                {"id": 0, "type": "free", "x_mm": -2.5, "y_mm": 0.0},
                {"id": 1, "type": "free", "x_mm": 2.5, "y_mm": 0.0},
            ],
            "field_sequence": [{"t": 0.0, "bx_mT": 1.5, "by_mT": 0.0}],
            "duration_s": 120.0,
            "target": "chain(2)",
        }
    if name == "gripper":
        return {
            "scenario_version": 1,
            "name": "gripper",
            "modules": [
                {"id": 0, "type": "gripper", "x_mm": -3.0, "y_mm": 0.0, "moment": "x"},
                {"id": 1, "type": "free", "x_mm": 0.0, "y_mm": 0.0, "moment": "x"},
                {"id": 2, "type": "gripper", "x_mm": 3.0, "y_mm": 0.0, "moment": "x"},
            ],
            "bonds": [[0, 1], [1, 2]],
            "field_sequence": [
                {"t": 0.0, "by_mT": 2.0},
                {"t": 0.2, "bx_mT": -1.5},
            ],
            "duration_s": 8.2,
            "target": "gripper",
        }
    if name == "square":
        return {
            "scenario_version": 1,
            "name": "square",
            "modules": [
                {"id": 0, "type": "free", "x_mm": -1.5, "y_mm": -3.8, "moment": "x"},
                {"id": 1, "type": "free", "x_mm": 1.5, "y_mm": -3.8, "moment": "x"},
                {"id": 2, "type": "free", "x_mm": -1.5, "y_mm": 3.8,
                 "moment": [-1.0, 0.0, 0.0]},
                {"id": 3, "type": "free", "x_mm": 1.5, "y_mm": 3.8,
                 "moment": [-1.0, 0.0, 0.0]},
            ],
            "bonds": [[0, 1], [2, 3]],
            "field_sequence": [{"t": 0.0, "by_mT": 1.914}],
            "duration_s": 30.0,
            "target": "square",
        }
    if name == "disassembly":
        return {
            "scenario_version": 1,
            "name": "disassembly",
            "modules": [
                {"id": 0, "type": "free", "x_mm": -1.5, "y_mm": 0.0, "moment": "x"},
                {"id": 1, "type": "free", "x_mm": 1.5, "y_mm": 0.0, "moment": "x"},
            ],
            "bonds": [[0, 1]],
            "field_sequence": [
                {"t": 0.0, "by_mT": required_field("disassembly") * mt},
                {"t": 0.5, "by_mT": 0.0},
            ],
            "duration_s": 2.5,
            "target": "liquid",
        }
    if name == "maze":
        obstacles = [(poly * 1e3).tolist() for poly in maze_obstacles()]
        return {
            "scenario_version": 1,
            "name": "maze",
            "modules": [{"id": 0, "type": "fixed", "x_mm": -13.0, "y_mm": -13.0}],
            "obstacles": obstacles,
            "duration_s": 120.0,
            "navigation": {
                "goal_mm": [-13.0, 13.0],
                "tolerance_mm": 1.0,
                "r_max": 8,
                "delta_i_A": 0.1,
                "obs_sigma_mm": 0.2,
            },
            "sim": {"stall_probability": 0.2},
        }
    raise ScenarioError(f"unknown builtin scenario {name!r}")


BUILTIN_SCENARIOS = ("assembly", "gripper", "square", "disassembly", "maze")
