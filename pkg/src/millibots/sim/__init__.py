from .detect import detect_configuration
from .engine import Engine, TrajectoryFrame
from .gait import allowed_directions, gait_cycle
from .world import Bond, GaitParams, ModuleState, SimConfig, SimEvent, World

__all__ = [
    "Bond",
    "Engine",
    "GaitParams",
    "ModuleState",
    "SimConfig",
    "SimEvent",
    "TrajectoryFrame",
    "World",
    "allowed_directions",
    "detect_configuration",
    "gait_cycle",
]
