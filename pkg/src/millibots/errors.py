"""Exception types shared across the package."""


class MillibotError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(MillibotError):
    """Magnet or coil specification violates its invariants."""


class SingularityError(MillibotError):
    """Field or force requested at zero separation."""


class InvalidConfigurationError(MillibotError):
    """Unknown reconfiguration case or non-positive separation."""


class InfeasibleTargetError(MillibotError):
    """Requested field/gradient exceeds what the coils can produce."""

    def __init__(self, message: str, limiting_coil: str):
        super().__init__(message)
        self.limiting_coil = limiting_coil


class SimulationDivergedError(MillibotError):
    """Non-finite forces encountered (typically overlapping dipoles)."""

    def __init__(self, message: str, pair=None):
        super().__init__(message)
        self.pair = pair


class CannotWalkError(MillibotError):
    """Gait commanded on a bonded module."""


class InvalidDirectionError(MillibotError):
    """Direction is not one of the allowed compass directions."""


class NoFreeSpaceError(MillibotError):
    """Obstacle inflation swallowed the entire workspace."""


class InvalidEndpointError(MillibotError):
    """Plan start or goal lies in an occupied cell."""


class UnreachableGoalError(MillibotError):
    """No 8-connected path between start and goal."""


class ScenarioError(MillibotError):
    """Scenario file failed to parse or validate."""


class TraceFormatError(MillibotError):
    """Trace file is malformed or has an unsupported version."""
