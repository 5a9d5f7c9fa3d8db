"""Exception types shared across the simulation stack."""


class MicroverseError(Exception):
    """Base class for all simulator errors."""


class SimulationDiverged(MicroverseError):
    """Physics state became non-finite; carries the offending body id."""

    def __init__(self, body_id: int, detail: str = ""):
        self.body_id = body_id
        super().__init__(f"simulation diverged at body {body_id}" + (f": {detail}" if detail else ""))


class UnsupportedShapePair(MicroverseError):
    """Collision between the given shape types is not implemented."""


class NotFound(MicroverseError, KeyError):
    """Unknown object/body/particle/agent id or name."""


class PlacementError(MicroverseError):
    """Sampled placement could not be satisfied."""


class UnsupportedPolicy(MicroverseError):
    """No scripted controller exists for the requested task."""


class SceneConfigError(MicroverseError):
    """Malformed or invalid scene configuration document."""


class ProtocolError(MicroverseError):
    """Malformed wire message."""


class FrameTooLarge(ProtocolError):
    """Declared frame length exceeds the protocol maximum."""


class StateError(MicroverseError):
    """Command issued in an invalid session state."""


class ReplayMismatch(MicroverseError):
    """Trajectory log does not match the provided configuration."""
