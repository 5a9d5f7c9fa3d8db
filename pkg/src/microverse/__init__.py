"""Headless deterministic simulation of small household manipulation and
locomotion scenes: rigid/articulated bodies, particle cloth and soft bodies,
task environments, and a record/replay wire protocol."""

from .errors import (
    MicroverseError,
    NotFound,
    PlacementError,
    ProtocolError,
    ReplayMismatch,
    SceneConfigError,
    SimulationDiverged,
    StateError,
    UnsupportedShapePair,
)
from .rng import Rng

__version__ = "0.1.0"

__all__ = [
    "MicroverseError",
    "NotFound",
    "PlacementError",
    "ProtocolError",
    "ReplayMismatch",
    "Rng",
    "SceneConfigError",
    "SimulationDiverged",
    "StateError",
    "UnsupportedShapePair",
    "__version__",
]
