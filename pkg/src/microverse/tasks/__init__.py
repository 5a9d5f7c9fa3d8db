"""The five benchmark environments, addressable by task id."""
from __future__ import annotations

from ..errors import NotFound
from .base import (
    ACTION_DT,
    PHYSICS_DT,
    SUBSTEPS,
    Env,
    EpisodeState,
    GoalObservation,
    env_reset,
    env_step,
)
from .locomotion import StairChasingEnv
from .manipulation import ClothFoldingEnv, FruitPickingEnv, SpongeWipingEnv
from .rooms import N_AGENTS, RoomCleaningEnv

ENV_TYPES = {
    env_type.task_id: env_type
    for env_type in (FruitPickingEnv, ClothFoldingEnv, SpongeWipingEnv,
                     StairChasingEnv, RoomCleaningEnv)
}

TASK_IDS = tuple(ENV_TYPES)  # closed set; make_env rejects anything else


def make_env(task_id: str, config: dict | None = None) -> Env:
    """Build a fresh environment for one of the five benchmark tasks."""
    try:
        env_type = ENV_TYPES[task_id]
    except KeyError:
        raise NotFound(
            f"unknown task {task_id!r}; expected one of {list(TASK_IDS)}"
        ) from None
    return env_type(config)


__all__ = [
    "ACTION_DT",
    "ENV_TYPES",
    "Env",
    "EpisodeState",
    "GoalObservation",
    "N_AGENTS",
    "PHYSICS_DT",
    "SUBSTEPS",
    "TASK_IDS",
    "ClothFoldingEnv",
    "FruitPickingEnv",
    "RoomCleaningEnv",
    "SpongeWipingEnv",
    "StairChasingEnv",
    "env_reset",
    "env_step",
    "make_env",
]
