"""Episode plumbing shared by the benchmark environments.

Each environment owns one scene and steps it with a fixed number of
physics substeps per action (action step 1/30 s; by default two physics
steps of 1/60 s). Environments that need a stiffer integration override
`physics_dt`/`substeps` as a pair so the action step stays 1/30 s.
Subclasses build their scene in `_build(seed)`, turn actions into
forces/targets in `_apply(action)`, and report task state via
`_observe()` and `_transition()`.

Seeding: reset(seed) opens one generator for the episode. Builders draw
the scene-sampling seed from it first, then any task-level randomness
(goal points, corner choices), so the streams never alias.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SimulationDiverged
from ..rng import Rng
from ..scene import Scene

ACTION_DT = 1.0 / 30.0
PHYSICS_DT = 1.0 / 60.0
SUBSTEPS = 2  # physics steps per action step


@dataclass
class GoalObservation:
    """Observation triple for goal-conditioned tasks."""

    observation: np.ndarray
    achieved_goal: np.ndarray
    desired_goal: np.ndarray

    def __post_init__(self):
        self.observation = np.asarray(self.observation, dtype=float)
        self.achieved_goal = np.asarray(self.achieved_goal, dtype=float)
        self.desired_goal = np.asarray(self.desired_goal, dtype=float)
        if self.achieved_goal.shape != self.desired_goal.shape:
            raise ValueError("achieved and desired goals must match in shape")


@dataclass
class EpisodeState:
    step_index: int
    max_steps: int
    terminated: bool
    truncated: bool
    rng: Rng


class Env:
    """Base class: reset/step state machine with truncation accounting."""

    task_id: str = ""
    max_steps: int = 0
    action_size: int = 0
    physics_dt: float = PHYSICS_DT
    substeps: int = SUBSTEPS

    def __init__(self, config: dict | None = None):
        self.config = dict(config or {})
        self.max_steps = int(self.config.get("max_steps", self.max_steps))
        self.episode: EpisodeState | None = None
        self.scene: Scene | None = None
        self.rng: Rng | None = None

    # -- subclass hooks -------------------------------------------------------

    def _build(self, seed: int) -> None:
        raise NotImplementedError

    def _apply(self, action: np.ndarray) -> None:
        raise NotImplementedError

    def _observe(self) -> GoalObservation:
        raise NotImplementedError

    def _transition(self) -> tuple[float, bool, dict]:
        """Per-step (reward, terminated, info) after physics has advanced."""
        raise NotImplementedError

    def _advance_physics(self) -> None:
        for _ in range(self.substeps):
            self.scene.step(self.physics_dt, pbd_iterations=self.pbd_iterations())

    def pbd_iterations(self) -> int:
        return 10

    # -- public API -----------------------------------------------------------

    def reset(self, seed: int) -> GoalObservation:
        """Build a fresh episode, deterministic in the seed."""
        self.rng = Rng(seed)
        self._build(seed)
        self.episode = EpisodeState(step_index=0, max_steps=self.max_steps,
                                    terminated=False, truncated=False,
                                    rng=self.rng)
        return self._observe()

    def step(self, action):
        """Apply one action and advance the episode."""
        if self.episode is None:
            raise RuntimeError("reset() must be called before step()")
        action = np.asarray(action, dtype=float).ravel()
        if action.shape != (self.action_size,):
            raise ValueError(
                f"{self.task_id} expects {self.action_size} action components, "
                f"got {action.shape}")
        ep = self.episode
        info: dict = {}
        try:
            self._apply(action)
            self._advance_physics()
            reward, terminated, info = self._transition()
        except SimulationDiverged as e:
            reward, terminated = -1.0, True
            info = {"failure": f"diverged: {e}"}
        ep.step_index += 1
        ep.terminated = ep.terminated or terminated
        truncated = (not ep.terminated) and ep.step_index >= ep.max_steps
        ep.truncated = truncated
        return self._observe(), reward, ep.terminated, truncated, info


def env_reset(env: Env, seed: int) -> GoalObservation:
    """Functional alias for Env.reset."""
    return env.reset(seed)


def env_step(env: Env, action):
    """Functional alias for Env.step."""
    return env.step(action)
