"""Multi-agent room cleaning: three force-controlled sweeper discs mark
an 8x8 coverage grid over a 4 m x 4 m walled room.

The discs are spheres on a frictionless floor (a disc robot drives; it
does not scrub along the ground), force-capped at 50 N per axis. The
action is the concatenation of the three agents' planar force vectors;
the shared observation is every agent's planar position and velocity.
Any agent-agent contact ends the episode with the -50 penalty.
"""
from __future__ import annotations

import json

import numpy as np

from ..scene import instantiate, parse_scene_config
from .base import ACTION_DT, Env, GoalObservation
from .rewards import CoverageGrid, room_reward

ROOM_MIN = (-2.0, -2.0)
ROOM_MAX = (2.0, 2.0)
N_AGENTS = 3
AGENT_RADIUS = 0.15
AGENT_MASS = 2.0
FORCE_CLAMP = 50.0  # N per axis

# each agent starts inside (and is scripted to sweep) its own row band
AGENT_ROW_BANDS = ((0, 2), (3, 5), (6, 7))


def _wall(name, center, half_extents):
    return {"name": name, "kind": "rigid",
            "shape": {"type": "box", "half_extents": list(half_extents)},
            "placement": {"explicit": {"position": list(center)}},
            "attributes": {"mass": 0.0, "friction": 0.0}}


class RoomCleaningEnv(Env):
    """Sweep the room: reward is mean agent speed plus cells cleaned."""

    task_id = "room_cleaning"
    action_size = 2 * N_AGENTS
    max_steps = 100

    def _build(self, seed):
        scene_seed = self.rng.next_u64()
        inner, t, h = 2.0, 0.05, 0.15
        agents = []
        # one start per row band: disjoint bands make the placements
        # collision-free by construction, and the agents stay dynamic
        for k, (row_lo, row_hi) in enumerate(AGENT_ROW_BANDS):
            y_lo = ROOM_MIN[1] + 0.5 * row_lo + AGENT_RADIUS
            y_hi = ROOM_MIN[1] + 0.5 * (row_hi + 1) - AGENT_RADIUS
            start = [self.rng.uniform(-1.7, 1.7),
                     self.rng.uniform(y_lo, y_hi), AGENT_RADIUS]
            agents.append({
                "name": f"agent_{k}", "kind": "rigid",
                "shape": {"type": "sphere", "radius": AGENT_RADIUS},
                "placement": {"explicit": {"position": start}},
                "attributes": {"mass": AGENT_MASS, "friction": 0.0},
            })
        doc = {
            "schema_version": 1, "seed": scene_seed,
            "workspace_bounds": {"min": [-2.5, -2.5, -0.1],
                                 "max": [2.5, 2.5, 1.0]},
            "objects": [
                {"name": "floor", "kind": "rigid",
                 "shape": {"type": "plane", "normal": [0, 0, 1], "offset": 0.0},
                 "placement": {"explicit": {"position": [0, 0, 0]}},
                 "attributes": {"friction": 0.0}},
                _wall("wall_east", (inner + t, 0.0, h), (t, inner + 2 * t, h)),
                _wall("wall_west", (-inner - t, 0.0, h), (t, inner + 2 * t, h)),
                _wall("wall_north", (0.0, inner + t, h), (inner, t, h)),
                _wall("wall_south", (0.0, -inner - t, h), (inner, t, h)),
                *agents,
            ],
            "task": {"task_id": self.task_id},
        }
        self.scene = instantiate(parse_scene_config(json.dumps(doc)))
        self.grid = CoverageGrid(room_min=ROOM_MIN, room_max=ROOM_MAX)
        self._agent_ids = tuple(
            self.scene.registry[f"agent_{k}"]["root"] for k in range(N_AGENTS))
        self._mark_cells()
        self._collided = False

    # -- helpers ---------------------------------------------------------------

    def _agent_bodies(self):
        return [self.scene.world.body(bid) for bid in self._agent_ids]

    def _mark_cells(self):
        for body in self._agent_bodies():
            self.grid.mark(body.position)

    def _apply(self, action):
        forces = np.clip(action.reshape(N_AGENTS, 2), -FORCE_CLAMP, FORCE_CLAMP)
        for body, f in zip(self._agent_bodies(), forces):
            dv = np.array([f[0], f[1], 0.0]) * (ACTION_DT / AGENT_MASS)
            body.linear_velocity = body.linear_velocity + dv

    def _advance_physics(self):
        # collect contacts from both substeps; a graze in the first one
        # must still count as a collision
        agent_set = set(self._agent_ids)
        for _ in range(self.substeps):
            self.scene.step(self.physics_dt, pbd_iterations=self.pbd_iterations())
            for c in self.scene.world.last_contacts:
                if c.body_a in agent_set and c.body_b in agent_set:
                    self._collided = True

    def _observe(self):
        parts = []
        for body in self._agent_bodies():
            parts.append([body.position[0], body.position[1],
                          body.linear_velocity[0], body.linear_velocity[1]])
        return GoalObservation(observation=np.concatenate(parts),
                               achieved_goal=np.zeros(0),
                               desired_goal=np.zeros(0))

    def _transition(self):
        self._mark_cells()
        speeds = [float(np.hypot(b.linear_velocity[0], b.linear_velocity[1]))
                  for b in self._agent_bodies()]
        cleaned = self.grid.cleaned_count
        reward, terminated = room_reward(speeds, cleaned, self._collided)
        info = {"cleaned_cells": cleaned, "is_success": cleaned == 64}
        if self._collided:
            info["failure"] = "agents collided"
        return reward, terminated, info
