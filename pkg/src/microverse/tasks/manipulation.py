"""Tabletop manipulation: pick a fruit into a basket, fold a cloth corner
onto another, and wipe a sponge to a target spot.

All three share a free-flying gripper: a kinematically driven palm bar
with two prismatic finger capsules. Actions are (dx, dy, dz,
target_width); translation is clamped to 0.05 m per step, width to
[0, 0.08] m. Grasping rigid objects is purely frictional; thin cloth is
grasped by pinning the nearest particle to the palm frame while the
fingers are closed, released when they open.
"""
from __future__ import annotations

import json

import numpy as np

from ..pbd import attach, detach
from ..scene import instantiate, parse_scene_config, query_object
from ..vecmath import quat_conjugate, quat_rotate, vec3
from .base import ACTION_DT, Env, GoalObservation
from .rewards import cloth_success, sparse_goal_reward, sponge_failure

MOVE_CLAMP = 0.05          # max palm translation per action step, m
WIDTH_RANGE = (0.0, 0.08)  # finger separation bounds, m
PALM_Z_MIN = 0.09          # keeps fingertips just above the tabletop
FINGER_DROP = 0.083        # palm center to fingertip midpoint, m: the
                           # finger centers ride 0.05 below the palm and
                           # the capsule tip adds half_height + radius
GRASP_RADIUS = 0.02        # cloth pin engage distance, m
CLOSE_WIDTH = 0.02         # width command treated as "closed"
OPEN_WIDTH = 0.04          # width command treated as "open"


def gripper_object(position, name="gripper"):
    """Articulated spec for the palm-and-fingers rig."""
    x, y, z = position
    return {
        "name": name, "kind": "articulated",
        "bodies": [
            {"name": "palm",
             "shape": {"type": "capsule", "radius": 0.025, "half_height": 0.04},
             "position": [0.0, 0.0, 0.0],
             "orientation": [0.70710678118654757, 0.70710678118654746, 0.0, 0.0],
             "mass": 0.5, "kinematic": True, "collision_group": 1},
            {"name": "finger_left",
             "shape": {"type": "capsule", "radius": 0.008, "half_height": 0.025},
             "position": [0.0, -0.04, -0.05],
             "mass": 0.08, "collision_group": 1},
            {"name": "finger_right",
             "shape": {"type": "capsule", "radius": 0.008, "half_height": 0.025},
             "position": [0.0, 0.04, -0.05],
             "mass": 0.08, "collision_group": 1},
        ],
        "joints": [
            {"kind": "prismatic", "parent": "palm", "child": "finger_left",
             "anchor": [0.0, -0.04, -0.05], "axis": [0.0, 1.0, 0.0],
             "limits": [-0.005, 0.045],
             "drive": {"kp": 900.0, "kd": 30.0, "target": 0.0}},
            {"kind": "prismatic", "parent": "palm", "child": "finger_right",
             "anchor": [0.0, 0.04, -0.05], "axis": [0.0, 1.0, 0.0],
             "limits": [-0.045, 0.005],
             "drive": {"kp": 900.0, "kd": 30.0, "target": 0.0}},
        ],
        "placement": {"explicit": {"position": [x, y, z]}},
        "attributes": {"friction": 0.9},
    }


FLOOR_OBJECT = {"name": "floor", "kind": "rigid",
                "shape": {"type": "plane", "normal": [0, 0, 1], "offset": 0.0},
                "placement": {"explicit": {"position": [0, 0, 0]}},
                "attributes": {"friction": 0.6}}


class ManipulationEnv(Env):
    """Shared gripper handling for the tabletop tasks."""

    action_size = 4
    max_steps = 50

    def __init__(self, config=None):
        super().__init__(config)
        self.threshold = float(self.config.get("threshold", 0.05))

    # -- gripper --------------------------------------------------------------

    def _gripper(self):
        entry = self.scene.registry["gripper"]
        world = self.scene.world
        return (world.body(entry["bodies"]["palm"]),
                world.body(entry["bodies"]["finger_left"]),
                world.body(entry["bodies"]["finger_right"]),
                entry["joints"])

    def gripper_width(self) -> float:
        palm, fl, fr, _ = self._gripper()
        axis = quat_rotate(palm.orientation, vec3(0.0, 0.0, 1.0))
        return float(abs(np.dot(fr.position - fl.position, axis)))

    def fingertip_midpoint(self) -> np.ndarray:
        palm, _, _, _ = self._gripper()
        return palm.position + vec3(0.0, 0.0, -FINGER_DROP)

    def _apply(self, action):
        palm, _, _, joints = self._gripper()
        delta = np.clip(action[:3], -MOVE_CLAMP, MOVE_CLAMP)
        target = palm.position + delta
        target[2] = max(target[2], PALM_Z_MIN)
        palm.linear_velocity = (target - palm.position) / ACTION_DT
        width = float(np.clip(action[3], *WIDTH_RANGE))
        world = self.scene.world
        world.joint(joints[0]).drive.target = (WIDTH_RANGE[1] - width) / 2.0
        world.joint(joints[1]).drive.target = -(WIDTH_RANGE[1] - width) / 2.0
        self._width_command = width
        self._maybe_grasp()

    def _maybe_grasp(self):
        """Hook for cloth pinning; rigid tasks grasp through friction."""

    def _gripper_observation(self):
        palm, _, _, _ = self._gripper()
        return np.concatenate([
            palm.position, palm.linear_velocity, [self.gripper_width()]])

    def _object_observation(self, name):
        state = query_object(self.scene, name)
        return np.concatenate([state.position, state.orientation,
                               state.linear_velocity, state.angular_velocity])

    def _settle(self, steps):
        for _ in range(steps):
            self.scene.step(1.0 / 60.0, pbd_iterations=self.pbd_iterations())

    def _observe(self):
        return GoalObservation(
            observation=np.concatenate([
                self._gripper_observation(),
                self._object_observation(self.object_name),
                self._target_position()]),
            achieved_goal=self._achieved_goal(),
            desired_goal=self._target_position())

    def _achieved_goal(self):
        return query_object(self.scene, self.object_name).position

    def _target_position(self):
        raise NotImplementedError


class FruitPickingEnv(ManipulationEnv):
    """Lift a fruit off the table and drop it into the basket."""

    task_id = "fruit_picking"
    object_name = "fruit"

    def _build(self, seed):
        doc = {
            "schema_version": 1, "seed": self.rng.next_u64(),
            "workspace_bounds": {"min": [-1, -1, -0.1], "max": [1, 1, 1]},
            "objects": [
                FLOOR_OBJECT,
                gripper_object((0.0, 0.0, 0.25)),
                {"name": "fruit", "kind": "rigid",
                 "shape": {"type": "sphere", "radius": 0.03},
                 "placement": {"sampled": {
                     "region": {"min": [-0.28, -0.18, 0.03],
                                "max": [-0.08, 0.18, 0.03]},
                     "fixed_or_falling": "falling"}},
                 "attributes": {"mass": 0.05, "friction": 0.8}},
                {"name": "basket", "kind": "articulated",
                 "bodies": _basket_walls(),
                 "joints": [],
                 "placement": {"sampled": {
                     "region": {"min": [0.1, -0.15, 0.032],
                                "max": [0.26, 0.15, 0.032]},
                     "fixed_or_falling": "fixed"}}},
            ],
            "task": {"task_id": self.task_id},
        }
        self.scene = instantiate(parse_scene_config(json.dumps(doc)))
        self._settle(30)

    def _target_position(self):
        bottom = self.scene.world.body(self.scene.registry["basket"]["root"])
        return np.array([bottom.position[0], bottom.position[1], 0.034])

    def _fruit_in_basket(self):
        # anything physically inside the rim is < 0.052 m from the center
        # in the plane; anything outside is > 0.11 m, so 0.08 separates them
        fruit = self.scene.world.body(self.scene.registry["fruit"]["root"])
        rel = fruit.position - self._target_position()
        inside = float(np.hypot(rel[0], rel[1])) < 0.08 and fruit.position[2] < 0.09
        settled = float(np.linalg.norm(fruit.linear_velocity)) < 0.05
        return inside and settled

    def _transition(self):
        success = self._fruit_in_basket()
        return (0.0 if success else -1.0), False, {"is_success": success}


def _basket_walls():
    """Bottom plate plus four thin walls around a 0.132 m square interior.

    Local frame: plate centered at the origin, walls rising to 0.064 m
    once the basket rests on the table (basket origin sits at z=0.032).
    """
    t, h, half = 0.008, 0.032, 0.066
    bodies = [{"name": "bottom",
               "shape": {"type": "box", "half_extents": [half + 2 * t,
                                                         half + 2 * t, 0.002]},
               "position": [0.0, 0.0, -0.030], "mass": 0.0}]
    for name, pos, he in (
            ("wall_front", [half + t, 0.0], [t, half + 2 * t, h]),
            ("wall_back", [-half - t, 0.0], [t, half + 2 * t, h]),
            ("wall_left", [0.0, -half - t], [half, t, h]),
            ("wall_right", [0.0, half + t], [half, t, h])):
        bodies.append({
            "name": name,
            "shape": {"type": "box", "half_extents": he},
            "position": [pos[0], pos[1], 0.0],
            "mass": 0.0})
    return bodies


class ClothFoldingEnv(ManipulationEnv):
    """Fold one randomly chosen cloth corner onto another."""

    task_id = "cloth_folding"
    object_name = "sheet"

    _CORNER_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

    def _build(self, seed):
        rng = self.rng
        scene_seed = rng.next_u64()
        doc = {
            "schema_version": 1, "seed": scene_seed,
            "workspace_bounds": {"min": [-1, -1, -0.1], "max": [1, 1, 1]},
            "objects": [
                FLOOR_OBJECT,
                gripper_object((0.0, 0.0, 0.3)),
                {"name": "sheet", "kind": "cloth",
                 "placement": {"explicit": {"position": [0.0, 0.0, 0.008]}}},
            ],
            "task": {"task_id": self.task_id},
        }
        self.scene = instantiate(parse_scene_config(json.dumps(doc)))
        ps = self.scene.particles["sheet"]
        spec = self.scene.registry["sheet"]["cloth_spec"]

        # random-state reset: uniform yaw, then an optional pre-fold
        yaw = rng.uniform(0.0, 2.0 * np.pi)
        c, s = np.cos(yaw), np.sin(yaw)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        center = ps.positions.mean(axis=0)
        ps.positions = (ps.positions - center) @ rot.T + center
        ps.predicted_positions = ps.positions.copy()
        if rng.random() < 0.5:
            corner = spec.corner_ids[rng.randint(4)]
            lift = ps.positions[corner].copy()
            span = spec.spacing * (spec.grid[0] - 1)
            goal = center + np.array([rng.uniform(-span / 2, span / 2),
                                      rng.uniform(-span / 2, span / 2), 0.02])
            attach(ps, corner, lift)
            for frac in np.linspace(0.0, 1.0, 12):
                arc = lift * (1 - frac) + goal * frac
                arc[2] = max(lift[2], goal[2]) + 0.12 * np.sin(np.pi * frac)
                attach(ps, corner, arc)
                self._settle(1)
            detach(ps, corner)
        self._settle(20)

        pair = self._CORNER_PAIRS[rng.randint(len(self._CORNER_PAIRS))]
        self.corner_a = spec.corner_ids[pair[0]]
        self.corner_b = spec.corner_ids[pair[1]]
        self.held_particle: int | None = None
        self._width_command = WIDTH_RANGE[1]

    def _maybe_grasp(self):
        ps = self.scene.particles["sheet"]
        if self.held_particle is None and self._width_command < CLOSE_WIDTH:
            tip = self.fingertip_midpoint()
            dists = np.linalg.norm(ps.positions - tip, axis=1)
            nearest = int(np.argmin(dists))
            if dists[nearest] < GRASP_RADIUS:
                palm, _, _, _ = self._gripper()
                local = quat_rotate(quat_conjugate(palm.orientation),
                                    ps.positions[nearest] - palm.position)
                attach(ps, nearest, (self.scene.registry["gripper"]["bodies"]["palm"],
                                     local))
                self.held_particle = nearest
        elif self.held_particle is not None and self._width_command > OPEN_WIDTH:
            detach(ps, self.held_particle)
            self.held_particle = None

    def _corner_positions(self):
        ps = self.scene.particles["sheet"]
        return ps.positions[self.corner_a].copy(), ps.positions[self.corner_b].copy()

    def _achieved_goal(self):
        return self._corner_positions()[0]

    def _target_position(self):
        return self._corner_positions()[1]

    def _transition(self):
        a, b = self._corner_positions()
        success = cloth_success(a, b)
        return (0.0 if success else -1.0), False, {"is_success": success}


class SpongeWipingEnv(ManipulationEnv):
    """Push the sponge along the table until it covers the target spot."""

    task_id = "sponge_wiping"
    object_name = "sponge"

    def _build(self, seed):
        rng = self.rng
        scene_seed = rng.next_u64()
        start = np.array([rng.uniform(-0.08, 0.08),
                          rng.uniform(-0.08, 0.08), 0.028])
        heading = rng.uniform(0.0, 2.0 * np.pi)
        reach = rng.uniform(0.16, 0.26)
        self.target = start + np.array([reach * np.cos(heading),
                                        reach * np.sin(heading), 0.0])
        self.target[2] = 0.028
        doc = {
            "schema_version": 1, "seed": scene_seed,
            "workspace_bounds": {"min": [-1, -1, -0.1], "max": [1, 1, 1]},
            "objects": [
                FLOOR_OBJECT,
                gripper_object((0.0, 0.0, 0.3)),
                {"name": "sponge", "kind": "softbody",
                 "placement": {"explicit": {"position": list(start)}}},
            ],
            "task": {"task_id": self.task_id},
        }
        self.scene = instantiate(parse_scene_config(json.dumps(doc)))
        self._settle(12)
        self.target[2] = float(
            self.scene.particles["sponge"].positions[:, 2].mean())

    def _target_position(self):
        return self.target.copy()

    def _transition(self):
        ps = self.scene.particles["sponge"]
        centroid = ps.positions.mean(axis=0)
        success = sparse_goal_reward(centroid, self.target, self.threshold) == 0.0
        info = {"is_success": success}
        terminated = False
        if sponge_failure(float(ps.positions[:, 2].min()), 0.0):
            info["failure"] = "sponge lifted off the table"
            terminated = True
        return (0.0 if success else -1.0), terminated, info
