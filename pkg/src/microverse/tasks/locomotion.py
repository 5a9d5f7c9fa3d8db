"""Stair chasing: a PD-driven biped must move toward a toy dropped on a
staircase, keeping its torso velocity near 1 m/s toward the toy and its
torso facing it.

The biped is a reduced humanoid: six principal capsules (torso with
arms fused in, pelvis, two thighs and shins), two flat box feet, and
five small connector capsules that realize the two-axis waist, hip and
ankle joints, for 12 hinge DoFs total, in this action/observation order:

    0 waist yaw (z)      4 knee L (y)          8 hip pitch R (y)
    1 waist pitch (y)    5 ankle roll L (x)    9 knee R (y)
    2 hip roll L (x)     6 ankle pitch L (y)   10 ankle roll R (x)
    3 hip pitch L (y)    7 hip roll R (x)      11 ankle pitch R (y)

Actions are the 12 joint target angles (radians, clamped to the joint
limits); the observation is joint angles (12) + joint speeds (12) +
torso position (3), orientation (4), velocity (3), angular velocity (3)
+ toy position (3) = 40 components.

Touching the toy ends the episode with reward +1; any body part other
than the feet touching the ground or stairs ends it with -1.
"""
from __future__ import annotations

import json

import numpy as np

from ..scene import instantiate, parse_scene_config
from ..vecmath import quat_rotate, vec3
from .base import Env, GoalObservation
from .rewards import stair_reward, stair_termination

STAIR_RISE = 0.15
STAIR_RUN = 0.3
N_STAIRS = 8
STAIRS_X0 = 0.8         # front face of the first step
TOY_RADIUS = 0.05
TARGET_SPEED = 1.0      # commanded horizontal speed toward the toy, m/s

# (name, child, parent, anchor, axis, limits) per drive; anchors are in
# the biped's local frame with the feet on the ground at z=0
_LEG_Y = 0.10
_HIP_Z, _KNEE_Z, _ANKLE_Z = 0.81, 0.45, 0.09


# Reflected rotor inertia of a geared servo, folded into each leg link.
# The thin connector links are two orders of magnitude "softer" in rotation
# than the torso, and an impulse solver concentrates all its residual error
# in the softest rows -- without this floor the ankle joints drift apart
# under the standing load.
_ARMATURE = [0.02, 0.02, 0.02]


def _capsule(name, radius, half_height, position, mass,
             orientation=None, inertia=None):
    body = {"name": name,
            "shape": {"type": "capsule", "radius": radius,
                      "half_height": half_height},
            "position": list(position), "mass": mass,
            "collision_group": 1}
    if orientation is not None:
        body["orientation"] = list(orientation)
    if inertia is not None:
        body["inertia"] = list(inertia)
    return body


_SIDEWAYS = [0.70710678118654757, 0.70710678118654746, 0.0, 0.0]  # z -> -y


def biped_object(position, name="walker"):
    """Articulated spec for the reduced humanoid."""
    bodies = [
        _capsule("torso", 0.09, 0.15, (0.0, 0.0, 1.12), 16.0),
        _capsule("pelvis", 0.07, 0.10, (0.0, 0.0, 0.85), 9.0,
                 orientation=_SIDEWAYS),
        _capsule("waist_link", 0.055, 0.03, (0.0, 0.0, 0.93), 1.5,
                 inertia=_ARMATURE),
    ]
    joints = [
        {"kind": "hinge", "parent": "pelvis", "child": "waist_link",
         "anchor": [0.0, 0.0, 0.93], "axis": [0, 0, 1],
         "limits": [-0.7, 0.7], "drive": {"kp": 200.0, "kd": 20.0}},
        {"kind": "hinge", "parent": "waist_link", "child": "torso",
         "anchor": [0.0, 0.0, 0.93], "axis": [0, 1, 0],
         "limits": [-0.5, 0.6], "drive": {"kp": 200.0, "kd": 20.0}},
    ]
    for side, sy in (("left", _LEG_Y), ("right", -_LEG_Y)):
        bodies += [
            _capsule(f"hip_link_{side}", 0.055, 0.03, (0.0, sy, _HIP_Z), 1.5,
                     inertia=_ARMATURE),
            _capsule(f"thigh_{side}", 0.05, 0.13, (0.0, sy, 0.63), 4.5,
                     inertia=[0.031, 0.031, 0.02]),
            _capsule(f"shin_{side}", 0.04, 0.14, (0.0, sy, 0.27), 2.5,
                     inertia=_ARMATURE),
            # slim stub: keep 35 mm ground clearance under the settle dip
            _capsule(f"ankle_link_{side}", 0.04, 0.015, (0.0, sy, _ANKLE_Z),
                     1.2, inertia=_ARMATURE),
            # flat sole: the footprint bounds the ankle torque that can reach
            # the ground in each direction, and a sole that cannot roll in
            # place pins the foot's attitude so the ankle angles actually
            # measure (and the servos correct) the body's lean; a rounded
            # foot would free-roll sideways and leave the roll servo blind
            {"name": f"foot_{side}", "mass": 1.4,
             "shape": {"type": "box", "half_extents": [0.11, 0.045, 0.02]},
             "position": [0.0, sy, 0.02], "inertia": list(_ARMATURE),
             "collision_group": 1},
        ]
        joints += [
            # sideways lean is a parallelogram mode: both legs tilt together
            # and the m g h of everything above the hips (~400 N*m/rad) loads
            # these two drives, so they run the stiffest gains in the chain;
            # the ankles can only assist within the +-45 mm sole half-width
            # before their center of pressure saturates at the foot edge
            {"kind": "hinge", "parent": "pelvis", "child": f"hip_link_{side}",
             "anchor": [0.0, sy, _HIP_Z], "axis": [1, 0, 0],
             "limits": [-0.5, 0.5], "drive": {"kp": 800.0, "kd": 80.0}},
            {"kind": "hinge", "parent": f"hip_link_{side}",
             "child": f"thigh_{side}",
             "anchor": [0.0, sy, _HIP_Z], "axis": [0, 1, 0],
             "limits": [-1.3, 1.3], "drive": {"kp": 250.0, "kd": 25.0}},
            # a straight leg carries its load axially, so the knee buckles
            # at the slightest flexion unless the drive is stiff enough to
            # kill the crouch transient from the initial settle
            {"kind": "hinge", "parent": f"thigh_{side}",
             "child": f"shin_{side}",
             "anchor": [0.0, sy, _KNEE_Z], "axis": [0, 1, 0],
             "limits": [-0.05, 2.4], "drive": {"kp": 450.0, "kd": 45.0}},
            # ankle gains must beat the inverted-pendulum tipping stiffness
            # (m g h over both legs is ~440 N*m/rad) for the figure to stand
            {"kind": "hinge", "parent": f"shin_{side}",
             "child": f"ankle_link_{side}",
             "anchor": [0.0, sy, _ANKLE_Z], "axis": [1, 0, 0],
             "limits": [-0.45, 0.45], "drive": {"kp": 600.0, "kd": 60.0}},
            {"kind": "hinge", "parent": f"ankle_link_{side}",
             "child": f"foot_{side}",
             "anchor": [0.0, sy, _ANKLE_Z], "axis": [0, 1, 0],
             "limits": [-0.9, 0.9], "drive": {"kp": 600.0, "kd": 60.0}},
        ]
    x, y, z = position
    return {"name": name, "kind": "articulated",
            "bodies": bodies, "joints": joints,
            "placement": {"explicit": {"position": [x, y, z]}},
            "attributes": {"friction": 0.8}}


FOOT_PARTS = ("foot_left", "foot_right")


def _stair_objects():
    objs = []
    for i in range(N_STAIRS):
        hz = STAIR_RISE * (i + 1) / 2.0
        objs.append({
            "name": f"stair_{i}", "kind": "rigid",
            "shape": {"type": "box",
                      "half_extents": [STAIR_RUN / 2.0, 1.0, hz]},
            "placement": {"explicit": {
                "position": [STAIRS_X0 + STAIR_RUN * (i + 0.5), 0.0, hz]}},
            "attributes": {"mass": 0.0, "friction": 0.8}})
    return objs


class StairChasingEnv(Env):
    """Chase the toy up the stairs without falling."""

    task_id = "stair_chasing"
    action_size = 12
    max_steps = 5000
    # The stiff PD chain needs a finer step than the other tasks: at 1/60
    # the sampled servo loop pumps the ~2 Hz lateral sway mode faster than
    # the ankles can drain it and the figure eventually tips; at 1/120 the
    # same gains are comfortably inside the stable region.
    physics_dt = 1.0 / 120.0
    substeps = 4

    def _build(self, seed):
        scene_seed = self.rng.next_u64()
        stair_index = self.rng.randint(N_STAIRS)
        toy_x = STAIRS_X0 + STAIR_RUN * (stair_index + 0.5)
        toy_y = self.rng.uniform(-0.8, 0.8)
        toy_z = STAIR_RISE * (stair_index + 1) + TOY_RADIUS + 0.05
        doc = {
            "schema_version": 1, "seed": scene_seed,
            "workspace_bounds": {"min": [-2, -2, -0.1], "max": [5, 2, 3]},
            "objects": [
                {"name": "ground", "kind": "rigid",
                 "shape": {"type": "plane", "normal": [0, 0, 1], "offset": 0.0},
                 "placement": {"explicit": {"position": [0, 0, 0]}},
                 "attributes": {"friction": 0.8}},
                *_stair_objects(),
                {"name": "toy", "kind": "rigid",
                 "shape": {"type": "sphere", "radius": TOY_RADIUS},
                 "placement": {"explicit": {
                     "position": [toy_x, toy_y, toy_z]}},
                 "attributes": {"mass": 0.2, "friction": 0.6,
                                "restitution": 0.0}},
                # start the soles a hair below grade so foot contacts exist
                # from the very first substep instead of after a free fall
                biped_object((0.0, 0.0, -0.0015)),
            ],
            "task": {"task_id": self.task_id},
        }
        self.scene = instantiate(parse_scene_config(json.dumps(doc)))
        # Standing margins are iteration-bound: at the default counts the
        # residual joint error reads as play in the ankles and the figure
        # wanders off its feet within a few hundred steps.  Fixed-direction
        # sweeps keep the error signature constant so the servo loop sees a
        # repeatable plant.
        p = self.scene.world.params
        p.velocity_iterations = 40
        p.joint_iterations = 40
        p.position_iterations = 30
        p.alternate_sweeps = False
        entry = self.scene.registry["walker"]
        self._joint_ids = entry["joints"]
        self._part_of = {bid: part for part, bid in entry["bodies"].items()}
        self._torso_id = entry["bodies"]["torso"]
        self._toy_id = self.scene.registry["toy"]["root"]
        self._terrain_ids = {self.scene.registry["ground"]["root"]}
        self._terrain_ids.update(
            self.scene.registry[f"stair_{i}"]["root"] for i in range(N_STAIRS))
        self._step_contacts = []
        for _ in range(20):  # let the toy settle onto its stair
            self.scene.step(self.physics_dt)

    def _apply(self, action):
        world = self.scene.world
        for jid, target in zip(self._joint_ids, action):
            joint = world.joint(jid)
            lo, hi = joint.limits
            joint.drive.target = float(np.clip(target, lo, hi))

    def _advance_physics(self):
        self._step_contacts = []
        for _ in range(self.substeps):
            self.scene.step(self.physics_dt, pbd_iterations=self.pbd_iterations())
            self._step_contacts.extend(self.scene.world.last_contacts)

    def _toward_toy(self):
        torso = self.scene.world.body(self._torso_id)
        toy = self.scene.world.body(self._toy_id)
        d = toy.position - torso.position
        d[2] = 0.0
        n = float(np.linalg.norm(d))
        return d / n if n > 1e-9 else vec3(1.0, 0.0, 0.0)

    def _observe(self):
        world = self.scene.world
        angles = [world.joint_coordinate(j) for j in self._joint_ids]
        speeds = [world.joint_speed(j) for j in self._joint_ids]
        torso = world.body(self._torso_id)
        toy = world.body(self._toy_id)
        return GoalObservation(
            observation=np.concatenate([
                angles, speeds, torso.position, torso.orientation,
                torso.linear_velocity, torso.angular_velocity, toy.position]),
            achieved_goal=np.zeros(0), desired_goal=np.zeros(0))

    def _transition(self):
        torso = self.scene.world.body(self._torso_id)
        direction = self._toward_toy()
        v_star = TARGET_SPEED * direction
        o = quat_rotate(torso.orientation, vec3(1.0, 0.0, 0.0))
        r = stair_reward(torso.linear_velocity, v_star, o, direction)

        touching, toy_touched = set(), False
        walker_ids = set(self._part_of)
        for c in self._step_contacts:
            pair = {c.body_a, c.body_b}
            hit = pair & walker_ids
            if not hit:
                continue
            part = self._part_of[next(iter(hit))]
            other = (pair - hit).pop() if len(pair) > 1 else None
            if other in self._terrain_ids:
                touching.add(part)
            elif other == self._toy_id:
                toy_touched = True
        reward, terminated = stair_termination(
            touching, toy_touched, r, foot_parts=FOOT_PARTS)
        info = {"is_success": toy_touched}
        if terminated and not toy_touched:
            info["failure"] = "body contact with the ground"
        return reward, terminated, info
