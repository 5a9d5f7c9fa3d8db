"""Declarative scene construction.

A scene starts as a JSON document: workspace bounds, a seed, and a list of
object specs (rigid shapes, articulated rigs, cloth sheets, soft-body
lattices). Parsing validates the document and fills defaults in place, so
a parsed config serializes back to an equivalent document. Instantiation
is a pure function of the config: sampled placements draw from a seeded
generator, and the same config always yields byte-identical worlds.

Placement is either explicit (position + orientation) or sampled: uniform
position inside a region box plus uniform yaw, rejection-sampled against
the axis-aligned bounds of everything placed so far. Objects flagged
"falling" spawn 0.3 m above their sampled point with zero velocity;
"fixed" objects are static.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotFound, PlacementError, SceneConfigError
from .pbd import ParticleSystem, build_cloth, build_sponge, pbd_step
from .rigid import (Box, Capsule, Drive, Material, RigidWorld, Sphere,
                    StaticPlane)
from .rng import Rng
from .vecmath import (quat_from_axis_angle, quat_mul, quat_rotate,
                      quat_to_matrix, vec3)

SCHEMA_VERSION = 1
FALL_HEIGHT = 0.3          # spawn offset for "falling" objects, m
MAX_PLACEMENT_ATTEMPTS = 100

KINDS = ("rigid", "articulated", "cloth", "softbody")


# ---------------------------------------------------------------------------
# config model


@dataclass(frozen=True)
class ExplicitPlacement:
    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SampledPlacement:
    region_min: tuple[float, float, float]
    region_max: tuple[float, float, float]
    falling: bool = False


@dataclass
class ObjectSpec:
    name: str
    kind: str
    params: dict
    placement: ExplicitPlacement | SampledPlacement
    attributes: dict = field(default_factory=dict)


@dataclass
class SceneConfig:
    objects: list[ObjectSpec]
    workspace_min: tuple[float, float, float]
    workspace_max: tuple[float, float, float]
    seed: int
    task: dict | None = None


@dataclass
class SimClock:
    time: float = 0.0
    dt: float = 1.0 / 60.0


@dataclass
class ObjectState:
    """Unified snapshot of one scene object."""

    name: str
    kind: str
    position: np.ndarray
    orientation: np.ndarray
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray
    contact_force: np.ndarray
    attributes: dict


# ---------------------------------------------------------------------------
# parsing helpers


def _fail(path: str, message: str):
    raise SceneConfigError(f"{path}: {message}")


def _need(doc: dict, key: str, path: str):
    if key not in doc:
        _fail(path, f"missing required field '{key}'")
    return doc[key]


def _vec(value, path: str, length: int = 3) -> tuple:
    if (not isinstance(value, (list, tuple)) or len(value) != length
            or not all(isinstance(v, (int, float)) for v in value)):
        _fail(path, f"expected a list of {length} numbers")
    return tuple(float(v) for v in value)


def _number(value, path: str, minimum=None) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        _fail(path, "expected a number")
    v = float(value)
    if minimum is not None and v <= minimum:
        _fail(path, f"must be > {minimum}")
    return v


def _parse_shape(doc, path: str) -> dict:
    if not isinstance(doc, dict):
        _fail(path, "expected a shape object")
    kind = _need(doc, "type", path)
    out = {"type": kind}
    if kind == "sphere":
        out["radius"] = _number(_need(doc, "radius", path), f"{path}.radius", 0.0)
    elif kind == "box":
        out["half_extents"] = list(_vec(_need(doc, "half_extents", path),
                                        f"{path}.half_extents"))
    elif kind == "capsule":
        out["radius"] = _number(_need(doc, "radius", path), f"{path}.radius", 0.0)
        out["half_height"] = _number(_need(doc, "half_height", path),
                                     f"{path}.half_height", 0.0)
    elif kind == "plane":
        out["normal"] = list(_vec(doc.get("normal", [0.0, 0.0, 1.0]),
                                  f"{path}.normal"))
        out["offset"] = float(doc.get("offset", 0.0))
    else:
        _fail(f"{path}.type", f"unknown shape type {kind!r}")
    return out


def _build_shape(doc: dict):
    kind = doc["type"]
    if kind == "sphere":
        return Sphere(doc["radius"])
    if kind == "box":
        return Box(tuple(doc["half_extents"]))
    if kind == "capsule":
        return Capsule(doc["radius"], doc["half_height"])
    return StaticPlane(tuple(doc["normal"]), doc["offset"])


def _parse_placement(doc, path: str):
    if not isinstance(doc, dict) or ("explicit" in doc) == ("sampled" in doc):
        _fail(path, "exactly one of 'explicit' or 'sampled' must be present")
    if "explicit" in doc:
        ex = doc["explicit"]
        pos = _vec(_need(ex, "position", f"{path}.explicit"),
                   f"{path}.explicit.position")
        quat = _vec(ex.get("orientation_quat", [1.0, 0.0, 0.0, 0.0]),
                    f"{path}.explicit.orientation_quat", 4)
        return ExplicitPlacement(pos, quat)
    sm = doc["sampled"]
    region = _need(sm, "region", f"{path}.sampled")
    lo = _vec(_need(region, "min", f"{path}.sampled.region"),
              f"{path}.sampled.region.min")
    hi = _vec(_need(region, "max", f"{path}.sampled.region"),
              f"{path}.sampled.region.max")
    if any(h < l for l, h in zip(lo, hi)):
        _fail(f"{path}.sampled.region", "max must be >= min on every axis")
    mode = _need(sm, "fixed_or_falling", f"{path}.sampled")
    if mode not in ("fixed", "falling"):
        _fail(f"{path}.sampled.fixed_or_falling",
              f"expected 'fixed' or 'falling', got {mode!r}")
    return SampledPlacement(lo, hi, mode == "falling")


_CLOTH_DEFAULTS = {"rows": 16, "cols": 16, "size": 0.4, "total_mass": 0.2,
                   "bend_stiffness": 0.1}
_SOFTBODY_DEFAULTS = {"counts": [4, 4, 2], "size": [0.1, 0.1, 0.05],
                      "total_mass": 0.1, "edge_stiffness": 0.9,
                      "match_stiffness": 0.5}


def _parse_params(kind: str, doc: dict, path: str) -> dict:
    if kind == "rigid":
        return {"shape": _parse_shape(_need(doc, "shape", path), f"{path}.shape")}
    if kind == "cloth":
        raw = doc.get("cloth", {})
        out = dict(_CLOTH_DEFAULTS)
        for key in raw:
            if key not in out:
                _fail(f"{path}.cloth", f"unknown field {key!r}")
        out.update({k: raw[k] for k in raw})
        out["rows"] = int(out["rows"])
        out["cols"] = int(out["cols"])
        if out["rows"] < 2 or out["cols"] < 2:
            _fail(f"{path}.cloth", "grid needs at least 2x2 particles")
        return out
    if kind == "softbody":
        raw = doc.get("softbody", {})
        out = dict(_SOFTBODY_DEFAULTS)
        for key in raw:
            if key not in out:
                _fail(f"{path}.softbody", f"unknown field {key!r}")
        out.update({k: raw[k] for k in raw})
        out["counts"] = [int(c) for c in _vec(out["counts"], f"{path}.softbody.counts")]
        out["size"] = list(_vec(out["size"], f"{path}.softbody.size"))
        return out
    # articulated: named bodies plus joints connecting them
    bodies = _need(doc, "bodies", path)
    joints = doc.get("joints", [])
    if not isinstance(bodies, list) or not bodies:
        _fail(f"{path}.bodies", "expected a non-empty list")
    body_names = set()
    parsed_bodies = []
    for bi, b in enumerate(bodies):
        bpath = f"{path}.bodies[{bi}]"
        name = _need(b, "name", bpath)
        if name in body_names:
            _fail(f"{bpath}.name", f"duplicate body name {name!r}")
        body_names.add(name)
        parsed = {
            "name": name,
            "shape": _parse_shape(_need(b, "shape", bpath), f"{bpath}.shape"),
            "position": list(_vec(_need(b, "position", bpath), f"{bpath}.position")),
            "orientation": list(_vec(b.get("orientation", [1.0, 0.0, 0.0, 0.0]),
                                     f"{bpath}.orientation", 4)),
            "mass": float(b.get("mass", 1.0)),
            "kinematic": bool(b.get("kinematic", False)),
            "collision_group": int(b.get("collision_group", 0)),
            "particle_collision": bool(b.get("particle_collision", True)),
        }
        if "inertia" in b:
            # explicit body-frame inertia overrides the shape-derived value
            # (used to stiffen small connector links in articulated chains)
            parsed["inertia"] = list(_vec(b["inertia"], f"{bpath}.inertia"))
            if any(c < 0 for c in parsed["inertia"]):
                _fail(f"{bpath}.inertia", "components must be >= 0")
        parsed_bodies.append(parsed)
    parsed_joints = []
    for ji, j in enumerate(joints):
        jpath = f"{path}.joints[{ji}]"
        kind_j = _need(j, "kind", jpath)
        if kind_j not in ("hinge", "prismatic"):
            _fail(f"{jpath}.kind", f"unknown joint kind {kind_j!r}")
        parent = _need(j, "parent", jpath)
        child = _need(j, "child", jpath)
        for who, nm in (("parent", parent), ("child", child)):
            if nm not in body_names:
                _fail(f"{jpath}.{who}", f"references unknown body {nm!r}")
        entry = {
            "kind": kind_j,
            "parent": parent,
            "child": child,
            "anchor": list(_vec(_need(j, "anchor", jpath), f"{jpath}.anchor")),
            "axis": list(_vec(_need(j, "axis", jpath), f"{jpath}.axis")),
            "limits": list(_vec(j.get("limits", [-math.pi, math.pi]),
                                f"{jpath}.limits", 2)),
        }
        if "drive" in j:
            d = j["drive"]
            entry["drive"] = {"kp": float(_need(d, "kp", f"{jpath}.drive")),
                              "kd": float(_need(d, "kd", f"{jpath}.drive")),
                              "target": float(d.get("target", 0.0))}
        parsed_joints.append(entry)
    return {"bodies": parsed_bodies, "joints": parsed_joints}


def parse_scene_config(document: str) -> SceneConfig:
    """Parse and validate a scene-config document (JSON text).

    Defaults are filled into the returned config, so serializing it again
    produces a complete document.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as e:
        raise SceneConfigError(
            f"malformed document at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from None
    if not isinstance(doc, dict):
        _fail("$", "top level must be an object")
    version = _need(doc, "schema_version", "$")
    if version != SCHEMA_VERSION:
        _fail("$.schema_version", f"unsupported version {version!r}")
    seed = _need(doc, "seed", "$")
    if not isinstance(seed, int) or isinstance(seed, bool):
        _fail("$.seed", "expected an integer")
    bounds = _need(doc, "workspace_bounds", "$")
    lo = _vec(_need(bounds, "min", "$.workspace_bounds"), "$.workspace_bounds.min")
    hi = _vec(_need(bounds, "max", "$.workspace_bounds"), "$.workspace_bounds.max")
    if any(h <= l for l, h in zip(lo, hi)):
        _fail("$.workspace_bounds", "max must exceed min on every axis")

    objects_doc = _need(doc, "objects", "$")
    if not isinstance(objects_doc, list):
        _fail("$.objects", "expected a list")
    names = set()
    objects = []
    for i, entry in enumerate(objects_doc):
        path = f"$.objects[{i}]"
        if not isinstance(entry, dict):
            _fail(path, "expected an object")
        name = _need(entry, "name", path)
        if not isinstance(name, str) or not name:
            _fail(f"{path}.name", "expected a non-empty string")
        if name in names:
            _fail(f"{path}.name", f"duplicate object name {name!r}")
        names.add(name)
        kind = _need(entry, "kind", path)
        if kind not in KINDS:
            _fail(f"{path}.kind", f"unknown kind {kind!r}; expected one of {KINDS}")
        placement = _parse_placement(_need(entry, "placement", path),
                                     f"{path}.placement")
        params = _parse_params(kind, entry, path)
        attributes = entry.get("attributes", {})
        if not isinstance(attributes, dict):
            _fail(f"{path}.attributes", "expected an object")
        attributes = dict(attributes)
        if kind == "rigid":
            shape_type = params["shape"]["type"]
            attributes.setdefault("mass", 0.0 if shape_type == "plane" else 1.0)
            attributes.setdefault("friction", 0.5)
            attributes.setdefault("restitution", 0.0)
        objects.append(ObjectSpec(name, kind, params, placement, attributes))

    task = doc.get("task")
    if task is not None and not isinstance(task, dict):
        _fail("$.task", "expected an object")
    return SceneConfig(objects=objects, workspace_min=lo, workspace_max=hi,
                       seed=seed, task=task)


def serialize_scene_config(config: SceneConfig) -> str:
    """Render a config back to canonical document text (stable key order)."""
    objects = []
    for spec in config.objects:
        entry: dict = {"name": spec.name, "kind": spec.kind}
        entry.update(
            {"shape": spec.params["shape"]} if spec.kind == "rigid" else
            {"cloth": spec.params} if spec.kind == "cloth" else
            {"softbody": spec.params} if spec.kind == "softbody" else
            {"bodies": spec.params["bodies"], "joints": spec.params["joints"]})
        if isinstance(spec.placement, ExplicitPlacement):
            entry["placement"] = {"explicit": {
                "position": list(spec.placement.position),
                "orientation_quat": list(spec.placement.orientation)}}
        else:
            entry["placement"] = {"sampled": {
                "region": {"min": list(spec.placement.region_min),
                           "max": list(spec.placement.region_max)},
                "fixed_or_falling": "falling" if spec.placement.falling else "fixed"}}
        entry["attributes"] = spec.attributes
        objects.append(entry)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": config.seed,
        "workspace_bounds": {"min": list(config.workspace_min),
                             "max": list(config.workspace_max)},
        "objects": objects,
    }
    if config.task is not None:
        doc["task"] = config.task
    return json.dumps(doc, sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# instantiation


@dataclass
class Scene:
    """A live world: rigid bodies, particle systems, and the name registry."""

    world: RigidWorld
    particles: dict[str, ParticleSystem] = field(default_factory=dict)
    registry: dict[str, dict] = field(default_factory=dict)
    clock: SimClock = field(default_factory=SimClock)
    attributes: dict[str, dict] = field(default_factory=dict)

    def handle(self, name: str) -> dict:
        try:
            return self.registry[name]
        except KeyError:
            raise NotFound(f"no object named {name!r}") from None

    def remove_object(self, name: str) -> None:
        """Drop an object and its registry entry atomically."""
        entry = self.handle(name)
        if entry["kind"] in ("rigid", "articulated"):
            for bid in entry["bodies"].values():
                self.world.remove_body(bid)
        else:
            del self.particles[name]
        del self.registry[name]
        del self.attributes[name]

    def step(self, dt: float, pbd_iterations: int = 10) -> None:
        """Advance rigid bodies and every particle system by dt."""
        self.world.step(dt)
        for ps in self.particles.values():
            pbd_step(ps, self.world.gravity, dt, pbd_iterations,
                     colliders=self.world)
        self.clock.time += dt


def _shape_aabb_half(shape_doc: dict, orientation) -> np.ndarray:
    """Half-extents of the world AABB of a shape at the given orientation."""
    kind = shape_doc["type"]
    if kind == "sphere":
        return np.full(3, shape_doc["radius"])
    if kind == "capsule":
        axis = quat_rotate(np.asarray(orientation, dtype=float),
                           vec3(0.0, 0.0, 1.0))
        return np.abs(axis) * shape_doc["half_height"] + shape_doc["radius"]
    if kind == "box":
        rot = quat_to_matrix(np.asarray(orientation, dtype=float))
        return np.abs(rot) @ np.asarray(shape_doc["half_extents"])
    return None  # planes are unbounded; they never participate in sampling


def _spec_aabb(spec: ObjectSpec, position, orientation):
    """World AABB (lo, hi) of an object candidate, or None if unbounded."""
    pos = np.asarray(position, dtype=float)
    if spec.kind == "rigid":
        half = _shape_aabb_half(spec.params["shape"], orientation)
        if half is None:
            return None
        return pos - half, pos + half
    if spec.kind == "cloth":
        p = spec.params
        spacing = p["size"] / (p["cols"] - 1)
        half = np.array([p["size"] / 2.0, spacing * (p["rows"] - 1) / 2.0, 0.01])
        # yaw can rotate the sheet; use the circumscribed square
        m = float(max(half[0], half[1]))
        return pos - (m, m, half[2]), pos + (m, m, half[2])
    if spec.kind == "softbody":
        half = np.asarray(spec.params["size"], dtype=float) / 2.0
        m = float(np.max(half[:2]))
        return pos - (m, m, half[2]), pos + (m, m, half[2])
    lo = np.full(3, np.inf)
    hi = np.full(3, -np.inf)
    rot = quat_to_matrix(np.asarray(orientation, dtype=float))
    for b in spec.params["bodies"]:
        half = _shape_aabb_half(b["shape"], b["orientation"])
        if half is None:
            continue
        center = pos + rot @ np.asarray(b["position"])
        lo = np.minimum(lo, center - half)
        hi = np.maximum(hi, center + half)
    if np.any(np.isinf(lo)):
        return None
    return lo, hi


def _aabbs_overlap(a, b) -> bool:
    return bool(np.all(a[0] <= b[1]) and np.all(b[0] <= a[1]))


def _sample_placement(spec: ObjectSpec, rng: Rng, placed: list):
    """Draw (position, yaw) uniformly in the region, rejecting overlaps."""
    pl = spec.placement
    lo = np.asarray(pl.region_min)
    hi = np.asarray(pl.region_max)
    for _ in range(MAX_PLACEMENT_ATTEMPTS):
        pos = np.array([rng.uniform(lo[k], hi[k]) for k in range(3)])
        yaw = rng.uniform(0.0, 2.0 * math.pi)
        quat = quat_from_axis_angle(vec3(0.0, 0.0, 1.0), yaw)
        aabb = _spec_aabb(spec, pos, quat)
        if aabb is None or not any(_aabbs_overlap(aabb, other)
                                   for other in placed):
            return pos, yaw, quat, aabb
    raise PlacementError(
        f"could not place {spec.name!r} without overlap after "
        f"{MAX_PLACEMENT_ATTEMPTS} attempts")


def _instantiate_rigid(scene, spec, position, orientation, static):
    shape = _build_shape(spec.params["shape"])
    attrs = spec.attributes
    mass = 0.0 if static or isinstance(shape, StaticPlane) else float(
        attrs.get("mass", 1.0))
    bid = scene.world.add_body(
        shape, position=position, orientation=orientation, mass=mass,
        material=Material(friction=float(attrs.get("friction", 0.5)),
                          restitution=float(attrs.get("restitution", 0.0))),
        collision_group=int(attrs.get("collision_group", 0)))
    if not attrs.get("particle_collision", True):
        scene.world.body(bid).particle_collision = False
    return {"kind": "rigid", "bodies": {spec.name: bid}, "root": bid}


def _instantiate_articulated(scene, spec, position, orientation):
    rot = quat_to_matrix(np.asarray(orientation, dtype=float))
    pos = np.asarray(position, dtype=float)
    ids: dict[str, int] = {}
    for b in spec.params["bodies"]:
        world_pos = pos + rot @ np.asarray(b["position"])
        world_quat = quat_mul(np.asarray(orientation, dtype=float),
                              np.asarray(b["orientation"], dtype=float))
        ids[b["name"]] = scene.world.add_body(
            _build_shape(b["shape"]), position=world_pos,
            orientation=world_quat, mass=b["mass"],
            inertia_diag=b.get("inertia"),
            material=Material(
                friction=float(spec.attributes.get("friction", 0.5)),
                restitution=float(spec.attributes.get("restitution", 0.0))),
            kinematic=b["kinematic"], collision_group=b["collision_group"])
        if not b["particle_collision"]:
            scene.world.body(ids[b["name"]]).particle_collision = False
    joint_ids = []
    for j in spec.params["joints"]:
        drive = None
        if "drive" in j:
            drive = Drive(target=j["drive"]["target"], kp=j["drive"]["kp"],
                          kd=j["drive"]["kd"])
        joint_ids.append(scene.world.add_joint(
            j["kind"], ids[j["parent"]], ids[j["child"]],
            anchor=pos + rot @ np.asarray(j["anchor"]),
            axis=rot @ np.asarray(j["axis"]),
            limits=tuple(j["limits"]), drive=drive))
    root = ids[spec.params["bodies"][0]["name"]]
    return {"kind": "articulated", "bodies": ids, "joints": joint_ids,
            "root": root}


def _instantiate_deformable(scene, spec, position, yaw, static):
    center = np.asarray(position, dtype=float)
    if spec.kind == "cloth":
        p = spec.params
        ps, cloth_spec = build_cloth(
            rows=p["rows"], cols=p["cols"], size=p["size"],
            total_mass=p["total_mass"], center=center,
            bend_stiffness=p["bend_stiffness"])
        meta = {"cloth_spec": cloth_spec}
    else:
        p = spec.params
        nx, ny, nz = p["counts"]
        ps = build_sponge(nx=nx, ny=ny, nz=nz, size=tuple(p["size"]),
                          total_mass=p["total_mass"], center=center,
                          edge_stiffness=p["edge_stiffness"],
                          match_stiffness=p["match_stiffness"])
        meta = {}
    if yaw is not None and yaw != 0.0:
        c, s = math.cos(yaw), math.sin(yaw)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        ps.positions = (ps.positions - center) @ rot.T + center
        ps.predicted_positions = ps.positions.copy()
        if ps.rest_shape is not None:
            rest_c = ps.rest_shape.mean(axis=0)
            ps.rest_shape = (ps.rest_shape - rest_c) @ rot.T + rest_c
    if static:
        ps.inverse_masses[:] = 0.0
    scene.particles[spec.name] = ps
    return {"kind": spec.kind, **meta}


def instantiate(config: SceneConfig) -> Scene:
    """Build a live Scene from a validated config.

    Deterministic: placements are drawn from a generator seeded by
    config.seed, so equal configs yield equal worlds.
    """
    rng = Rng(config.seed)
    scene = Scene(world=RigidWorld())
    placed: list = []
    for spec in config.objects:
        if isinstance(spec.placement, ExplicitPlacement):
            position = np.asarray(spec.placement.position, dtype=float)
            orientation = np.asarray(spec.placement.orientation, dtype=float)
            yaw = None
            falling = False
            aabb = _spec_aabb(spec, position, orientation)
        else:
            position, yaw, orientation, aabb = _sample_placement(spec, rng, placed)
            falling = spec.placement.falling
        if aabb is not None:
            placed.append(aabb)
        static = (isinstance(spec.placement, SampledPlacement)
                  and not spec.placement.falling)
        spawn = position + (0.0, 0.0, FALL_HEIGHT) if falling else position

        if spec.kind == "rigid":
            entry = _instantiate_rigid(scene, spec, spawn, orientation, static)
        elif spec.kind == "articulated":
            entry = _instantiate_articulated(scene, spec, spawn, orientation)
        else:
            entry = _instantiate_deformable(scene, spec, spawn, yaw, static)
        scene.registry[spec.name] = entry
        scene.attributes[spec.name] = dict(spec.attributes)
    return scene


# ---------------------------------------------------------------------------
# queries


def query_object(scene: Scene, name: str) -> ObjectState:
    """Unified state snapshot by object name.

    Rigid and articulated objects report their (root) body pose and
    accumulated contact force; deformables report the particle centroid
    with an identity orientation and mean velocities.
    """
    entry = scene.handle(name)
    attrs = dict(scene.attributes[name])
    if entry["kind"] in ("rigid", "articulated"):
        body = scene.world.body(entry["root"])
        return ObjectState(
            name=name, kind=entry["kind"],
            position=body.position.copy(),
            orientation=body.orientation.copy(),
            linear_velocity=body.linear_velocity.copy(),
            angular_velocity=body.angular_velocity.copy(),
            contact_force=body.accumulated_contact_force.copy(),
            attributes=attrs)
    ps = scene.particles[name]
    return ObjectState(
        name=name, kind=entry["kind"],
        position=ps.positions.mean(axis=0),
        orientation=np.array([1.0, 0.0, 0.0, 0.0]),
        linear_velocity=ps.velocities.mean(axis=0),
        angular_velocity=vec3(),
        contact_force=vec3(),
        attributes=attrs)
