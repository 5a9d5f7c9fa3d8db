"""Impulse-based rigid and articulated body simulation.

Bodies live in maximal coordinates. Each step runs: contact detection,
PD joint drives, semi-implicit velocity integration, interleaved
sequential-impulse velocity iterations for joints and contacts, position
integration, and a position-correction pass. Position errors are removed
by moving poses directly (Baumgarte-factored projection), so contact
stabilization injects no kinetic energy.

Supported contact pairs: sphere-plane, sphere-sphere, sphere-box,
sphere-capsule, box-plane, capsule-plane, capsule-box. Anything else
(box-box, capsule-capsule) raises UnsupportedShapePair.

Mass 0 marks a static body; `kinematic=True` marks a body the solver
treats as unmovable by impulses but whose pose still integrates from its
externally set velocity. An inertia_diag component of 0 locks rotation
about that body axis.

Two solver paths share these formulas: the constraint classes below are
the readable reference, and `_solver_kernels` is the same math compiled
with numba over packed arrays (the default; see SolverParams.compiled).
Articulated figures are roughly two orders of magnitude cheaper on the
compiled path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._solver_kernels import rigid_step
from .errors import NotFound, SimulationDiverged, UnsupportedShapePair
from .vecmath import (
    Quat,
    QUAT_IDENTITY,
    Vec3,
    integrate_orientation,
    norm,
    orthonormal_tangents,
    quat_conjugate,
    quat_from_axis_angle,
    quat_mul,
    quat_normalize,
    quat_rotate,
    quat_to_matrix,
    vec3,
)

# ---------------------------------------------------------------------------
# shapes


@dataclass(frozen=True)
class Sphere:
    radius: float


@dataclass(frozen=True)
class Box:
    half_extents: tuple[float, float, float]


@dataclass(frozen=True)
class Capsule:
    """Segment along the body-local z axis, from -half_height to +half_height."""

    radius: float
    half_height: float


@dataclass(frozen=True)
class StaticPlane:
    """Half-space boundary dot(normal, x) = offset, in the body frame."""

    normal: tuple[float, float, float]
    offset: float


Shape = Sphere | Box | Capsule | StaticPlane


def validate_shape(shape: Shape) -> None:
    if isinstance(shape, Sphere):
        if shape.radius <= 0:
            raise ValueError("sphere radius must be positive")
    elif isinstance(shape, Box):
        if len(shape.half_extents) != 3 or any(h <= 0 for h in shape.half_extents):
            raise ValueError("box half extents must be positive")
    elif isinstance(shape, Capsule):
        if shape.radius <= 0 or shape.half_height <= 0:
            raise ValueError("capsule dimensions must be positive")
    elif isinstance(shape, StaticPlane):
        n = np.asarray(shape.normal, dtype=float)
        if abs(norm(n) - 1.0) > 1e-9:
            raise ValueError("plane normal must be unit length")
    else:
        raise ValueError(f"unknown shape {shape!r}")


def shape_inertia_diag(shape: Shape, mass: float) -> Vec3:
    """Body-frame diagonal inertia for a solid shape of the given mass."""
    if isinstance(shape, Sphere):
        i = 0.4 * mass * shape.radius ** 2
        return vec3(i, i, i)
    if isinstance(shape, Box):
        hx, hy, hz = shape.half_extents
        return vec3(
            mass / 3.0 * (hy * hy + hz * hz),
            mass / 3.0 * (hx * hx + hz * hz),
            mass / 3.0 * (hx * hx + hy * hy),
        )
    if isinstance(shape, Capsule):
        # cylinder approximation with end-cap mass folded in
        r, h = shape.radius, 2.0 * shape.half_height
        i_axis = 0.5 * mass * r * r
        i_side = mass * (3.0 * r * r + h * h) / 12.0 + 0.25 * mass * r * r
        return vec3(i_side, i_side, i_axis)
    return vec3(0.0, 0.0, 0.0)


# ---------------------------------------------------------------------------
# bodies and joints


@dataclass
class Material:
    friction: float = 0.5
    restitution: float = 0.0


@dataclass
class RigidBody:
    id: int
    shape: Shape
    position: Vec3
    orientation: Quat
    linear_velocity: Vec3
    angular_velocity: Vec3
    mass: float
    inertia_diag: Vec3
    material: Material
    kinematic: bool = False
    collision_group: int = 0
    particle_collision: bool = True  # whether cloth/soft-body particles see it
    accumulated_contact_force: Vec3 = field(default_factory=vec3)

    @property
    def static(self) -> bool:
        return self.mass == 0.0

    @property
    def responsive(self) -> bool:
        """True when impulses can move this body."""
        return self.mass > 0.0 and not self.kinematic

    @property
    def inv_mass(self) -> float:
        return 1.0 / self.mass if self.responsive else 0.0

    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.orientation)

    def inv_inertia_world(self) -> np.ndarray:
        if not self.responsive:
            return np.zeros((3, 3))
        inv_diag = np.array([1.0 / c if c > 0.0 else 0.0 for c in self.inertia_diag])
        r = self.rotation()
        return (r * inv_diag) @ r.T

    def velocity_at(self, point: Vec3) -> Vec3:
        return self.linear_velocity + np.cross(self.angular_velocity, point - self.position)


@dataclass(frozen=True)
class Contact:
    body_a: int
    body_b: int
    point: Vec3
    normal: Vec3  # unit, from a to b
    penetration: float
    # which geometric feature of the pair produced this point (capsule
    # endpoint, box corner, ...); (body_a, body_b, feature) identifies the
    # same touching spot across steps so its impulse can be carried over
    feature: int = 0


@dataclass
class Drive:
    target: float = 0.0
    kp: float = 0.0
    kd: float = 0.0


@dataclass
class Joint:
    """Hinge or prismatic joint, anchored and axis-aligned in world space at
    construction; anchors/axes are stored in each body's local frame."""

    id: int
    kind: str  # "hinge" | "prismatic"
    body_a: int
    body_b: int
    local_anchor_a: Vec3
    local_anchor_b: Vec3
    local_axis_a: Vec3
    local_axis_b: Vec3
    local_ref_a: Vec3   # hinge angle reference, perpendicular to axis
    local_ref_b: Vec3
    rel_orientation0: Quat  # conj(qa) * qb at construction (prismatic lock)
    limits: tuple[float, float]
    drive: Drive


# ---------------------------------------------------------------------------
# narrowphase


def _plane_world(body: RigidBody) -> tuple[Vec3, float]:
    shape = body.shape
    n = quat_rotate(body.orientation, np.asarray(shape.normal, dtype=float))
    off = shape.offset + float(np.dot(n, body.position))
    return n, off


def _capsule_segment(body: RigidBody) -> tuple[Vec3, Vec3]:
    axis = quat_rotate(body.orientation, vec3(0.0, 0.0, 1.0))
    h = body.shape.half_height
    return body.position - axis * h, body.position + axis * h


def _sphere_plane(sphere: RigidBody, plane: RigidBody):
    n, off = _plane_world(plane)
    dist = float(np.dot(n, sphere.position)) - off
    pen = sphere.shape.radius - dist
    if pen <= 0.0:
        return []
    point = sphere.position - n * (sphere.shape.radius - 0.5 * pen)
    return [(point, n, pen, 0)]  # normal: plane -> sphere


def _sphere_sphere(a: RigidBody, b: RigidBody):
    d = b.position - a.position
    dist = norm(d)
    pen = a.shape.radius + b.shape.radius - dist
    if pen <= 0.0:
        return []
    n = d / dist if dist > 1e-9 else vec3(0.0, 0.0, 1.0)
    point = a.position + n * (a.shape.radius - 0.5 * pen)
    return [(point, n, pen, 0)]  # normal: a -> b


def _point_box_local(q: np.ndarray, he: np.ndarray):
    """Surface point, outward local normal, and signed distance for a local
    point vs a box (negative distance = inside)."""
    clamped = np.clip(q, -he, he)
    delta = q - clamped
    dist = norm(delta)
    if dist > 1e-12:
        return clamped, delta / dist, dist
    gaps = he - np.abs(q)
    k = int(np.argmin(gaps))
    n = np.zeros(3)
    n[k] = 1.0 if q[k] >= 0.0 else -1.0
    surface = q.copy()
    surface[k] = he[k] * n[k]
    return surface, n, -float(gaps[k])


def _sphere_box(sphere: RigidBody, box: RigidBody):
    he = np.asarray(box.shape.half_extents, dtype=float)
    r_box = box.rotation()
    q = r_box.T @ (sphere.position - box.position)
    surface, n_local, dist = _point_box_local(q, he)
    pen = sphere.shape.radius - dist
    if pen <= 0.0:
        return []
    n = r_box @ n_local  # box -> sphere
    point = box.position + r_box @ surface
    return [(point, n, pen, 0)]


def _sphere_capsule(sphere: RigidBody, capsule: RigidBody):
    e1, e2 = _capsule_segment(capsule)
    d = e2 - e1
    dd = float(np.dot(d, d))
    t = float(np.clip(np.dot(sphere.position - e1, d) / dd, 0.0, 1.0)) if dd > 1e-12 else 0.0
    closest = e1 + d * t
    delta = sphere.position - closest
    dist = norm(delta)
    pen = sphere.shape.radius + capsule.shape.radius - dist
    if pen <= 0.0:
        return []
    n = delta / dist if dist > 1e-9 else vec3(0.0, 0.0, 1.0)  # capsule -> sphere
    point = closest + n * (capsule.shape.radius - 0.5 * pen)
    return [(point, n, pen, 0)]


def _box_plane(box: RigidBody, plane: RigidBody):
    n, off = _plane_world(plane)
    he = box.shape.half_extents
    r = box.rotation()
    out = []
    corner = 0
    for sx in (-1.0, 1.0):
        for sy in (-1.0, 1.0):
            for sz in (-1.0, 1.0):
                v = box.position + r @ np.array([sx * he[0], sy * he[1], sz * he[2]])
                pen = off - float(np.dot(n, v))
                if pen > 0.0:
                    out.append((v, n, pen, corner))  # normal: plane -> box
                corner += 1
    return out


def _capsule_plane(capsule: RigidBody, plane: RigidBody):
    n, off = _plane_world(plane)
    r = capsule.shape.radius
    out = []
    for fi, end in enumerate(_capsule_segment(capsule)):
        dist = float(np.dot(n, end)) - off
        pen = r - dist
        if pen > 0.0:
            out.append((end - n * (r - 0.5 * pen), n, pen, fi))  # plane -> capsule
    return out


def _capsule_box(capsule: RigidBody, box: RigidBody):
    """Capsule segment vs box: endpoint candidates plus a clamped-projection
    fixed-point iterate, merged when parameters nearly coincide. A capsule
    lying parallel to a face yields two endpoint contacts."""
    e1, e2 = _capsule_segment(capsule)
    d = e2 - e1
    dd = float(np.dot(d, d))
    he = np.asarray(box.shape.half_extents, dtype=float)
    r_box = box.rotation()

    def box_closest(p):
        q = r_box.T @ (p - box.position)
        surface, n_local, dist = _point_box_local(q, he)
        return box.position + r_box @ surface, r_box @ n_local, dist

    t_star = 0.5
    if dd > 1e-12:
        for _ in range(8):
            c, _, _ = box_closest(e1 + d * t_star)
            t_star = float(np.clip(np.dot(c - e1, d) / dd, 0.0, 1.0))

    out = []
    kept: list[float] = []
    normals = []
    for fi, t in enumerate((0.0, 1.0, t_star)):
        if any(abs(t - k) < 0.25 for k in kept):
            continue
        if t == t_star and len(out) == 2 and norm(normals[0] - normals[1]) < 1e-6:
            continue  # parallel to a face: both ends already carry the manifold
        p = e1 + d * t
        surface, n_world, dist = box_closest(p)
        pen = capsule.shape.radius - dist
        if pen <= 0.0:
            continue
        kept.append(t)
        normals.append(n_world)
        out.append((surface, -n_world, pen, fi))  # capsule -> box
    return out


# dispatch keyed by the shape classes of the (lower id, higher id) pair;
# every routine's result is normalized to "normal points a -> b"
def _flipped(rows):
    return [(p, -n, pen, f) for p, n, pen, f in rows]


_DISPATCH = {
    (Sphere, StaticPlane): lambda a, b: _flipped(_sphere_plane(a, b)),
    (StaticPlane, Sphere): lambda a, b: _sphere_plane(b, a),
    (Sphere, Sphere): _sphere_sphere,
    (Sphere, Box): lambda a, b: _flipped(_sphere_box(a, b)),
    (Box, Sphere): lambda a, b: _sphere_box(b, a),
    (Sphere, Capsule): lambda a, b: _flipped(_sphere_capsule(a, b)),
    (Capsule, Sphere): lambda a, b: _sphere_capsule(b, a),
    (Box, StaticPlane): lambda a, b: _flipped(_box_plane(a, b)),
    (StaticPlane, Box): lambda a, b: _box_plane(b, a),
    (Capsule, StaticPlane): lambda a, b: _flipped(_capsule_plane(a, b)),
    (StaticPlane, Capsule): lambda a, b: _capsule_plane(b, a),
    (Capsule, Box): _capsule_box,
    (Box, Capsule): lambda a, b: _flipped(_capsule_box(b, a)),
}


def _shape_aabb(body: RigidBody):
    s = body.shape
    if isinstance(s, Sphere):
        r = np.full(3, s.radius)
        return body.position - r, body.position + r
    if isinstance(s, Box):
        ext = np.abs(body.rotation()) @ np.asarray(s.half_extents)
        return body.position - ext, body.position + ext
    if isinstance(s, Capsule):
        e1, e2 = _capsule_segment(body)
        r = np.full(3, s.radius)
        return np.minimum(e1, e2) - r, np.maximum(e1, e2) + r
    return None  # plane: unbounded


def _aabb_overlap(a: RigidBody, b: RigidBody) -> bool:
    ba, bb = _shape_aabb(a), _shape_aabb(b)
    if ba is None or bb is None:
        return True
    return bool(np.all(ba[0] <= bb[1]) and np.all(bb[0] <= ba[1]))


_TYPE_CODE = {Sphere: 0, Box: 1, Capsule: 2, StaticPlane: 3}
_PAIR_SUPPORTED = np.zeros((4, 4), dtype=bool)
for _ta, _tb in _DISPATCH:
    _PAIR_SUPPORTED[_TYPE_CODE[_ta], _TYPE_CODE[_tb]] = True


def detect_contacts(world: "RigidWorld") -> list[Contact]:
    """All contacts between collidable body pairs, ordered by (id_a, id_b).

    Static/kinematic-only pairs and pairs sharing a nonzero collision group
    are skipped. An overlapping pair with no narrowphase routine raises
    UnsupportedShapePair; separated unsupported pairs are tolerated.

    Pair culling runs on per-body bounds computed once per call: the
    narrowphase is linear in the handful of touching pairs, so the n^2
    part must not recompute bounds (or anything else) per pair.
    """
    bodies = world.bodies_sorted()
    contacts: list[Contact] = []
    n = len(bodies)
    if n < 2:
        return contacts
    lo = np.empty((n, 3))
    hi = np.empty((n, 3))
    resp = np.empty(n, dtype=bool)
    grp = np.empty(n, dtype=np.int64)
    code = np.empty(n, dtype=np.intp)
    for k, body in enumerate(bodies):
        bb = _shape_aabb(body)
        if bb is None:  # planes are unbounded: they overlap everything
            lo[k], hi[k] = -np.inf, np.inf
        else:
            lo[k], hi[k] = bb
        resp[k] = body.responsive
        grp[k] = body.collision_group
        code[k] = _TYPE_CODE[type(body.shape)]
    live = resp[:, None] | resp[None, :]
    live &= ~((grp[:, None] == grp[None, :]) & (grp[:, None] != 0))
    live &= np.triu(np.ones((n, n), dtype=bool), k=1)
    overlap = np.all(lo[:, None, :] <= hi[None, :, :], axis=2)
    overlap &= overlap.T
    supported = _PAIR_SUPPORTED[code[:, None], code[None, :]]
    bad = live & overlap & ~supported
    if bad.any():
        i, j = np.argwhere(bad)[0]  # row-major: first pair in scan order
        a, b = bodies[i], bodies[j]
        raise UnsupportedShapePair(
            f"no contact routine for {type(a.shape).__name__} vs "
            f"{type(b.shape).__name__} (bodies {a.id}, {b.id})"
        )
    for i, j in np.argwhere(live & overlap & supported):
        a, b = bodies[i], bodies[j]
        fn = _DISPATCH[(type(a.shape), type(b.shape))]
        for point, normal, pen, feature in fn(a, b):
            contacts.append(Contact(a.id, b.id, point, normal, pen, feature))
    return contacts


# ---------------------------------------------------------------------------
# solver


@dataclass
class SolverParams:
    velocity_iterations: int = 10
    joint_iterations: int = 20
    position_iterations: int = 10
    baumgarte: float = 0.2
    slop: float = 1e-3
    restitution_threshold: float = 0.5  # approach speed below which no bounce
    max_correction: float = 0.05        # m of positional fix per iteration
    compiled: bool = True               # numba kernels; False runs the
                                        # object-based reference solver
    alternate_sweeps: bool = True       # flip Gauss-Seidel direction per
                                        # iteration and per step
    warm_starting: bool = True          # carry contact impulses across steps


def _skew(v: Vec3) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def _relative_velocity(a: RigidBody, b: RigidBody, ra: Vec3, rb: Vec3) -> Vec3:
    return (b.linear_velocity + np.cross(b.angular_velocity, rb)
            - a.linear_velocity - np.cross(a.angular_velocity, ra))


def _effective_mass(a, b, ra, rb, d, ia, ib) -> float:
    ra_x_d = np.cross(ra, d)
    rb_x_d = np.cross(rb, d)
    k = a.inv_mass + b.inv_mass
    k += float(np.dot(ra_x_d, ia @ ra_x_d)) + float(np.dot(rb_x_d, ib @ rb_x_d))
    return 1.0 / k if k > 1e-12 else 0.0


def _apply_impulse(a, b, ra, rb, impulse, ia, ib) -> None:
    if a.responsive:
        a.linear_velocity = a.linear_velocity - impulse * a.inv_mass
        a.angular_velocity = a.angular_velocity - ia @ np.cross(ra, impulse)
    if b.responsive:
        b.linear_velocity = b.linear_velocity + impulse * b.inv_mass
        b.angular_velocity = b.angular_velocity + ib @ np.cross(rb, impulse)


def _rotate_body(body: RigidBody, dtheta: Vec3) -> None:
    body.orientation = integrate_orientation(body.orientation, dtheta, 1.0)


def _rotate_body_about(body: RigidBody, point: Vec3, dtheta: Vec3) -> None:
    """Rotate a body in place about an arbitrary world point."""
    ang = norm(dtheta)
    if ang < 1e-15:
        return
    q = quat_from_axis_angle(dtheta / ang, ang)
    body.orientation = quat_normalize(quat_mul(q, body.orientation))
    body.position = point + quat_rotate(q, body.position - point)


class _ContactConstraint:
    __slots__ = ("a", "b", "ra", "rb", "normal", "t1", "t2", "ia", "ib",
                 "mass_n", "mass_t1", "mass_t2", "bias", "friction",
                 "acc_n", "acc_t1", "acc_t2",
                 "local_a", "local_b", "local_n", "initial_pen")

    def __init__(self, world: "RigidWorld", c: Contact, params: SolverParams):
        a = world.body(c.body_a)
        b = world.body(c.body_b)
        self.a, self.b = a, b
        self.ra = c.point - a.position
        self.rb = c.point - b.position
        self.normal = c.normal
        self.t1, self.t2 = orthonormal_tangents(c.normal)
        self.ia = a.inv_inertia_world()
        self.ib = b.inv_inertia_world()
        self.mass_n = _effective_mass(a, b, self.ra, self.rb, c.normal, self.ia, self.ib)
        self.mass_t1 = _effective_mass(a, b, self.ra, self.rb, self.t1, self.ia, self.ib)
        self.mass_t2 = _effective_mass(a, b, self.ra, self.rb, self.t2, self.ia, self.ib)
        self.friction = math.sqrt(a.material.friction * b.material.friction)
        vn = float(np.dot(_relative_velocity(a, b, self.ra, self.rb), c.normal))
        e = max(a.material.restitution, b.material.restitution)
        self.bias = -e * vn if vn < -params.restitution_threshold else 0.0
        self.acc_n = self.acc_t1 = self.acc_t2 = 0.0
        self.local_a = a.rotation().T @ self.ra
        self.local_b = b.rotation().T @ self.rb
        self.local_n = a.rotation().T @ c.normal
        self.initial_pen = c.penetration

    def warm_start(self, acc) -> None:
        """Re-apply last step's accumulated impulse for this touching spot.

        Without the carry-over each step solves the (indeterminate) load
        distribution from scratch, and the sweep-order-dependent increment
        acts as a small steady force on resting bodies."""
        self.acc_n, self.acc_t1, self.acc_t2 = acc
        _apply_impulse(self.a, self.b, self.ra, self.rb,
                       self.total_impulse(), self.ia, self.ib)

    def solve_velocity(self) -> None:
        a, b = self.a, self.b
        vn = float(np.dot(_relative_velocity(a, b, self.ra, self.rb), self.normal))
        lam = -(vn - self.bias) * self.mass_n
        new_acc = max(self.acc_n + lam, 0.0)
        dl = new_acc - self.acc_n
        self.acc_n = new_acc
        _apply_impulse(a, b, self.ra, self.rb, self.normal * dl, self.ia, self.ib)

        max_f = self.friction * self.acc_n
        for t, mass_t, attr in ((self.t1, self.mass_t1, "acc_t1"),
                                (self.t2, self.mass_t2, "acc_t2")):
            vt = float(np.dot(_relative_velocity(a, b, self.ra, self.rb), t))
            lam_t = -vt * mass_t
            acc = getattr(self, attr)
            new_t = min(max(acc + lam_t, -max_f), max_f)
            dl_t = new_t - acc
            setattr(self, attr, new_t)
            _apply_impulse(a, b, self.ra, self.rb, t * dl_t, self.ia, self.ib)

    def solve_position(self, params: SolverParams) -> None:
        a, b = self.a, self.b
        rot_a, rot_b = a.rotation(), b.rotation()
        pa = a.position + rot_a @ self.local_a
        pb = b.position + rot_b @ self.local_b
        n = rot_a @ self.local_n
        # anchors coincided at build; positive drift along n reduces overlap
        pen_now = self.initial_pen - float(np.dot(pb - pa, n))
        c_err = params.baumgarte * (pen_now - params.slop)
        if c_err <= 0.0:
            return
        c_err = min(c_err, params.max_correction)
        ra = pa - a.position
        rb = pb - b.position
        ia = a.inv_inertia_world()
        ib = b.inv_inertia_world()
        mass_n = _effective_mass(a, b, ra, rb, n, ia, ib)
        impulse = n * (c_err * mass_n)
        if a.responsive:
            a.position = a.position - impulse * a.inv_mass
            _rotate_body(a, -(ia @ np.cross(ra, impulse)))
        if b.responsive:
            b.position = b.position + impulse * b.inv_mass
            _rotate_body(b, ib @ np.cross(rb, impulse))

    def total_impulse(self) -> Vec3:
        return self.normal * self.acc_n + self.t1 * self.acc_t1 + self.t2 * self.acc_t2


class _JointConstraint:
    """Velocity and position rows for one hinge or prismatic joint."""

    def __init__(self, world: "RigidWorld", joint: Joint):
        self.j = joint
        self.a = world.body(joint.body_a)
        self.b = world.body(joint.body_b)
        self.acc_limit_lo = 0.0
        self.acc_limit_hi = 0.0
        self.drive_gamma = 0.0
        self.drive_bias = 0.0
        self.drive_mass = 0.0
        self.acc_drive = 0.0
        self.drive_axis: Vec3 | None = None
        self.drive_ra: Vec3 | None = None
        self.drive_rb: Vec3 | None = None

    def prep_drive(self, dt: float) -> None:
        """Stage the PD drive as a soft velocity row: at convergence the step
        impulse approaches kp*(target - q)*dt - kd*qdot*dt, with the softness
        term keeping stiff gains stable."""
        d = self.j.drive
        if d.kp == 0.0 and d.kd == 0.0:
            return
        gamma_raw = dt * (d.kd + dt * d.kp)
        if gamma_raw <= 0.0:
            return
        a, b = self.a, self.b
        ia = a.inv_inertia_world()
        ib = b.inv_inertia_world()
        axis = self._axis_world()
        lo, hi = self.j.limits
        target = min(max(d.target, lo), hi)
        if self.j.kind == "hinge":
            k_inv = float(axis @ (ia + ib) @ axis)
            q = self.hinge_angle()
        else:
            pa, pb = self._anchors()
            self.drive_ra = pa - a.position
            self.drive_rb = pb - b.position
            m_eff = _effective_mass(a, b, self.drive_ra, self.drive_rb, axis, ia, ib)
            k_inv = 1.0 / m_eff if m_eff > 0.0 else 0.0
            q = self.translation()
        self.drive_axis = axis
        self.drive_gamma = 1.0 / gamma_raw
        self.drive_bias = (q - target) * dt * d.kp * self.drive_gamma
        self.drive_mass = 1.0 / (k_inv + self.drive_gamma)

    def _solve_drive(self) -> None:
        if self.drive_axis is None:
            return
        a, b = self.a, self.b
        axis = self.drive_axis
        if self.j.kind == "hinge":
            cdot = float(np.dot(b.angular_velocity - a.angular_velocity, axis))
        else:
            vrel = _relative_velocity(a, b, self.drive_ra, self.drive_rb)
            cdot = float(np.dot(vrel, axis))
        lam = -self.drive_mass * (cdot + self.drive_bias + self.drive_gamma * self.acc_drive)
        self.acc_drive += lam
        if self.j.kind == "hinge":
            self._apply_angular(axis * lam, a.inv_inertia_world(), b.inv_inertia_world())
        else:
            _apply_impulse(a, b, self.drive_ra, self.drive_rb, axis * lam,
                           a.inv_inertia_world(), b.inv_inertia_world())

    # -- shared geometry helpers ------------------------------------------

    def _anchors(self):
        a, b, j = self.a, self.b, self.j
        pa = a.position + quat_rotate(a.orientation, j.local_anchor_a)
        pb = b.position + quat_rotate(b.orientation, j.local_anchor_b)
        return pa, pb

    def _axis_world(self) -> Vec3:
        return quat_rotate(self.a.orientation, self.j.local_axis_a)

    def hinge_angle(self) -> float:
        a, b, j = self.a, self.b, self.j
        axis = self._axis_world()
        ref_a = quat_rotate(a.orientation, j.local_ref_a)
        ref_b = quat_rotate(b.orientation, j.local_ref_b)
        return math.atan2(float(np.dot(np.cross(ref_a, ref_b), axis)),
                          float(np.dot(ref_a, ref_b)))

    def translation(self) -> float:
        pa, pb = self._anchors()
        return float(np.dot(pb - pa, self._axis_world()))

    # -- velocity pass ------------------------------------------------------

    def solve_velocity(self) -> None:
        self._solve_drive()
        if self.j.kind == "hinge":
            self._hinge_velocity()
        else:
            self._prismatic_velocity()

    def _point_block(self, pa, pb):
        a, b = self.a, self.b
        ra = pa - a.position
        rb = pb - b.position
        ia = a.inv_inertia_world()
        ib = b.inv_inertia_world()
        sa, sb = _skew(ra), _skew(rb)
        k = np.eye(3) * (a.inv_mass + b.inv_mass) - sa @ ia @ sa - sb @ ib @ sb
        return ra, rb, ia, ib, k

    def _hinge_velocity(self) -> None:
        a, b = self.a, self.b
        pa, pb = self._anchors()
        ra, rb, ia, ib, k = self._point_block(pa, pb)
        cdot = _relative_velocity(a, b, ra, rb)
        if abs(np.linalg.det(k)) > 1e-12:
            impulse = np.linalg.solve(k, -cdot)
            _apply_impulse(a, b, ra, rb, impulse, ia, ib)

        axis = self._axis_world()
        b1, b2 = orthonormal_tangents(axis)
        isum = ia + ib
        wrel = b.angular_velocity - a.angular_velocity
        k2 = np.array([[float(b1 @ isum @ b1), float(b1 @ isum @ b2)],
                       [float(b2 @ isum @ b1), float(b2 @ isum @ b2)]])
        if abs(np.linalg.det(k2)) > 1e-14:
            lam = np.linalg.solve(k2, -np.array([float(np.dot(wrel, b1)),
                                                 float(np.dot(wrel, b2))]))
            ang = b1 * lam[0] + b2 * lam[1]
            self._apply_angular(ang, ia, ib)

        lo, hi = self.j.limits
        angle = self.hinge_angle()
        k_axis = float(axis @ isum @ axis)
        if k_axis > 1e-12:
            wrel = b.angular_velocity - a.angular_velocity
            cdot_axis = float(np.dot(wrel, axis))
            if angle <= lo:
                lam = -cdot_axis / k_axis
                new_acc = max(self.acc_limit_lo + lam, 0.0)
                dl = new_acc - self.acc_limit_lo
                self.acc_limit_lo = new_acc
                self._apply_angular(axis * dl, ia, ib)
            elif angle >= hi:
                lam = cdot_axis / k_axis
                new_acc = max(self.acc_limit_hi + lam, 0.0)
                dl = new_acc - self.acc_limit_hi
                self.acc_limit_hi = new_acc
                self._apply_angular(axis * (-dl), ia, ib)

    def _prismatic_velocity(self) -> None:
        a, b = self.a, self.b
        ia = a.inv_inertia_world()
        ib = b.inv_inertia_world()
        # lock all relative rotation
        isum = ia + ib
        wrel = b.angular_velocity - a.angular_velocity
        if abs(np.linalg.det(isum)) > 1e-14:
            ang = np.linalg.solve(isum, -wrel)
            self._apply_angular(ang, ia, ib)

        pa, pb = self._anchors()
        axis = self._axis_world()
        p1, p2 = orthonormal_tangents(axis)
        ra = pa - a.position
        rb = pb - b.position
        for d in (p1, p2):
            mass_d = _effective_mass(a, b, ra, rb, d, ia, ib)
            cdot = float(np.dot(_relative_velocity(a, b, ra, rb), d))
            _apply_impulse(a, b, ra, rb, d * (-cdot * mass_d), ia, ib)

        lo, hi = self.j.limits
        q = self.translation()
        mass_axis = _effective_mass(a, b, ra, rb, axis, ia, ib)
        if mass_axis > 0.0:
            qdot = float(np.dot(_relative_velocity(a, b, ra, rb), axis))
            if q <= lo:
                lam = -qdot * mass_axis
                new_acc = max(self.acc_limit_lo + lam, 0.0)
                dl = new_acc - self.acc_limit_lo
                self.acc_limit_lo = new_acc
                _apply_impulse(a, b, ra, rb, axis * dl, ia, ib)
            elif q >= hi:
                lam = qdot * mass_axis
                new_acc = max(self.acc_limit_hi + lam, 0.0)
                dl = new_acc - self.acc_limit_hi
                self.acc_limit_hi = new_acc
                _apply_impulse(a, b, ra, rb, axis * (-dl), ia, ib)

    def _apply_angular(self, impulse: Vec3, ia, ib) -> None:
        a, b = self.a, self.b
        if a.responsive:
            a.angular_velocity = a.angular_velocity - ia @ impulse
        if b.responsive:
            b.angular_velocity = b.angular_velocity + ib @ impulse

    # -- position pass ------------------------------------------------------

    def solve_position(self, params: SolverParams) -> None:
        if self.j.kind == "hinge":
            # pull the anchor points back together in all three directions
            a, b = self.a, self.b
            angle_pre = self.hinge_angle()
            pa, pb = self._anchors()
            ra, rb, ia, ib, k = self._point_block(pa, pb)
            c = pb - pa
            err = norm(c)
            if err > 1e-12 and abs(np.linalg.det(k)) > 1e-12:
                if err > params.max_correction:
                    c = c * (params.max_correction / err)
                impulse = np.linalg.solve(k, -c)
                if a.responsive:
                    a.position = a.position - impulse * a.inv_mass
                    _rotate_body(a, -(ia @ np.cross(ra, impulse)))
                if b.responsive:
                    b.position = b.position + impulse * b.inv_mass
                    _rotate_body(b, ib @ np.cross(rb, impulse))
            self._hinge_position(params, angle_pre)
        else:
            self._prismatic_position(params)

    def _hinge_position(self, params: SolverParams, angle_pre: float) -> None:
        a, b, j = self.a, self.b, self.j
        ia = a.inv_inertia_world()
        ib = b.inv_inertia_world()
        isum = ia + ib
        axis_a = quat_rotate(a.orientation, j.local_axis_a)
        axis_b = quat_rotate(b.orientation, j.local_axis_b)
        # relative rotation by +err turns axis_b toward axis_a:
        # (axis_b x axis_a) x axis_b = axis_a - axis_b cos(theta)
        err = np.cross(axis_b, axis_a)
        if norm(err) > 1e-12 and abs(np.linalg.det(isum)) > 1e-14:
            ang = np.linalg.solve(isum, err)
            if a.responsive:
                _rotate_body(a, -(ia @ ang))
            if b.responsive:
                _rotate_body(b, ib @ ang)

        # Rotation about the hinge axis moves neither the anchors nor the
        # axis alignment, so any change the corrections above made to the
        # joint angle is pure drift in the free coordinate.  Left in, it
        # acts as phantom stiffness: the joint deflects less than the real
        # torque balance says, and the drive then under-delivers through
        # the bodies.  Undo it by counter-rotating each body about its own
        # anchor point, split by angular mobility about the axis.
        axis = self._axis_world()
        k_axis0 = float(axis @ isum @ axis)
        if k_axis0 > 1e-12:
            drift = self.hinge_angle() - angle_pre
            drift = math.atan2(math.sin(drift), math.cos(drift))
            if drift != 0.0:
                pa, pb = self._anchors()
                sa = float(axis @ ia @ axis) / k_axis0
                sb = float(axis @ ib @ axis) / k_axis0
                if a.responsive and sa > 0.0:
                    _rotate_body_about(a, pa, axis * (drift * sa))
                if b.responsive and sb > 0.0:
                    _rotate_body_about(b, pb, axis * (-drift * sb))

        lo, hi = j.limits
        angle = self.hinge_angle()
        axis = self._axis_world()
        k_axis = float(axis @ isum @ axis)
        if k_axis <= 1e-12:
            return
        violation = 0.0
        if angle < lo:
            violation = lo - angle  # rotate b forward about axis
        elif angle > hi:
            violation = hi - angle
        if violation != 0.0:
            step = max(min(violation, 0.2), -0.2)
            ang = axis * (step / k_axis)
            if a.responsive:
                _rotate_body(a, -(ia @ ang))
            if b.responsive:
                _rotate_body(b, ib @ ang)

    def _prismatic_position(self, params: SolverParams) -> None:
        a, b, j = self.a, self.b, self.j
        ia = a.inv_inertia_world()
        ib = b.inv_inertia_world()
        isum = ia + ib
        # restore the construction-time relative orientation
        q_target = quat_mul(a.orientation, j.rel_orientation0)
        dq = quat_mul(b.orientation, quat_conjugate(q_target))
        if dq[0] < 0.0:
            dq = -dq
        rot_err = 2.0 * dq[1:]
        if norm(rot_err) > 1e-12 and abs(np.linalg.det(isum)) > 1e-14:
            ang = np.linalg.solve(isum, -rot_err)
            if a.responsive:
                _rotate_body(a, -(ia @ ang))
            if b.responsive:
                _rotate_body(b, ib @ ang)

        pa, pb = self._anchors()
        axis = self._axis_world()
        p1, p2 = orthonormal_tangents(axis)
        sep = pb - pa
        perp = p1 * float(np.dot(sep, p1)) + p2 * float(np.dot(sep, p2))

        lo, hi = j.limits
        q = float(np.dot(sep, axis))
        along = 0.0
        if q < lo:
            along = q - lo
        elif q > hi:
            along = q - hi
        c = perp + axis * along
        err = norm(c)
        if err <= 1e-12:
            return
        ra = pa - a.position
        rb = pb - b.position
        sa, sb = _skew(ra), _skew(rb)
        k = np.eye(3) * (a.inv_mass + b.inv_mass) - sa @ ia @ sa - sb @ ib @ sb
        if abs(np.linalg.det(k)) <= 1e-12:
            return
        if err > params.max_correction:
            c = c * (params.max_correction / err)
        impulse = np.linalg.solve(k, -c)
        if a.responsive:
            a.position = a.position - impulse * a.inv_mass
            _rotate_body(a, -(ia @ np.cross(ra, impulse)))
        if b.responsive:
            b.position = b.position + impulse * b.inv_mass
            _rotate_body(b, ib @ np.cross(rb, impulse))


def _stack3(vectors: list) -> np.ndarray:
    return np.stack(vectors).astype(float) if vectors else np.zeros((0, 3))


# ---------------------------------------------------------------------------
# world


class RigidWorld:
    """Container and stepping context for one simulation island.

    Single-threaded by contract: one owner steps and queries a world.
    Bodies iterate in id order everywhere, so identical call sequences
    reproduce bit-identical states.
    """

    def __init__(self, gravity=(0.0, 0.0, -9.81), params: SolverParams | None = None):
        self.gravity = np.asarray(gravity, dtype=float)
        self.params = params or SolverParams()
        self.bodies: dict[int, RigidBody] = {}
        self.joints: dict[int, Joint] = {}
        self.last_contacts: list[Contact] = []
        self.time = 0.0
        self._next_body_id = 0
        self._next_joint_id = 0
        # packed-array mirror for the compiled solver; rebuilt when the
        # body/joint structure changes (masses, shapes, materials and joint
        # geometry are fixed once added — only poses, velocities and drive
        # parameters vary between steps)
        self._structure_rev = 0
        self._packed: dict | None = None
        self._sweep_parity = 0
        # (body_a, body_b, feature) -> accumulated (normal, t1, t2) impulse
        self._contact_warm: dict = {}

    # -- construction -------------------------------------------------------

    def add_body(self, shape: Shape, position, orientation=None, mass: float = 1.0,
                 inertia_diag=None, material: Material | None = None,
                 velocity=None, angular_velocity=None, kinematic: bool = False,
                 collision_group: int = 0) -> int:
        validate_shape(shape)
        if mass < 0:
            raise ValueError("mass must be >= 0")
        if isinstance(shape, StaticPlane) and (mass != 0.0 or kinematic):
            raise ValueError("planes must be static")
        if kinematic and mass <= 0.0:
            raise ValueError("kinematic bodies need mass > 0")
        if inertia_diag is None:
            inertia_diag = shape_inertia_diag(shape, mass)
        inertia_diag = np.asarray(inertia_diag, dtype=float)
        if np.any(inertia_diag < 0):
            raise ValueError("inertia components must be >= 0")
        body = RigidBody(
            id=self._next_body_id,
            shape=shape,
            position=np.asarray(position, dtype=float),
            orientation=(np.asarray(orientation, dtype=float)
                         if orientation is not None else QUAT_IDENTITY.copy()),
            linear_velocity=(np.asarray(velocity, dtype=float)
                            if velocity is not None else vec3()),
            angular_velocity=(np.asarray(angular_velocity, dtype=float)
                             if angular_velocity is not None else vec3()),
            mass=float(mass),
            inertia_diag=inertia_diag,
            material=material or Material(),
            kinematic=kinematic,
            collision_group=collision_group,
        )
        self.bodies[body.id] = body
        self._next_body_id += 1
        self._structure_rev += 1
        return body.id

    def add_joint(self, kind: str, body_a: int, body_b: int, anchor, axis,
                  limits=(-math.pi, math.pi), drive: Drive | None = None) -> int:
        a = self.body(body_a)
        b = self.body(body_b)
        if limits[0] > limits[1]:
            raise ValueError("joint limits must satisfy lo <= hi")
        if kind not in ("hinge", "prismatic"):
            raise ValueError(f"unknown joint kind {kind!r}")
        anchor = np.asarray(anchor, dtype=float)
        axis_w = np.asarray(axis, dtype=float)
        axis_w = axis_w / norm(axis_w)
        ca = quat_conjugate(a.orientation)
        cb = quat_conjugate(b.orientation)
        ref_w, _ = orthonormal_tangents(axis_w)
        joint = Joint(
            id=self._next_joint_id,
            kind=kind,
            body_a=body_a,
            body_b=body_b,
            local_anchor_a=quat_rotate(ca, anchor - a.position),
            local_anchor_b=quat_rotate(cb, anchor - b.position),
            local_axis_a=quat_rotate(ca, axis_w),
            local_axis_b=quat_rotate(cb, axis_w),
            local_ref_a=quat_rotate(ca, ref_w),
            local_ref_b=quat_rotate(cb, ref_w),
            rel_orientation0=quat_mul(ca, b.orientation),
            limits=(float(limits[0]), float(limits[1])),
            drive=drive or Drive(),
        )
        self.joints[joint.id] = joint
        self._next_joint_id += 1
        self._structure_rev += 1
        return joint.id

    def remove_body(self, body_id: int) -> None:
        self.body(body_id)
        del self.bodies[body_id]
        self.joints = {jid: j for jid, j in self.joints.items()
                       if j.body_a != body_id and j.body_b != body_id}
        self._structure_rev += 1

    # -- access --------------------------------------------------------------

    def body(self, body_id: int) -> RigidBody:
        try:
            return self.bodies[body_id]
        except KeyError:
            raise NotFound(f"no body with id {body_id}") from None

    def joint(self, joint_id: int) -> Joint:
        try:
            return self.joints[joint_id]
        except KeyError:
            raise NotFound(f"no joint with id {joint_id}") from None

    def bodies_sorted(self) -> list[RigidBody]:
        return [self.bodies[i] for i in sorted(self.bodies)]

    def joints_sorted(self) -> list[Joint]:
        return [self.joints[i] for i in sorted(self.joints)]

    def joint_coordinate(self, joint_id: int) -> float:
        """Current hinge angle (rad) or prismatic translation (m)."""
        jc = _JointConstraint(self, self.joint(joint_id))
        return jc.hinge_angle() if jc.j.kind == "hinge" else jc.translation()

    def joint_speed(self, joint_id: int) -> float:
        j = self.joint(joint_id)
        jc = _JointConstraint(self, j)
        axis = jc._axis_world()
        if j.kind == "hinge":
            wrel = jc.b.angular_velocity - jc.a.angular_velocity
            return float(np.dot(wrel, axis))
        return float(np.dot(jc.b.linear_velocity - jc.a.linear_velocity, axis))

    # -- stepping ------------------------------------------------------------

    def _integrate_velocities(self, gravity, dt: float) -> None:
        for body in self.bodies_sorted():
            if body.responsive:
                body.linear_velocity = body.linear_velocity + gravity * dt

    def _integrate_positions(self, dt: float) -> None:
        for body in self.bodies_sorted():
            if not (body.responsive or body.kinematic):
                continue
            body.position = body.position + body.linear_velocity * dt
            w = body.angular_velocity
            if w[0] != 0.0 or w[1] != 0.0 or w[2] != 0.0:
                body.orientation = integrate_orientation(body.orientation, w, dt)

    def _check_finite(self) -> None:
        for body in self.bodies_sorted():
            if not (np.isfinite(body.position).all()
                    and np.isfinite(body.orientation).all()
                    and np.isfinite(body.linear_velocity).all()
                    and np.isfinite(body.angular_velocity).all()):
                raise SimulationDiverged(body.id)

    def step(self, dt: float) -> None:
        """Advance the world by dt seconds."""
        if dt <= 0:
            raise ValueError("dt must be positive")
        if self.params.compiled:
            self._step_compiled(dt)
        else:
            self._step_reference(dt)

    def _step_reference(self, dt: float) -> None:
        params = self.params
        for body in self.bodies_sorted():
            body.accumulated_contact_force = vec3()

        contacts = detect_contacts(self)
        self.last_contacts = contacts
        self._integrate_velocities(self.gravity, dt)

        ccs = [_ContactConstraint(self, c, params) for c in contacts]
        if params.warm_starting:
            for c, cc in zip(contacts, ccs):
                acc = self._contact_warm.get((c.body_a, c.body_b, c.feature))
                if acc is not None:
                    cc.warm_start(acc)
        jcs = [_JointConstraint(self, j) for j in self.joints_sorted()]
        for jc in jcs:
            jc.prep_drive(dt)
        # Sweep direction alternates per iteration AND per step: a fixed
        # Gauss-Seidel order resolves statically indeterminate contact sets
        # (a capsule resting on two endpoints) with a systematic lean toward
        # the row solved first, which shows up as a steady drift force. The
        # per-step flip cancels the residual bias of the first sweep.
        sweep0 = self._sweep_parity if params.alternate_sweeps else 0
        alternate = 1 if params.alternate_sweeps else 0
        total = max(params.velocity_iterations, params.joint_iterations if jcs else 0)
        for it in range(total):
            fwd = (it * alternate + sweep0) % 2 == 0
            jseq = jcs if fwd else jcs[::-1]
            cseq = ccs if fwd else ccs[::-1]
            if it < params.joint_iterations:
                for jc in jseq:
                    jc.solve_velocity()
            if it < params.velocity_iterations:
                for cc in cseq:
                    cc.solve_velocity()

        self._integrate_positions(dt)

        for it in range(params.position_iterations):
            fwd = (it * alternate + sweep0) % 2 == 0
            jseq = jcs if fwd else jcs[::-1]
            cseq = ccs if fwd else ccs[::-1]
            for jc in jseq:
                jc.solve_position(params)
            for cc in cseq:
                cc.solve_position(params)

        for cc in ccs:
            imp = cc.total_impulse()
            cc.a.accumulated_contact_force = cc.a.accumulated_contact_force - imp / dt
            cc.b.accumulated_contact_force = cc.b.accumulated_contact_force + imp / dt

        self._contact_warm = {
            (c.body_a, c.body_b, c.feature): (cc.acc_n, cc.acc_t1, cc.acc_t2)
            for c, cc in zip(contacts, ccs)}
        self._check_finite()
        self._sweep_parity ^= 1
        self.time += dt

    def _packed_structure(self) -> dict:
        """Step-invariant arrays for the compiled solver, cached per layout."""
        if self._packed is not None and self._packed["rev"] == self._structure_rev:
            return self._packed
        bodies = self.bodies_sorted()
        joints = self.joints_sorted()
        n = len(bodies)
        kj = len(joints)
        inv_diag = np.zeros((n, 3))
        for i, b in enumerate(bodies):
            for c in range(3):
                if b.inertia_diag[c] > 0.0:
                    inv_diag[i, c] = 1.0 / b.inertia_diag[c]
        slot = {b.id: i for i, b in enumerate(bodies)}
        st = {
            "rev": self._structure_rev,
            "bodies": bodies,
            "joints": joints,
            "slot": slot,
            "inv_mass": np.array([b.inv_mass for b in bodies]),
            "inv_diag": inv_diag,
            "resp": np.array([b.responsive for b in bodies], dtype=np.uint8),
            "kine": np.array([b.kinematic for b in bodies], dtype=np.uint8),
            "fric": np.array([b.material.friction for b in bodies]),
            "rest": np.array([b.material.restitution for b in bodies]),
            "jkind": np.array([0 if j.kind == "hinge" else 1 for j in joints],
                              dtype=np.uint8),
            "ja": np.array([slot[j.body_a] for j in joints], dtype=np.int64),
            "jb": np.array([slot[j.body_b] for j in joints], dtype=np.int64),
            "jla": _stack3([j.local_anchor_a for j in joints]),
            "jlb": _stack3([j.local_anchor_b for j in joints]),
            "jxa": _stack3([j.local_axis_a for j in joints]),
            "jxb": _stack3([j.local_axis_b for j in joints]),
            "jrfa": _stack3([j.local_ref_a for j in joints]),
            "jrfb": _stack3([j.local_ref_b for j in joints]),
            "jrel0": (np.stack([j.rel_orientation0 for j in joints])
                      if joints else np.zeros((0, 4))),
            "jlo": np.array([j.limits[0] for j in joints]),
            "jhi": np.array([j.limits[1] for j in joints]),
            "jkp": np.zeros(kj),
            "jkd": np.zeros(kj),
            "jtgt": np.zeros(kj),
        }
        self._packed = st
        return st

    def _step_compiled(self, dt: float) -> None:
        params = self.params
        st = self._packed_structure()
        bodies = st["bodies"]
        n = len(bodies)
        for body in bodies:
            body.accumulated_contact_force = vec3()

        contacts = detect_contacts(self)
        self.last_contacts = contacts

        pos = np.empty((n, 3))
        quat = np.empty((n, 4))
        lin = np.empty((n, 3))
        ang = np.empty((n, 3))
        for i, b in enumerate(bodies):
            pos[i] = b.position
            quat[i] = b.orientation
            lin[i] = b.linear_velocity
            ang[i] = b.angular_velocity

        slot = st["slot"]
        fric = st["fric"]
        rest = st["rest"]
        m = len(contacts)
        ca = np.empty(m, dtype=np.int64)
        cb = np.empty(m, dtype=np.int64)
        cpt = np.empty((m, 3))
        cnrm = np.empty((m, 3))
        cpen = np.empty(m)
        cfric = np.empty(m)
        crest = np.empty(m)
        for ci, c in enumerate(contacts):
            sa = slot[c.body_a]
            sb = slot[c.body_b]
            ca[ci] = sa
            cb[ci] = sb
            cpt[ci] = c.point
            cnrm[ci] = c.normal
            cpen[ci] = c.penetration
            cfric[ci] = math.sqrt(fric[sa] * fric[sb])
            crest[ci] = max(rest[sa], rest[sb])

        jkp, jkd, jtgt = st["jkp"], st["jkd"], st["jtgt"]
        for ji, j in enumerate(st["joints"]):
            jkp[ji] = j.drive.kp
            jkd[ji] = j.drive.kd
            jtgt[ji] = j.drive.target

        cacc = np.zeros((m, 3))
        if params.warm_starting:
            for ci, c in enumerate(contacts):
                acc = self._contact_warm.get((c.body_a, c.body_b, c.feature))
                if acc is not None:
                    cacc[ci, 0], cacc[ci, 1], cacc[ci, 2] = acc
        cforce = np.zeros((n, 3))
        g = self.gravity
        rigid_step(dt, float(g[0]), float(g[1]), float(g[2]),
                   pos, quat, lin, ang,
                   st["inv_mass"], st["inv_diag"], st["resp"], st["kine"],
                   ca, cb, cpt, cnrm, cpen, cfric, crest,
                   st["jkind"], st["ja"], st["jb"], st["jla"], st["jlb"],
                   st["jxa"], st["jxb"], st["jrfa"], st["jrfb"], st["jrel0"],
                   st["jlo"], st["jhi"], jkp, jkd, jtgt,
                   params.velocity_iterations, params.joint_iterations,
                   params.position_iterations,
                   params.baumgarte, params.slop,
                   params.restitution_threshold, params.max_correction,
                   self._sweep_parity if params.alternate_sweeps else 0,
                   1 if params.alternate_sweeps else 0,
                   cacc, cforce)

        resp = st["resp"]
        kine = st["kine"]
        for i, b in enumerate(bodies):
            if resp[i] or kine[i]:
                b.position = pos[i].copy()
                b.orientation = quat[i].copy()
            if resp[i]:
                b.linear_velocity = lin[i].copy()
                b.angular_velocity = ang[i].copy()
            b.accumulated_contact_force = cforce[i].copy()

        self._contact_warm = {
            (c.body_a, c.body_b, c.feature): (cacc[ci, 0], cacc[ci, 1], cacc[ci, 2])
            for ci, c in enumerate(contacts)}
        self._check_finite()
        self._sweep_parity ^= 1
        self.time += dt

    def kinetic_energy(self) -> float:
        e = 0.0
        for body in self.bodies_sorted():
            if not body.responsive:
                continue
            e += 0.5 * body.mass * float(np.dot(body.linear_velocity, body.linear_velocity))
            w_local = quat_rotate(quat_conjugate(body.orientation), body.angular_velocity)
            e += 0.5 * float(np.dot(body.inertia_diag * w_local, w_local))
        return e


# ---------------------------------------------------------------------------
# module-level operation surface


def integrate_bodies(world: RigidWorld, gravity, dt: float) -> RigidWorld:
    """Semi-implicit Euler: velocities from external forces, then positions
    from the new velocities. Static bodies are untouched."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    gravity = np.asarray(gravity, dtype=float)
    world._integrate_velocities(gravity, dt)
    world._integrate_positions(dt)
    world._check_finite()
    return world


def solve_contacts(world: RigidWorld, contacts: list[Contact], iterations: int,
                   dt: float) -> RigidWorld:
    """Sequential impulses over the given contacts: velocity iterations with
    accumulated-impulse clamping (friction bounded by mu * normal impulse),
    then Baumgarte-factored position projection. Updates each body's
    accumulated_contact_force by impulse / dt."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    params = world.params
    ccs = [_ContactConstraint(world, c, params) for c in contacts]
    for it in range(iterations):
        for cc in ccs if it % 2 == 0 else ccs[::-1]:
            cc.solve_velocity()
    for it in range(params.position_iterations):
        for cc in ccs if it % 2 == 0 else ccs[::-1]:
            cc.solve_position(params)
    for cc in ccs:
        imp = cc.total_impulse()
        cc.a.accumulated_contact_force = cc.a.accumulated_contact_force - imp / dt
        cc.b.accumulated_contact_force = cc.b.accumulated_contact_force + imp / dt
    return world


def _implicit_pd_impulse(kp, kd, err, qdot, inv_eff, dt):
    """Impulse for tau = kp*err - kd*qdot evaluated at the post-impulse state.

    Solving u = dt*(kp*(err - qdot_new*dt) - kd*qdot_new) with
    qdot_new = qdot + u*inv_eff keeps stiff gains stable at coarse steps,
    where the explicit form would ring or blow up.
    """
    denom = 1.0 + (kp * dt * dt + kd * dt) * inv_eff
    return dt * (kp * err - (kp * dt + kd) * qdot) / denom


def apply_joint_drives(world: RigidWorld, dt: float) -> RigidWorld:
    """One-shot PD drive impulses: tau = kp*(target - q) - kd*qdot, applied
    equal and opposite about each joint's axis (torque for hinges, force for
    prismatics), integrated implicitly so stiff gains stay stable.

    RigidWorld.step applies the same control law as soft rows inside its
    velocity iterations instead, which tracks sustained loads without droop;
    this standalone form suits manual step composition."""
    for joint in world.joints_sorted():
        d = joint.drive
        if d.kp == 0.0 and d.kd == 0.0:
            continue
        jc = _JointConstraint(world, joint)
        a, b = jc.a, jc.b
        axis = jc._axis_world()
        lo, hi = joint.limits
        target = min(max(d.target, lo), hi)
        ia = a.inv_inertia_world()
        ib = b.inv_inertia_world()
        if joint.kind == "hinge":
            q = jc.hinge_angle()
            qdot = float(np.dot(b.angular_velocity - a.angular_velocity, axis))
            inv_eff = float(axis @ (ia + ib) @ axis)
            u = _implicit_pd_impulse(d.kp, d.kd, target - q, qdot, inv_eff, dt)
            impulse = axis * u
            if a.responsive:
                a.angular_velocity = a.angular_velocity - ia @ impulse
            if b.responsive:
                b.angular_velocity = b.angular_velocity + ib @ impulse
        else:
            q = jc.translation()
            qdot = float(np.dot(b.linear_velocity - a.linear_velocity, axis))
            pa, pb = jc._anchors()
            ra, rb = pa - a.position, pb - b.position
            mass_eff = _effective_mass(a, b, ra, rb, axis, ia, ib)
            inv_eff = 1.0 / mass_eff if mass_eff > 0.0 else 0.0
            u = _implicit_pd_impulse(d.kp, d.kd, target - q, qdot, inv_eff, dt)
            _apply_impulse(a, b, ra, rb, axis * u, ia, ib)
    return world


def query_rigid_state(world: RigidWorld, body_id: int):
    """Snapshot (position, orientation, linear_velocity, angular_velocity,
    accumulated_contact_force) for one body; raises NotFound for unknown ids."""
    body = world.body(body_id)
    return (
        body.position.copy(),
        body.orientation.copy(),
        body.linear_velocity.copy(),
        body.angular_velocity.copy(),
        body.accumulated_contact_force.copy(),
    )
