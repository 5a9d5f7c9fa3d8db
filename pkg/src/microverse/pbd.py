"""Position-based dynamics for cloth and soft-body lattices.

The solver follows the classic predict/project/update loop, run as
substeps: the time step is divided by the iteration count and each slice
predicts under gravity, projects the constraints, pushes particles out of
rigid geometry, and recomputes velocities from the position change. Many
small steps absorb the gravity injection far better than many iterations
on one large step, so the per-slice projection budget stays small (a few
Gauss-Seidel sweeps in alternating order).

The distance and bending sweeps are strictly sequential — each projection
sees every earlier correction — and are compiled with numba; pure numpy
was an order of magnitude too slow at the substep counts a taut pinned
cloth needs. Everything else (prediction, shape matching, collision,
velocity update) is vectorized numpy. Results are bit-deterministic.

Coupling with the rigid module is one-way: particles collide with rigid
shapes (with position-level Coulomb friction against the surface motion),
but rigid bodies feel nothing back.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import NotFound, SimulationDiverged, StateError
from .rigid import Box, Capsule, RigidWorld, Sphere, StaticPlane, _plane_world
from .vecmath import Vec3, quat_rotate, quat_to_matrix, vec3

# ---------------------------------------------------------------------------
# constraint variants


@dataclass
class DistanceConstraint:
    i: int
    j: int
    rest_length: float
    stiffness: float = 1.0


@dataclass
class BendingConstraint:
    """Dihedral bend over triangles (i, j, k) and (i, j, l) sharing edge ij."""

    i: int
    j: int
    k: int
    l: int
    rest_angle: float
    stiffness: float = 1.0


@dataclass
class Attachment:
    """Pins a particle to a world point or to a rigid body's local frame."""

    particle: int
    anchor: Vec3 | None = None
    body_id: int | None = None
    local_offset: Vec3 | None = None


@dataclass
class ShapeMatch:
    """Pulls a particle set toward the best rigid fit of its rest shape."""

    particles: np.ndarray  # int indices
    stiffness: float = 1.0


Constraint = DistanceConstraint | BendingConstraint | Attachment | ShapeMatch


def _validate_constraint(c: Constraint, n: int) -> None:
    if isinstance(c, DistanceConstraint):
        if not (0 <= c.i < n and 0 <= c.j < n) or c.i == c.j:
            raise ValueError(f"distance constraint indices out of range: {c}")
        if c.rest_length <= 0:
            raise ValueError("rest_length must be positive")
        if not 0.0 <= c.stiffness <= 1.0:
            raise ValueError("stiffness must be in [0, 1]")
    elif isinstance(c, BendingConstraint):
        ids = (c.i, c.j, c.k, c.l)
        if len(set(ids)) != 4 or not all(0 <= x < n for x in ids):
            raise ValueError(f"bending constraint indices invalid: {c}")
        if not 0.0 <= c.stiffness <= 1.0:
            raise ValueError("stiffness must be in [0, 1]")
    elif isinstance(c, Attachment):
        if not 0 <= c.particle < n:
            raise NotFound(f"no particle with index {c.particle}")
        if (c.anchor is None) == (c.body_id is None):
            raise ValueError("attachment needs either an anchor point or a body id")
    elif isinstance(c, ShapeMatch):
        if len(c.particles) < 3:
            raise ValueError("shape matching needs at least 3 particles")
        if not 0.0 <= c.stiffness <= 1.0:
            raise ValueError("stiffness must be in [0, 1]")
        if np.any(c.particles < 0) or np.any(c.particles >= n):
            raise ValueError("shape match indices out of range")
    else:
        raise ValueError(f"unknown constraint {c!r}")


# ---------------------------------------------------------------------------
# particle system


@dataclass
class ParticleSystem:
    positions: np.ndarray            # (n, 3)
    velocities: np.ndarray           # (n, 3)
    inverse_masses: np.ndarray       # (n,), 0 = pinned
    constraints: list = field(default_factory=list)
    predicted_positions: np.ndarray | None = None
    rest_shape: np.ndarray | None = None
    radius: float = 0.005            # collision thickness
    friction: float = 0.5
    damping: float = 0.99

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)
        self.inverse_masses = np.asarray(self.inverse_masses, dtype=float)
        n = len(self.positions)
        if len(self.velocities) != n or len(self.inverse_masses) != n:
            raise ValueError("positions, velocities, inverse_masses must match in length")
        if np.any(self.inverse_masses < 0):
            raise ValueError("inverse masses must be >= 0")
        if self.predicted_positions is None:
            self.predicted_positions = self.positions.copy()
        for c in self.constraints:
            _validate_constraint(c, n)
        self._stashed_inv_mass: dict[int, float] = {}
        self._batches = None

    @property
    def count(self) -> int:
        return len(self.positions)

    def add_constraint(self, c: Constraint) -> None:
        _validate_constraint(c, self.count)
        self.constraints.append(c)
        self._batches = None

    def masses(self) -> np.ndarray:
        w = self.inverse_masses
        m = np.zeros_like(w)
        np.divide(1.0, w, out=m, where=w > 0)
        return m


# ---------------------------------------------------------------------------
# projections


def project_distance(p_i, p_j, w_i: float, w_j: float, rest: float,
                     stiffness: float = 1.0):
    """Corrections moving a particle pair toward its rest distance.

    Split proportionally to inverse masses; coincident points produce zero
    correction (the direction is undefined there).
    """
    if w_i + w_j <= 0.0:
        raise ValueError("at least one endpoint must be movable")
    d = np.asarray(p_j, dtype=float) - np.asarray(p_i, dtype=float)
    dist = float(np.linalg.norm(d))
    if dist < 1e-9:
        return vec3(), vec3()
    c = dist - rest
    n = d / dist
    scale = stiffness * c / (w_i + w_j)
    return w_i * scale * n, -w_j * scale * n


def shape_match_project(ps: ParticleSystem, particle_set, rest_shape,
                        stiffness: float):
    """Corrections pulling particles toward the best rigid fit of rest_shape.

    The rotation comes from the polar part of the mass-weighted covariance
    (SVD with a determinant fix); a degenerate covariance falls back to
    translation-only matching. Pinned particles contribute to the fit but
    receive zero correction.
    """
    idx = np.asarray(particle_set, dtype=int)
    if len(idx) < 3:
        raise ValueError("shape matching needs at least 3 particles")
    rest = np.asarray(rest_shape, dtype=float)
    x = ps.predicted_positions[idx]
    w = ps.inverse_masses[idx]
    m = np.where(w > 0, np.divide(1.0, w, out=np.ones_like(w), where=w > 0), 1.0)
    m_total = m.sum()
    x_cm = (m[:, None] * x).sum(axis=0) / m_total
    r_cm = (m[:, None] * rest).sum(axis=0) / m_total
    p = x - x_cm
    q = rest - r_cm
    a = (m[:, None] * p).T @ q  # 3x3 covariance of current vs rest
    u, s, vt = np.linalg.svd(a)
    if s[2] > 1e-12:
        rot = u @ vt
        if np.linalg.det(rot) < 0:
            rot = (u * np.array([1.0, 1.0, -1.0])) @ vt
        goals = (rot @ q.T).T + x_cm
    else:
        goals = q + x_cm  # translation-only fallback
    corrections = stiffness * (goals - x)
    corrections[w == 0.0] = 0.0
    return corrections


@njit(cache=True)
def _sweep_distance(pred, inv_m, idx_i, idx_j, rest, stiffness, reverse):
    """One strict Gauss-Seidel pass over the distance constraints.

    Each projection reads positions already updated by the previous ones,
    which is what lets tension propagate across the whole mesh in a single
    pass. `reverse` flips the traversal order; alternating directions
    avoids a drift bias toward the tail of the list.
    """
    n = idx_i.shape[0]
    for c0 in range(n):
        c = n - 1 - c0 if reverse else c0
        i = idx_i[c]
        j = idx_j[c]
        wi = inv_m[i]
        wj = inv_m[j]
        wsum = wi + wj
        if wsum <= 0.0:
            continue
        dx = pred[j, 0] - pred[i, 0]
        dy = pred[j, 1] - pred[i, 1]
        dz = pred[j, 2] - pred[i, 2]
        dist = (dx * dx + dy * dy + dz * dz) ** 0.5
        if dist < 1e-9:
            continue
        coef = stiffness[c] * (dist - rest[c]) / (dist * wsum)
        ai = wi * coef
        aj = wj * coef
        pred[i, 0] += ai * dx
        pred[i, 1] += ai * dy
        pred[i, 2] += ai * dz
        pred[j, 0] -= aj * dx
        pred[j, 1] -= aj * dy
        pred[j, 2] -= aj * dz


@njit(cache=True)
def _sweep_bending(pred, inv_m, i1, i2, i3, i4, rest_angle, stiffness):
    """One sequential pass over the dihedral bending constraints.

    Gradient formulas follow the standard dihedral-angle derivation over
    the wing triangles (1,2,3) and (1,2,4) sharing edge 1-2.
    """
    for c in range(i1.shape[0]):
        a, b, k, l = i1[c], i2[c], i3[c], i4[c]
        p2x = pred[b, 0] - pred[a, 0]
        p2y = pred[b, 1] - pred[a, 1]
        p2z = pred[b, 2] - pred[a, 2]
        p3x = pred[k, 0] - pred[a, 0]
        p3y = pred[k, 1] - pred[a, 1]
        p3z = pred[k, 2] - pred[a, 2]
        p4x = pred[l, 0] - pred[a, 0]
        p4y = pred[l, 1] - pred[a, 1]
        p4z = pred[l, 2] - pred[a, 2]

        c23x = p2y * p3z - p2z * p3y
        c23y = p2z * p3x - p2x * p3z
        c23z = p2x * p3y - p2y * p3x
        c24x = p2y * p4z - p2z * p4y
        c24y = p2z * p4x - p2x * p4z
        c24z = p2x * p4y - p2y * p4x
        l23 = (c23x * c23x + c23y * c23y + c23z * c23z) ** 0.5
        l24 = (c24x * c24x + c24y * c24y + c24z * c24z) ** 0.5
        if l23 < 1e-9 or l24 < 1e-9:
            continue
        n1x, n1y, n1z = c23x / l23, c23y / l23, c23z / l23
        n2x, n2y, n2z = c24x / l24, c24y / l24, c24z / l24
        d = n1x * n2x + n1y * n2y + n1z * n2z
        if d > 1.0:
            d = 1.0
        elif d < -1.0:
            d = -1.0

        q3x = (p2y * n2z - p2z * n2y + (n1y * p2z - n1z * p2y) * d) / l23
        q3y = (p2z * n2x - p2x * n2z + (n1z * p2x - n1x * p2z) * d) / l23
        q3z = (p2x * n2y - p2y * n2x + (n1x * p2y - n1y * p2x) * d) / l23
        q4x = (p2y * n1z - p2z * n1y + (n2y * p2z - n2z * p2y) * d) / l24
        q4y = (p2z * n1x - p2x * n1z + (n2z * p2x - n2x * p2z) * d) / l24
        q4z = (p2x * n1y - p2y * n1x + (n2x * p2y - n2y * p2x) * d) / l24
        q2x = (-(p3y * n2z - p3z * n2y + (n1y * p3z - n1z * p3y) * d) / l23
               - (p4y * n1z - p4z * n1y + (n2y * p4z - n2z * p4y) * d) / l24)
        q2y = (-(p3z * n2x - p3x * n2z + (n1z * p3x - n1x * p3z) * d) / l23
               - (p4z * n1x - p4x * n1z + (n2z * p4x - n2x * p4z) * d) / l24)
        q2z = (-(p3x * n2y - p3y * n2x + (n1x * p3y - n1y * p3x) * d) / l23
               - (p4x * n1y - p4y * n1x + (n2x * p4y - n2y * p4x) * d) / l24)
        q1x = -q2x - q3x - q4x
        q1y = -q2y - q3y - q4y
        q1z = -q2z - q3z - q4z

        w1, w2 = inv_m[a], inv_m[b]
        w3, w4 = inv_m[k], inv_m[l]
        denom = (w1 * (q1x * q1x + q1y * q1y + q1z * q1z)
                 + w2 * (q2x * q2x + q2y * q2y + q2z * q2z)
                 + w3 * (q3x * q3x + q3y * q3y + q3z * q3z)
                 + w4 * (q4x * q4x + q4y * q4y + q4z * q4z))
        if denom <= 1e-12:
            continue
        sin_sq = 1.0 - d * d
        if sin_sq < 0.0:
            sin_sq = 0.0
        scale = (stiffness[c] * sin_sq ** 0.5
                 * (np.arccos(d) - rest_angle[c]) / denom)
        s1 = w1 * scale
        s2 = w2 * scale
        s3 = w3 * scale
        s4 = w4 * scale
        pred[a, 0] -= s1 * q1x
        pred[a, 1] -= s1 * q1y
        pred[a, 2] -= s1 * q1z
        pred[b, 0] -= s2 * q2x
        pred[b, 1] -= s2 * q2y
        pred[b, 2] -= s2 * q2z
        pred[k, 0] -= s3 * q3x
        pred[k, 1] -= s3 * q3y
        pred[k, 2] -= s3 * q3z
        pred[l, 0] -= s4 * q4x
        pred[l, 1] -= s4 * q4y
        pred[l, 2] -= s4 * q4z


class _Flat:
    """Kernel-ready flat arrays for a constraint list, rebuilt on change."""

    def __init__(self, ps: ParticleSystem):
        dist = [c for c in ps.constraints if isinstance(c, DistanceConstraint)]
        bend = [c for c in ps.constraints if isinstance(c, BendingConstraint)]
        self.shape_matches = [c for c in ps.constraints if isinstance(c, ShapeMatch)]

        self.d_i = np.array([c.i for c in dist], dtype=np.int64)
        self.d_j = np.array([c.j for c in dist], dtype=np.int64)
        self.d_rest = np.array([c.rest_length for c in dist], dtype=float)
        self.d_stiff = np.array([c.stiffness for c in dist], dtype=float)

        self.b_1 = np.array([c.i for c in bend], dtype=np.int64)
        self.b_2 = np.array([c.j for c in bend], dtype=np.int64)
        self.b_3 = np.array([c.k for c in bend], dtype=np.int64)
        self.b_4 = np.array([c.l for c in bend], dtype=np.int64)
        self.b_rest = np.array([c.rest_angle for c in bend], dtype=float)
        self.b_stiff = np.array([c.stiffness for c in bend], dtype=float)

        atts = [c for c in ps.constraints if isinstance(c, Attachment)]
        world = [a for a in atts if a.anchor is not None]
        self.world_ids = np.array([a.particle for a in world], dtype=np.int64)
        self.world_anchors = (np.array([a.anchor for a in world], dtype=float)
                              if world else np.zeros((0, 3)))
        self.body_atts = [a for a in atts if a.body_id is not None]


# ---------------------------------------------------------------------------
# rigid-geometry collision (one-way)


def _signed_distances(body, points: np.ndarray, radius: float):
    """Signed clearance (negative = penetrating by |value|) and outward
    normals for a batch of particle centers against one rigid body."""
    shape = body.shape
    if isinstance(shape, StaticPlane):
        n, off = _plane_world(body)
        sd = points @ n - off - radius
        normals = np.broadcast_to(n, points.shape)
        return sd, normals
    if isinstance(shape, Sphere):
        d = points - body.position
        dist = np.linalg.norm(d, axis=1)
        safe = np.maximum(dist, 1e-12)
        normals = d / safe[:, None]
        return dist - shape.radius - radius, normals
    if isinstance(shape, Capsule):
        axis = quat_rotate(body.orientation, vec3(0.0, 0.0, 1.0))
        e1 = body.position - axis * shape.half_height
        t = np.clip((points - e1) @ axis, 0.0, 2.0 * shape.half_height)
        closest = e1 + t[:, None] * axis
        d = points - closest
        dist = np.linalg.norm(d, axis=1)
        safe = np.maximum(dist, 1e-12)
        normals = d / safe[:, None]
        return dist - shape.radius - radius, normals
    if isinstance(shape, Box):
        he = np.asarray(shape.half_extents)
        rot = quat_to_matrix(body.orientation)
        q = (points - body.position) @ rot
        clamped = np.clip(q, -he, he)
        delta = q - clamped
        dist = np.linalg.norm(delta, axis=1)
        outside = dist > 1e-12
        normals_local = np.zeros_like(q)
        normals_local[outside] = delta[outside] / dist[outside, None]
        sd = dist - radius
        inside = ~outside
        if inside.any():
            gaps = he - np.abs(q[inside])
            k = np.argmin(gaps, axis=1)
            rows = np.arange(len(k))
            signs = np.where(q[inside][rows, k] >= 0.0, 1.0, -1.0)
            nl = np.zeros((len(k), 3))
            nl[rows, k] = signs
            normals_local[inside] = nl
            sd[inside] = -gaps[rows, k] - radius
        return sd, normals_local @ rot.T
    return None


def _collide_with_world(ps: ParticleSystem, world: RigidWorld, x0: np.ndarray,
                        dt: float):
    """Push predicted positions out of rigid geometry with Coulomb friction
    against the surface motion. Returns (contact mask, normals, surface
    velocities) for the velocity fix-up."""
    pred = ps.predicted_positions
    n_particles = ps.count
    contact = np.zeros(n_particles, dtype=bool)
    normals = np.zeros((n_particles, 3))
    surf_vel = np.zeros((n_particles, 3))
    for body in world.bodies_sorted():
        if not body.particle_collision:
            continue
        res = _signed_distances(body, pred, ps.radius)
        if res is None:
            continue
        sd, nrm = res
        hit = sd < 0.0
        if not hit.any():
            continue
        depth = -sd[hit]
        n_hit = nrm[hit]
        pred[hit] += n_hit * depth[:, None]

        # surface velocity of the body at each contact
        rel = pred[hit] - body.position
        v_surf = body.linear_velocity + np.cross(
            np.broadcast_to(body.angular_velocity, rel.shape), rel)

        # position-level Coulomb friction on the tangential motion
        mu = np.sqrt(ps.friction * body.material.friction)
        if mu > 0.0:
            motion = pred[hit] - x0[hit] - v_surf * dt
            tang = motion - n_hit * np.sum(motion * n_hit, axis=1)[:, None]
            t_len = np.linalg.norm(tang, axis=1)
            limit = mu * depth
            scale = np.zeros_like(t_len)
            slipping = t_len > 1e-12
            scale[slipping] = np.minimum(limit[slipping] / t_len[slipping], 1.0)
            pred[hit] -= tang * scale[:, None]

        contact[hit] = True
        normals[hit] = n_hit
        surf_vel[hit] = v_surf
    return contact, normals, surf_vel


# ---------------------------------------------------------------------------
# stepping


def _resolve_anchor(att: Attachment, colliders: RigidWorld | None) -> Vec3:
    if att.anchor is not None:
        return np.asarray(att.anchor, dtype=float)
    if colliders is None:
        raise StateError("attachment references a rigid body but no colliders were given")
    body = colliders.body(att.body_id)
    return body.position + quat_rotate(body.orientation, att.local_offset)


def _apply_attachments(ps: ParticleSystem, flat: "_Flat", colliders) -> None:
    if flat.world_ids.size:
        ps.predicted_positions[flat.world_ids] = flat.world_anchors
    for att in flat.body_atts:
        ps.predicted_positions[att.particle] = _resolve_anchor(att, colliders)


_DISTANCE_SWEEPS = 8  # per substep, alternating traversal direction


def _substep(ps: ParticleSystem, flat: "_Flat", gravity, dt: float,
             colliders: RigidWorld | None):
    """One predict/project/collide/update cycle.

    Bending runs first so the distance sweeps land last: the edges are the
    constraints with a hard post-step tolerance, the dihedrals only shape
    the drape. Distance sweeps alternate direction to stay unbiased.
    """
    x0 = ps.positions
    movable = ps.inverse_masses > 0
    ps.velocities[movable] += gravity * dt
    ps.predicted_positions = x0 + ps.velocities * dt
    ps.predicted_positions[~movable] = x0[~movable]
    pred = ps.predicted_positions

    if flat.b_1.size:
        _sweep_bending(pred, ps.inverse_masses, flat.b_1, flat.b_2, flat.b_3,
                       flat.b_4, flat.b_rest, flat.b_stiff)
    if flat.d_i.size:
        for s in range(_DISTANCE_SWEEPS):
            _sweep_distance(pred, ps.inverse_masses, flat.d_i, flat.d_j,
                            flat.d_rest, flat.d_stiff, bool(s & 1))
    for sm in flat.shape_matches:
        if ps.rest_shape is None:
            raise StateError("shape matching requires rest_shape on the system")
        pred[sm.particles] += shape_match_project(
            ps, sm.particles, ps.rest_shape[sm.particles], sm.stiffness)
    _apply_attachments(ps, flat, colliders)

    if colliders is not None:
        contact, normals, surf_vel = _collide_with_world(ps, colliders, x0, dt)
        _apply_attachments(ps, flat, colliders)
    else:
        contact = None

    ps.velocities = (pred - x0) / dt
    if contact is not None and contact.any():
        v_rel_n = np.sum((ps.velocities - surf_vel) * normals, axis=1)
        fix = contact & (v_rel_n < 0.0)
        ps.velocities[fix] -= normals[fix] * v_rel_n[fix, None]
    ps.positions = pred.copy()


def pbd_step(ps: ParticleSystem, gravity, dt: float, solver_iterations: int,
             colliders: RigidWorld | None = None) -> ParticleSystem:
    """Advance the particle system by dt seconds.

    The iteration budget is spent as substeps — dt is divided by
    solver_iterations and each slice runs a handful of sequential
    projection sweeps — because many small steps converge far better than
    many iterations on one large step. Each substep predicts under
    gravity, projects the constraints, pushes particles out of rigid
    geometry, and recomputes velocities from the position change; the
    damping factor is applied once per call, and inward normal velocity at
    contacts is cancelled.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if solver_iterations < 1:
        raise ValueError("solver_iterations must be >= 1")
    gravity = np.asarray(gravity, dtype=float)
    if ps._batches is None:
        ps._batches = _Flat(ps)
    flat: _Flat = ps._batches

    h = dt / solver_iterations
    for _ in range(solver_iterations):
        _substep(ps, flat, gravity, h, colliders)
    ps.velocities *= ps.damping

    if not np.isfinite(ps.positions).all():
        bad = int(np.argwhere(~np.isfinite(ps.positions))[0][0])
        raise SimulationDiverged(bad, "particle position non-finite")
    return ps


# ---------------------------------------------------------------------------
# attach / detach


def attach(ps: ParticleSystem, particle_id: int, anchor) -> ParticleSystem:
    """Pin a particle to a world point (Vec3) or to a rigid body frame
    ((body_id, local_offset) tuple). Attaching again replaces the anchor."""
    if not 0 <= particle_id < ps.count:
        raise NotFound(f"no particle with index {particle_id}")
    if isinstance(anchor, tuple) and len(anchor) == 2 and isinstance(anchor[0], int):
        att = Attachment(particle_id, body_id=anchor[0],
                         local_offset=np.asarray(anchor[1], dtype=float))
    else:
        att = Attachment(particle_id, anchor=np.asarray(anchor, dtype=float))
        # snap into place now so the first step reports no spurious velocity
        ps.positions[particle_id] = att.anchor
        ps.predicted_positions[particle_id] = att.anchor
    if particle_id not in ps._stashed_inv_mass:
        ps._stashed_inv_mass[particle_id] = float(ps.inverse_masses[particle_id])
    ps.inverse_masses[particle_id] = 0.0
    ps.velocities[particle_id] = 0.0
    ps.constraints = [c for c in ps.constraints
                      if not (isinstance(c, Attachment) and c.particle == particle_id)]
    ps.constraints.append(att)
    ps._batches = None
    return ps


def detach(ps: ParticleSystem, particle_id: int) -> ParticleSystem:
    """Release a pinned particle, restoring its inverse mass."""
    if not 0 <= particle_id < ps.count:
        raise NotFound(f"no particle with index {particle_id}")
    ps.constraints = [c for c in ps.constraints
                      if not (isinstance(c, Attachment) and c.particle == particle_id)]
    if particle_id in ps._stashed_inv_mass:
        ps.inverse_masses[particle_id] = ps._stashed_inv_mass.pop(particle_id)
    ps._batches = None
    return ps


# ---------------------------------------------------------------------------
# builders


@dataclass(frozen=True)
class ClothSpec:
    grid: tuple[int, int]
    spacing: float
    particle_mass: float
    corner_ids: tuple[int, int, int, int]


def build_cloth(rows: int = 16, cols: int = 16, size: float = 0.4,
                total_mass: float = 0.2, center=(0.0, 0.0, 0.5),
                bend_stiffness: float = 0.1) -> tuple[ParticleSystem, ClothSpec]:
    """Rectangular cloth in the xy-plane at the given center.

    Structural and shear distance constraints (count asserted exactly),
    plus dihedral bending over the uniform triangulation.
    """
    if rows < 2 or cols < 2:
        raise ValueError("cloth grid needs at least 2x2 particles")
    spacing = size / (cols - 1)
    center = np.asarray(center, dtype=float)
    xs = (np.arange(cols) - (cols - 1) / 2.0) * spacing
    ys = (np.arange(rows) - (rows - 1) / 2.0) * spacing
    positions = np.zeros((rows * cols, 3))
    for r in range(rows):
        for c in range(cols):
            positions[r * cols + c] = center + vec3(xs[c], ys[r], 0.0)

    n = rows * cols
    inv_mass = np.full(n, n / total_mass)
    ps = ParticleSystem(
        positions=positions,
        velocities=np.zeros((n, 3)),
        inverse_masses=inv_mass,
    )

    def vid(r, c):
        return r * cols + c

    diag = spacing * np.sqrt(2.0)
    for r in range(rows):
        for c in range(cols - 1):
            ps.add_constraint(DistanceConstraint(vid(r, c), vid(r, c + 1), spacing))
    for r in range(rows - 1):
        for c in range(cols):
            ps.add_constraint(DistanceConstraint(vid(r, c), vid(r + 1, c), spacing))
    for r in range(rows - 1):
        for c in range(cols - 1):
            ps.add_constraint(DistanceConstraint(vid(r, c), vid(r + 1, c + 1), diag))
            ps.add_constraint(DistanceConstraint(vid(r, c + 1), vid(r + 1, c), diag))

    expected = rows * (cols - 1) + cols * (rows - 1) + 2 * (rows - 1) * (cols - 1)
    actual = sum(1 for c in ps.constraints if isinstance(c, DistanceConstraint))
    assert actual == expected, f"cloth distance constraints: {actual} != {expected}"

    if bend_stiffness > 0.0:
        flat = np.pi  # coplanar wings on opposite sides of the shared edge
        for r in range(rows - 1):
            for c in range(cols - 1):
                # across the quad diagonal
                ps.add_constraint(BendingConstraint(
                    vid(r, c), vid(r + 1, c + 1), vid(r, c + 1), vid(r + 1, c),
                    flat, bend_stiffness))
        for r in range(rows - 1):
            for c in range(cols - 2):
                # across interior vertical edges
                ps.add_constraint(BendingConstraint(
                    vid(r, c + 1), vid(r + 1, c + 1), vid(r, c), vid(r + 1, c + 2),
                    flat, bend_stiffness))
        for r in range(rows - 2):
            for c in range(cols - 1):
                # across interior horizontal edges
                ps.add_constraint(BendingConstraint(
                    vid(r + 1, c), vid(r + 1, c + 1), vid(r, c), vid(r + 2, c + 1),
                    flat, bend_stiffness))

    spec = ClothSpec(
        grid=(rows, cols),
        spacing=spacing,
        particle_mass=total_mass / n,
        corner_ids=(vid(0, 0), vid(0, cols - 1), vid(rows - 1, 0),
                    vid(rows - 1, cols - 1)),
    )
    return ps, spec


def build_sponge(nx: int = 4, ny: int = 4, nz: int = 2,
                 size=(0.1, 0.1, 0.05), total_mass: float = 0.1,
                 center=(0.0, 0.0, 0.1), edge_stiffness: float = 0.9,
                 match_stiffness: float = 0.5) -> ParticleSystem:
    """Soft-body lattice: distance constraints along edges and diagonals,
    plus one shape-match constraint over the whole particle set."""
    center = np.asarray(center, dtype=float)
    size = np.asarray(size, dtype=float)
    counts = (nx, ny, nz)
    steps = [size[k] / (counts[k] - 1) if counts[k] > 1 else 0.0 for k in range(3)]
    positions = []
    for iz in range(nz):
        for iy in range(ny):
            for ix in range(nx):
                offset = vec3(ix * steps[0] - size[0] / 2.0,
                              iy * steps[1] - size[1] / 2.0,
                              iz * steps[2] - size[2] / 2.0)
                positions.append(center + offset)
    positions = np.array(positions)
    n = len(positions)
    ps = ParticleSystem(
        positions=positions,
        velocities=np.zeros((n, 3)),
        inverse_masses=np.full(n, n / total_mass),
        rest_shape=positions.copy(),
    )

    def vid(ix, iy, iz):
        return (iz * ny + iy) * nx + ix

    seen = set()

    def connect(a, b):
        key = (min(a, b), max(a, b))
        if key in seen:
            return
        seen.add(key)
        rest = float(np.linalg.norm(positions[a] - positions[b]))
        ps.add_constraint(DistanceConstraint(a, b, rest, edge_stiffness))

    for iz in range(nz):
        for iy in range(ny):
            for ix in range(nx):
                a = vid(ix, iy, iz)
                for dx, dy, dz in ((1, 0, 0), (0, 1, 0), (0, 0, 1),
                                   (1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1),
                                   (0, 1, 1), (0, 1, -1),
                                   (1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1)):
                    jx, jy, jz = ix + dx, iy + dy, iz + dz
                    if 0 <= jx < nx and 0 <= jy < ny and 0 <= jz < nz:
                        connect(a, vid(jx, jy, jz))

    ps.add_constraint(ShapeMatch(np.arange(n), match_stiffness))
    return ps
