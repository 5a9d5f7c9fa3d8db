"""Small 3D vector and quaternion helpers shared by the solvers.

Conventions: right-handed frames, z-up, SI units. Quaternions are stored
scalar-first as (w, x, y, z) numpy arrays and kept unit-norm.
"""
from __future__ import annotations

import math

import numpy as np

Vec3 = np.ndarray   # shape (3,), float64
Quat = np.ndarray   # shape (4,), float64, (w, x, y, z)

QUAT_IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def vec3(x: float = 0.0, y: float = 0.0, z: float = 0.0) -> Vec3:
    return np.array([float(x), float(y), float(z)])


def norm(v: np.ndarray) -> float:
    return math.sqrt(float(np.dot(v, v)))


def normalized(v: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    n = norm(v)
    if n < eps:
        raise ValueError("cannot normalize near-zero vector")
    return v / n


def quat(w: float, x: float, y: float, z: float) -> Quat:
    return np.array([float(w), float(x), float(y), float(z)])


def quat_normalize(q: Quat) -> Quat:
    n = math.sqrt(float(np.dot(q, q)))
    if n < 1e-12:
        raise ValueError("cannot normalize a zero quaternion")
    return q / n


def quat_conjugate(q: Quat) -> Quat:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_mul(a: Quat, b: Quat) -> Quat:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_from_axis_angle(axis: Vec3, angle: float) -> Quat:
    axis = normalized(np.asarray(axis, dtype=float))
    half = 0.5 * angle
    s = math.sin(half)
    return np.array([math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s])


def quat_rotate(q: Quat, v: Vec3) -> Vec3:
    """Rotate vector v by unit quaternion q.

    Uses v' = v + 2w(u x v) + 2(u x (u x v)) with u the vector part, which
    preserves the norm of v. Spelled out in scalars: np.cross carries axis
    bookkeeping that costs more than the arithmetic for single 3-vectors.
    """
    w, ux, uy, uz = q[0], q[1], q[2], q[3]
    vx, vy, vz = v[0], v[1], v[2]
    cx = uy * vz - uz * vy
    cy = uz * vx - ux * vz
    cz = ux * vy - uy * vx
    dx = uy * cz - uz * cy
    dy = uz * cx - ux * cz
    dz = ux * cy - uy * cx
    return np.array([vx + 2.0 * (w * cx + dx),
                     vy + 2.0 * (w * cy + dy),
                     vz + 2.0 * (w * cz + dz)])


def quat_to_matrix(q: Quat) -> np.ndarray:
    w, x, y, z = q
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    return np.array([
        [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
        [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
        [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
    ])


def integrate_orientation(q: Quat, omega: Vec3, dt: float) -> Quat:
    """First-order orientation update q' = normalize(q + (dt/2) * omega ⊗ q)."""
    ow = np.array([0.0, omega[0], omega[1], omega[2]])
    return quat_normalize(q + 0.5 * dt * quat_mul(ow, q))


def orthonormal_tangents(n: Vec3) -> tuple[Vec3, Vec3]:
    """Deterministic tangent basis (t1, t2) completing unit normal n."""
    if abs(n[0]) < 0.57735:
        t1 = np.array([1.0, 0.0, 0.0])
    else:
        t1 = np.array([0.0, 1.0, 0.0])
    t1 = t1 - n * np.dot(t1, n)
    t1 = t1 / norm(t1)
    t2 = np.cross(n, t1)
    return t1, t2


def is_finite(a: np.ndarray) -> bool:
    return bool(np.isfinite(a).all())
