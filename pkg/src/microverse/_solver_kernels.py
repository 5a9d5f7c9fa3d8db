"""Compiled inner loops for the rigid-body solver.

The constraint classes in ``rigid`` are the readable reference: small
objects, numpy vectors, one method per row. They are also two orders of
magnitude too slow for an articulated figure — a 12-joint chain costs
roughly ten thousand small-array operations per step, nearly all of it
interpreter and allocation overhead. This module is the same solver
flattened into numba kernels over packed arrays: identical formulas,
identical iteration order, identical clamping, so the two paths agree to
rounding. ``SolverParams.compiled`` picks the path; the unit tests pin
them against each other.

Layout conventions: bodies are indexed by slot in id order, contacts and
joints by their build order. Quaternions are (w, x, y, z). Per-row state
that the reference code keeps on constraint objects (accumulated
impulses, prefactored masses, frozen contact geometry) lives in scratch
arrays allocated once per step call.

Everything geometric — anchors, axes, effective masses, hinge angles —
is frozen once before the velocity iterations begin, which the reference
path recomputes redundantly: orientations do not change until positions
integrate, so the values are equal by construction, not approximation.
The position pass recomputes geometry per iteration exactly like the
reference.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# ---------------------------------------------------------------------------
# scalar quaternion / matrix helpers (mirrors of vecmath)


@njit(cache=True, inline="always")
def _cross(ax, ay, az, bx, by, bz):
    return (ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx)


@njit(cache=True, inline="always")
def _qrot(qw, qx, qy, qz, vx, vy, vz):
    # v + 2*(w*(u x v) + u x (u x v)), u the vector part
    uvx, uvy, uvz = _cross(qx, qy, qz, vx, vy, vz)
    wx, wy, wz = _cross(qx, qy, qz, uvx, uvy, uvz)
    return (vx + 2.0 * (qw * uvx + wx),
            vy + 2.0 * (qw * uvy + wy),
            vz + 2.0 * (qw * uvz + wz))


@njit(cache=True, inline="always")
def _qmul(aw, ax, ay, az, bw, bx, by, bz):
    return (aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw)


@njit(cache=True, inline="always")
def _quat_step(qw, qx, qy, qz, wx, wy, wz, dt):
    # q' = normalize(q + (dt/2) * omega (x) q)
    dw, dx, dy, dz = _qmul(0.0, wx, wy, wz, qw, qx, qy, qz)
    h = 0.5 * dt
    nw = qw + h * dw
    nx = qx + h * dx
    ny = qy + h * dy
    nz = qz + h * dz
    n = np.sqrt(nw * nw + nx * nx + ny * ny + nz * nz)
    return (nw / n, nx / n, ny / n, nz / n)


@njit(cache=True)
def _mat_from_quat(out, qw, qx, qy, qz):
    xx = qx * qx
    yy = qy * qy
    zz = qz * qz
    xy = qx * qy
    xz = qx * qz
    yz = qy * qz
    wx = qw * qx
    wy = qw * qy
    wz = qw * qz
    out[0, 0] = 1.0 - 2.0 * (yy + zz)
    out[0, 1] = 2.0 * (xy - wz)
    out[0, 2] = 2.0 * (xz + wy)
    out[1, 0] = 2.0 * (xy + wz)
    out[1, 1] = 1.0 - 2.0 * (xx + zz)
    out[1, 2] = 2.0 * (yz - wx)
    out[2, 0] = 2.0 * (xz - wy)
    out[2, 1] = 2.0 * (yz + wx)
    out[2, 2] = 1.0 - 2.0 * (xx + yy)


@njit(cache=True)
def _iiw_into(out, qw, qx, qy, qz, d0, d1, d2, responsive):
    """World inverse inertia (r * inv_diag) @ r.T; zeros when unresponsive."""
    if not responsive:
        for i in range(3):
            for j in range(3):
                out[i, j] = 0.0
        return
    r = np.empty((3, 3))
    _mat_from_quat(r, qw, qx, qy, qz)
    for i in range(3):
        for j in range(3):
            out[i, j] = (r[i, 0] * d0 * r[j, 0]
                         + r[i, 1] * d1 * r[j, 1]
                         + r[i, 2] * d2 * r[j, 2])


@njit(cache=True, inline="always")
def _tangents(nx, ny, nz):
    """Deterministic tangent pair completing unit normal n."""
    if abs(nx) < 0.57735:
        tx, ty, tz = 1.0, 0.0, 0.0
    else:
        tx, ty, tz = 0.0, 1.0, 0.0
    d = tx * nx + ty * ny + tz * nz
    tx -= nx * d
    ty -= ny * d
    tz -= nz * d
    norm = np.sqrt(tx * tx + ty * ty + tz * tz)
    tx /= norm
    ty /= norm
    tz /= norm
    ux, uy, uz = _cross(nx, ny, nz, tx, ty, tz)
    return (tx, ty, tz, ux, uy, uz)


@njit(cache=True, inline="always")
def _det3(m):
    return (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))


@njit(cache=True, inline="always")
def _solve3(m, det, bx, by, bz):
    """Cramer's rule for m @ x = b with the determinant already in hand."""
    inv = 1.0 / det
    x = (bx * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
         - m[0, 1] * (by * m[2, 2] - m[1, 2] * bz)
         + m[0, 2] * (by * m[2, 1] - m[1, 1] * bz)) * inv
    y = (m[0, 0] * (by * m[2, 2] - m[1, 2] * bz)
         - bx * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
         + m[0, 2] * (m[1, 0] * bz - by * m[2, 0])) * inv
    z = (m[0, 0] * (m[1, 1] * bz - by * m[2, 1])
         - m[0, 1] * (m[1, 0] * bz - by * m[2, 0])
         + bx * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])) * inv
    return (x, y, z)


@njit(cache=True)
def _mat3_vec(m, vx, vy, vz):
    return (m[0, 0] * vx + m[0, 1] * vy + m[0, 2] * vz,
            m[1, 0] * vx + m[1, 1] * vy + m[1, 2] * vz,
            m[2, 0] * vx + m[2, 1] * vy + m[2, 2] * vz)


@njit(cache=True, inline="always")
def _vec_mat3_vec(ax, ay, az, m, bx, by, bz):
    # (a @ m) @ b, in that association order
    t0 = ax * m[0, 0] + ay * m[1, 0] + az * m[2, 0]
    t1 = ax * m[0, 1] + ay * m[1, 1] + az * m[2, 1]
    t2 = ax * m[0, 2] + ay * m[1, 2] + az * m[2, 2]
    return t0 * bx + t1 * by + t2 * bz


@njit(cache=True)
def _point_block_k(out, invm_sum, rax, ray, raz, ia, rbx, rby, rbz, ib):
    """K = invm_sum * I - skew(ra) @ ia @ skew(ra) - skew(rb) @ ib @ skew(rb)."""
    for i in range(3):
        for j in range(3):
            out[i, j] = invm_sum if i == j else 0.0
    _skew_sandwich_sub(out, rax, ray, raz, ia)
    _skew_sandwich_sub(out, rbx, rby, rbz, ib)


@njit(cache=True)
def _skew_sandwich_sub(out, rx, ry, rz, m):
    """out -= skew(r) @ m @ skew(r)."""
    t = np.empty((3, 3))
    t[0, 0] = -rz * m[1, 0] + ry * m[2, 0]
    t[0, 1] = -rz * m[1, 1] + ry * m[2, 1]
    t[0, 2] = -rz * m[1, 2] + ry * m[2, 2]
    t[1, 0] = rz * m[0, 0] - rx * m[2, 0]
    t[1, 1] = rz * m[0, 1] - rx * m[2, 1]
    t[1, 2] = rz * m[0, 2] - rx * m[2, 2]
    t[2, 0] = -ry * m[0, 0] + rx * m[1, 0]
    t[2, 1] = -ry * m[0, 1] + rx * m[1, 1]
    t[2, 2] = -ry * m[0, 2] + rx * m[1, 2]
    for i in range(3):
        out[i, 0] -= t[i, 1] * rz - t[i, 2] * ry
        out[i, 1] -= -t[i, 0] * rz + t[i, 2] * rx
        out[i, 2] -= t[i, 0] * ry - t[i, 1] * rx


@njit(cache=True, inline="always")
def _eff_mass(invm_sum, rax, ray, raz, ia, rbx, rby, rbz, ib, dx, dy, dz):
    ux, uy, uz = _cross(rax, ray, raz, dx, dy, dz)
    vx, vy, vz = _cross(rbx, rby, rbz, dx, dy, dz)
    k = invm_sum
    k += ux * (ia[0, 0] * ux + ia[0, 1] * uy + ia[0, 2] * uz) \
        + uy * (ia[1, 0] * ux + ia[1, 1] * uy + ia[1, 2] * uz) \
        + uz * (ia[2, 0] * ux + ia[2, 1] * uy + ia[2, 2] * uz)
    k += vx * (ib[0, 0] * vx + ib[0, 1] * vy + ib[0, 2] * vz) \
        + vy * (ib[1, 0] * vx + ib[1, 1] * vy + ib[1, 2] * vz) \
        + vz * (ib[2, 0] * vx + ib[2, 1] * vy + ib[2, 2] * vz)
    return 1.0 / k if k > 1e-12 else 0.0


# ---------------------------------------------------------------------------
# velocity-phase row application


@njit(cache=True)
def _apply_impulse_rows(lin, ang, inv_mass, resp, a, b,
                        rax, ray, raz, rbx, rby, rbz, ia, ib, px, py, pz):
    if resp[a] == 1:
        im = inv_mass[a]
        lin[a, 0] -= px * im
        lin[a, 1] -= py * im
        lin[a, 2] -= pz * im
        tx, ty, tz = _cross(rax, ray, raz, px, py, pz)
        wx, wy, wz = _mat3_vec(ia, tx, ty, tz)
        ang[a, 0] -= wx
        ang[a, 1] -= wy
        ang[a, 2] -= wz
    if resp[b] == 1:
        im = inv_mass[b]
        lin[b, 0] += px * im
        lin[b, 1] += py * im
        lin[b, 2] += pz * im
        tx, ty, tz = _cross(rbx, rby, rbz, px, py, pz)
        wx, wy, wz = _mat3_vec(ib, tx, ty, tz)
        ang[b, 0] += wx
        ang[b, 1] += wy
        ang[b, 2] += wz


@njit(cache=True)
def _apply_angular_rows(ang, resp, a, b, ia, ib, px, py, pz):
    if resp[a] == 1:
        wx, wy, wz = _mat3_vec(ia, px, py, pz)
        ang[a, 0] -= wx
        ang[a, 1] -= wy
        ang[a, 2] -= wz
    if resp[b] == 1:
        wx, wy, wz = _mat3_vec(ib, px, py, pz)
        ang[b, 0] += wx
        ang[b, 1] += wy
        ang[b, 2] += wz


@njit(cache=True, inline="always")
def _rel_vel(lin, ang, a, b, rax, ray, raz, rbx, rby, rbz):
    bx, by, bz = _cross(ang[b, 0], ang[b, 1], ang[b, 2], rbx, rby, rbz)
    ax, ay, az = _cross(ang[a, 0], ang[a, 1], ang[a, 2], rax, ray, raz)
    return (lin[b, 0] + bx - lin[a, 0] - ax,
            lin[b, 1] + by - lin[a, 1] - ay,
            lin[b, 2] + bz - lin[a, 2] - az)


# ---------------------------------------------------------------------------
# position-phase application (rotates orientations through the quat step)


@njit(cache=True)
def _apply_positional(pos, quat, inv_mass, resp, a, b,
                      rax, ray, raz, rbx, rby, rbz, ia, ib, px, py, pz):
    if resp[a] == 1:
        im = inv_mass[a]
        pos[a, 0] -= px * im
        pos[a, 1] -= py * im
        pos[a, 2] -= pz * im
        tx, ty, tz = _cross(rax, ray, raz, px, py, pz)
        wx, wy, wz = _mat3_vec(ia, tx, ty, tz)
        quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3] = _quat_step(
            quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3], -wx, -wy, -wz, 1.0)
    if resp[b] == 1:
        im = inv_mass[b]
        pos[b, 0] += px * im
        pos[b, 1] += py * im
        pos[b, 2] += pz * im
        tx, ty, tz = _cross(rbx, rby, rbz, px, py, pz)
        wx, wy, wz = _mat3_vec(ib, tx, ty, tz)
        quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3] = _quat_step(
            quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3], wx, wy, wz, 1.0)


@njit(cache=True)
def _apply_angular_positional(quat, resp, a, b, ia, ib, px, py, pz):
    if resp[a] == 1:
        wx, wy, wz = _mat3_vec(ia, px, py, pz)
        quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3] = _quat_step(
            quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3], -wx, -wy, -wz, 1.0)
    if resp[b] == 1:
        wx, wy, wz = _mat3_vec(ib, px, py, pz)
        quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3] = _quat_step(
            quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3], wx, wy, wz, 1.0)


@njit(cache=True, inline="always")
def _rotate_about_point(pos, quat, bi, px, py, pz, ax, ay, az, ang):
    """Rotate body bi about the world point p by ang around unit axis a."""
    half = 0.5 * ang
    s = np.sin(half)
    qw = np.cos(half)
    qx = ax * s
    qy = ay * s
    qz = az * s
    ow, ox, oy, oz = _qmul(qw, qx, qy, qz,
                           quat[bi, 0], quat[bi, 1], quat[bi, 2], quat[bi, 3])
    n = np.sqrt(ow * ow + ox * ox + oy * oy + oz * oz)
    quat[bi, 0] = ow / n
    quat[bi, 1] = ox / n
    quat[bi, 2] = oy / n
    quat[bi, 3] = oz / n
    dx = pos[bi, 0] - px
    dy = pos[bi, 1] - py
    dz = pos[bi, 2] - pz
    rx, ry, rz = _qrot(qw, qx, qy, qz, dx, dy, dz)
    pos[bi, 0] = px + rx
    pos[bi, 1] = py + ry
    pos[bi, 2] = pz + rz


@njit(cache=True, inline="always")
def _hinge_angle(quat, ja, jb, axx, axy, axz, rax, ray, raz, rbx, rby, rbz):
    """atan2 of ref_b about the axis relative to ref_a (all world frame)."""
    fax, fay, faz = _qrot(quat[ja, 0], quat[ja, 1], quat[ja, 2], quat[ja, 3],
                          rax, ray, raz)
    fbx, fby, fbz = _qrot(quat[jb, 0], quat[jb, 1], quat[jb, 2], quat[jb, 3],
                          rbx, rby, rbz)
    cx, cy, cz = _cross(fax, fay, faz, fbx, fby, fbz)
    return np.arctan2(cx * axx + cy * axy + cz * axz,
                      fax * fbx + fay * fby + faz * fbz)


# ---------------------------------------------------------------------------
# the step kernel


@njit(cache=True)
def rigid_step(dt, gx, gy, gz,
               pos, quat, lin, ang, inv_mass, inv_diag, resp, kine,
               ca, cb, cpt, cnrm, cpen, cfric, crest,
               jkind, ja, jb, jla, jlb, jxa, jxb, jrfa, jrfb, jrel0,
               jlo, jhi, jkp, jkd, jtgt,
               vel_iters, joint_iters, pos_iters,
               baumgarte, slop, rest_thresh, max_corr,
               sweep0, alternate, cacc, cforce):
    n = pos.shape[0]
    m = ca.shape[0]
    k = ja.shape[0]

    # -- gravity (responsive bodies only) --------------------------------
    for i in range(n):
        if resp[i] == 1:
            lin[i, 0] += gx * dt
            lin[i, 1] += gy * dt
            lin[i, 2] += gz * dt

    # -- world inverse inertia, constant through the velocity phase ------
    iiw = np.empty((n, 3, 3))
    for i in range(n):
        _iiw_into(iiw[i], quat[i, 0], quat[i, 1], quat[i, 2], quat[i, 3],
                  inv_diag[i, 0], inv_diag[i, 1], inv_diag[i, 2], resp[i] == 1)

    # -- contact rows: freeze geometry, masses, restitution bias ---------
    cra = np.empty((m, 3))
    crb = np.empty((m, 3))
    ct1 = np.empty((m, 3))
    ct2 = np.empty((m, 3))
    cmn = np.empty(m)
    cmt1 = np.empty(m)
    cmt2 = np.empty(m)
    cbias = np.empty(m)
    cla = np.empty((m, 3))
    clb = np.empty((m, 3))
    cln = np.empty((m, 3))
    rmat = np.empty((3, 3))
    for ci in range(m):
        a = ca[ci]
        b = cb[ci]
        rax = cpt[ci, 0] - pos[a, 0]
        ray = cpt[ci, 1] - pos[a, 1]
        raz = cpt[ci, 2] - pos[a, 2]
        rbx = cpt[ci, 0] - pos[b, 0]
        rby = cpt[ci, 1] - pos[b, 1]
        rbz = cpt[ci, 2] - pos[b, 2]
        cra[ci, 0], cra[ci, 1], cra[ci, 2] = rax, ray, raz
        crb[ci, 0], crb[ci, 1], crb[ci, 2] = rbx, rby, rbz
        nx, ny, nz = cnrm[ci, 0], cnrm[ci, 1], cnrm[ci, 2]
        t1x, t1y, t1z, t2x, t2y, t2z = _tangents(nx, ny, nz)
        ct1[ci, 0], ct1[ci, 1], ct1[ci, 2] = t1x, t1y, t1z
        ct2[ci, 0], ct2[ci, 1], ct2[ci, 2] = t2x, t2y, t2z
        ims = inv_mass[a] + inv_mass[b]
        cmn[ci] = _eff_mass(ims, rax, ray, raz, iiw[a],
                            rbx, rby, rbz, iiw[b], nx, ny, nz)
        cmt1[ci] = _eff_mass(ims, rax, ray, raz, iiw[a],
                             rbx, rby, rbz, iiw[b], t1x, t1y, t1z)
        cmt2[ci] = _eff_mass(ims, rax, ray, raz, iiw[a],
                             rbx, rby, rbz, iiw[b], t2x, t2y, t2z)
        vx, vy, vz = _rel_vel(lin, ang, a, b, rax, ray, raz, rbx, rby, rbz)
        vn = vx * nx + vy * ny + vz * nz
        cbias[ci] = -crest[ci] * vn if vn < -rest_thresh else 0.0
        # anchors in body-local frames for the position pass
        _mat_from_quat(rmat, quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3])
        cla[ci, 0] = rmat[0, 0] * rax + rmat[1, 0] * ray + rmat[2, 0] * raz
        cla[ci, 1] = rmat[0, 1] * rax + rmat[1, 1] * ray + rmat[2, 1] * raz
        cla[ci, 2] = rmat[0, 2] * rax + rmat[1, 2] * ray + rmat[2, 2] * raz
        cln[ci, 0] = rmat[0, 0] * nx + rmat[1, 0] * ny + rmat[2, 0] * nz
        cln[ci, 1] = rmat[0, 1] * nx + rmat[1, 1] * ny + rmat[2, 1] * nz
        cln[ci, 2] = rmat[0, 2] * nx + rmat[1, 2] * ny + rmat[2, 2] * nz
        _mat_from_quat(rmat, quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3])
        clb[ci, 0] = rmat[0, 0] * rbx + rmat[1, 0] * rby + rmat[2, 0] * rbz
        clb[ci, 1] = rmat[0, 1] * rbx + rmat[1, 1] * rby + rmat[2, 1] * rbz
        clb[ci, 2] = rmat[0, 2] * rbx + rmat[1, 2] * rby + rmat[2, 2] * rbz

    # -- warm start: cacc arrives holding last step's matched impulses ----
    # (applied after every restitution bias is captured, like the
    # reference path, so the bounce target sees pre-warm velocities)
    for ci in range(m):
        a0, a1, a2 = cacc[ci, 0], cacc[ci, 1], cacc[ci, 2]
        if a0 != 0.0 or a1 != 0.0 or a2 != 0.0:
            a = ca[ci]
            b = cb[ci]
            px = cnrm[ci, 0] * a0 + ct1[ci, 0] * a1 + ct2[ci, 0] * a2
            py = cnrm[ci, 1] * a0 + ct1[ci, 1] * a1 + ct2[ci, 1] * a2
            pz = cnrm[ci, 2] * a0 + ct1[ci, 2] * a1 + ct2[ci, 2] * a2
            _apply_impulse_rows(lin, ang, inv_mass, resp, a, b,
                                cra[ci, 0], cra[ci, 1], cra[ci, 2],
                                crb[ci, 0], crb[ci, 1], crb[ci, 2],
                                iiw[a], iiw[b], px, py, pz)

    # -- joint rows: freeze geometry and drive softening -----------------
    jaxw = np.empty((k, 3))      # world axis (from body a)
    jraw = np.empty((k, 3))      # anchor arm on a
    jrbw = np.empty((k, 3))      # anchor arm on b
    jk3 = np.empty((k, 3, 3))    # hinge point block / prismatic angular block
    jdet3 = np.empty(k)
    jb1 = np.empty((k, 3))       # hinge tangent pair / prismatic perp pair
    jb2 = np.empty((k, 3))
    jk2 = np.empty((k, 2, 2))    # hinge 2x2 angular lock
    jdet2 = np.empty(k)
    jkaxis = np.empty(k)         # hinge axial angular mass / prismatic axial
    jlim = np.empty(k, dtype=np.int8)   # 0 free, 1 at lo, 2 at hi
    jmb1 = np.empty(k)           # prismatic perpendicular effective masses
    jmb2 = np.empty(k)
    jacc_lo = np.zeros(k)
    jacc_hi = np.zeros(k)
    jd_has = np.empty(k, dtype=np.uint8)
    jd_gamma = np.empty(k)
    jd_bias = np.empty(k)
    jd_mass = np.empty(k)
    jd_acc = np.zeros(k)
    for ji in range(k):
        a = ja[ji]
        b = jb[ji]
        axx, axy, axz = _qrot(quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
                              jxa[ji, 0], jxa[ji, 1], jxa[ji, 2])
        jaxw[ji, 0], jaxw[ji, 1], jaxw[ji, 2] = axx, axy, axz
        oax, oay, oaz = _qrot(quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
                              jla[ji, 0], jla[ji, 1], jla[ji, 2])
        obx, oby, obz = _qrot(quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3],
                              jlb[ji, 0], jlb[ji, 1], jlb[ji, 2])
        pax = pos[a, 0] + oax
        pay = pos[a, 1] + oay
        paz = pos[a, 2] + oaz
        pbx = pos[b, 0] + obx
        pby = pos[b, 1] + oby
        pbz = pos[b, 2] + obz
        rax = pax - pos[a, 0]
        ray = pay - pos[a, 1]
        raz = paz - pos[a, 2]
        rbx = pbx - pos[b, 0]
        rby = pby - pos[b, 1]
        rbz = pbz - pos[b, 2]
        jraw[ji, 0], jraw[ji, 1], jraw[ji, 2] = rax, ray, raz
        jrbw[ji, 0], jrbw[ji, 1], jrbw[ji, 2] = rbx, rby, rbz
        ims = inv_mass[a] + inv_mass[b]
        isum = iiw[a] + iiw[b]
        if jkind[ji] == 0:
            # hinge: 3x3 point block, 2x2 angular lock off the axis
            _point_block_k(jk3[ji], ims, rax, ray, raz, iiw[a],
                           rbx, rby, rbz, iiw[b])
            jdet3[ji] = _det3(jk3[ji])
            b1x, b1y, b1z, b2x, b2y, b2z = _tangents(axx, axy, axz)
            jb1[ji, 0], jb1[ji, 1], jb1[ji, 2] = b1x, b1y, b1z
            jb2[ji, 0], jb2[ji, 1], jb2[ji, 2] = b2x, b2y, b2z
            jk2[ji, 0, 0] = _vec_mat3_vec(b1x, b1y, b1z, isum, b1x, b1y, b1z)
            jk2[ji, 0, 1] = _vec_mat3_vec(b1x, b1y, b1z, isum, b2x, b2y, b2z)
            jk2[ji, 1, 0] = _vec_mat3_vec(b2x, b2y, b2z, isum, b1x, b1y, b1z)
            jk2[ji, 1, 1] = _vec_mat3_vec(b2x, b2y, b2z, isum, b2x, b2y, b2z)
            jdet2[ji] = jk2[ji, 0, 0] * jk2[ji, 1, 1] - jk2[ji, 0, 1] * jk2[ji, 1, 0]
            jkaxis[ji] = _vec_mat3_vec(axx, axy, axz, isum, axx, axy, axz)
            q = _hinge_angle(quat, a, b, axx, axy, axz,
                             jrfa[ji, 0], jrfa[ji, 1], jrfa[ji, 2],
                             jrfb[ji, 0], jrfb[ji, 1], jrfb[ji, 2])
        else:
            # prismatic: full angular lock, two perpendicular point rows
            for r in range(3):
                for c in range(3):
                    jk3[ji, r, c] = isum[r, c]
            jdet3[ji] = _det3(jk3[ji])
            p1x, p1y, p1z, p2x, p2y, p2z = _tangents(axx, axy, axz)
            jb1[ji, 0], jb1[ji, 1], jb1[ji, 2] = p1x, p1y, p1z
            jb2[ji, 0], jb2[ji, 1], jb2[ji, 2] = p2x, p2y, p2z
            jmb1[ji] = _eff_mass(ims, rax, ray, raz, iiw[a],
                                 rbx, rby, rbz, iiw[b], p1x, p1y, p1z)
            jmb2[ji] = _eff_mass(ims, rax, ray, raz, iiw[a],
                                 rbx, rby, rbz, iiw[b], p2x, p2y, p2z)
            jkaxis[ji] = _eff_mass(ims, rax, ray, raz, iiw[a],
                                   rbx, rby, rbz, iiw[b], axx, axy, axz)
            q = ((pbx - pax) * axx + (pby - pay) * axy + (pbz - paz) * axz)
        jlim[ji] = 0
        if q <= jlo[ji]:
            jlim[ji] = 1
        elif q >= jhi[ji]:
            jlim[ji] = 2
        # PD drive as a soft row
        jd_has[ji] = 0
        gamma_raw = dt * (jkd[ji] + dt * jkp[ji])
        if (jkp[ji] != 0.0 or jkd[ji] != 0.0) and gamma_raw > 0.0:
            target = min(max(jtgt[ji], jlo[ji]), jhi[ji])
            if jkind[ji] == 0:
                k_inv = _vec_mat3_vec(axx, axy, axz, isum, axx, axy, axz)
            else:
                m_eff = jkaxis[ji]
                k_inv = 1.0 / m_eff if m_eff > 0.0 else 0.0
            jd_has[ji] = 1
            jd_gamma[ji] = 1.0 / gamma_raw
            jd_bias[ji] = (q - target) * dt * jkp[ji] * jd_gamma[ji]
            jd_mass[ji] = 1.0 / (k_inv + jd_gamma[ji])

    # -- interleaved velocity iterations ---------------------------------
    # Sweep direction alternates per iteration and per step (matching the
    # reference solver): a fixed order biases statically indeterminate
    # contact sets toward whichever row is solved first.
    total = vel_iters if k == 0 else max(vel_iters, joint_iters)
    for it in range(total):
        if (it * alternate + sweep0) % 2 == 0:
            jfirst, jlast, jstep = 0, k, 1
            cfirst, clast, cstep = 0, m, 1
        else:
            jfirst, jlast, jstep = k - 1, -1, -1
            cfirst, clast, cstep = m - 1, -1, -1
        if it < joint_iters:
            for ji in range(jfirst, jlast, jstep):
                a = ja[ji]
                b = jb[ji]
                axx, axy, axz = jaxw[ji, 0], jaxw[ji, 1], jaxw[ji, 2]
                rax, ray, raz = jraw[ji, 0], jraw[ji, 1], jraw[ji, 2]
                rbx, rby, rbz = jrbw[ji, 0], jrbw[ji, 1], jrbw[ji, 2]
                if jd_has[ji] == 1:
                    if jkind[ji] == 0:
                        cdot = ((ang[b, 0] - ang[a, 0]) * axx
                                + (ang[b, 1] - ang[a, 1]) * axy
                                + (ang[b, 2] - ang[a, 2]) * axz)
                    else:
                        vx, vy, vz = _rel_vel(lin, ang, a, b,
                                              rax, ray, raz, rbx, rby, rbz)
                        cdot = vx * axx + vy * axy + vz * axz
                    lam = -jd_mass[ji] * (cdot + jd_bias[ji]
                                          + jd_gamma[ji] * jd_acc[ji])
                    jd_acc[ji] += lam
                    if jkind[ji] == 0:
                        _apply_angular_rows(ang, resp, a, b, iiw[a], iiw[b],
                                            axx * lam, axy * lam, axz * lam)
                    else:
                        _apply_impulse_rows(lin, ang, inv_mass, resp, a, b,
                                            rax, ray, raz, rbx, rby, rbz,
                                            iiw[a], iiw[b],
                                            axx * lam, axy * lam, axz * lam)
                if jkind[ji] == 0:
                    # point constraint
                    if abs(jdet3[ji]) > 1e-12:
                        vx, vy, vz = _rel_vel(lin, ang, a, b,
                                              rax, ray, raz, rbx, rby, rbz)
                        px, py, pz = _solve3(jk3[ji], jdet3[ji], -vx, -vy, -vz)
                        _apply_impulse_rows(lin, ang, inv_mass, resp, a, b,
                                            rax, ray, raz, rbx, rby, rbz,
                                            iiw[a], iiw[b], px, py, pz)
                    # lock the two angular DoFs off the axis
                    if abs(jdet2[ji]) > 1e-14:
                        wrx = ang[b, 0] - ang[a, 0]
                        wry = ang[b, 1] - ang[a, 1]
                        wrz = ang[b, 2] - ang[a, 2]
                        c1 = wrx * jb1[ji, 0] + wry * jb1[ji, 1] + wrz * jb1[ji, 2]
                        c2 = wrx * jb2[ji, 0] + wry * jb2[ji, 1] + wrz * jb2[ji, 2]
                        inv = 1.0 / jdet2[ji]
                        l1 = (-c1 * jk2[ji, 1, 1] + c2 * jk2[ji, 0, 1]) * inv
                        l2 = (c1 * jk2[ji, 1, 0] - c2 * jk2[ji, 0, 0]) * inv
                        _apply_angular_rows(
                            ang, resp, a, b, iiw[a], iiw[b],
                            jb1[ji, 0] * l1 + jb2[ji, 0] * l2,
                            jb1[ji, 1] * l1 + jb2[ji, 1] * l2,
                            jb1[ji, 2] * l1 + jb2[ji, 2] * l2)
                    # limit clamp along the axis
                    if jkaxis[ji] > 1e-12 and jlim[ji] != 0:
                        cdot = ((ang[b, 0] - ang[a, 0]) * axx
                                + (ang[b, 1] - ang[a, 1]) * axy
                                + (ang[b, 2] - ang[a, 2]) * axz)
                        if jlim[ji] == 1:
                            lam = -cdot / jkaxis[ji]
                            new_acc = max(jacc_lo[ji] + lam, 0.0)
                            dl = new_acc - jacc_lo[ji]
                            jacc_lo[ji] = new_acc
                            _apply_angular_rows(ang, resp, a, b, iiw[a], iiw[b],
                                                axx * dl, axy * dl, axz * dl)
                        else:
                            lam = cdot / jkaxis[ji]
                            new_acc = max(jacc_hi[ji] + lam, 0.0)
                            dl = new_acc - jacc_hi[ji]
                            jacc_hi[ji] = new_acc
                            _apply_angular_rows(ang, resp, a, b, iiw[a], iiw[b],
                                                -axx * dl, -axy * dl, -axz * dl)
                else:
                    # prismatic: lock all relative rotation
                    if abs(jdet3[ji]) > 1e-14:
                        wrx = ang[b, 0] - ang[a, 0]
                        wry = ang[b, 1] - ang[a, 1]
                        wrz = ang[b, 2] - ang[a, 2]
                        px, py, pz = _solve3(jk3[ji], jdet3[ji],
                                             -wrx, -wry, -wrz)
                        _apply_angular_rows(ang, resp, a, b, iiw[a], iiw[b],
                                            px, py, pz)
                    # pin the two directions perpendicular to the axis
                    vx, vy, vz = _rel_vel(lin, ang, a, b,
                                          rax, ray, raz, rbx, rby, rbz)
                    cdot = vx * jb1[ji, 0] + vy * jb1[ji, 1] + vz * jb1[ji, 2]
                    s = -cdot * jmb1[ji]
                    _apply_impulse_rows(lin, ang, inv_mass, resp, a, b,
                                        rax, ray, raz, rbx, rby, rbz,
                                        iiw[a], iiw[b],
                                        jb1[ji, 0] * s, jb1[ji, 1] * s,
                                        jb1[ji, 2] * s)
                    vx, vy, vz = _rel_vel(lin, ang, a, b,
                                          rax, ray, raz, rbx, rby, rbz)
                    cdot = vx * jb2[ji, 0] + vy * jb2[ji, 1] + vz * jb2[ji, 2]
                    s = -cdot * jmb2[ji]
                    _apply_impulse_rows(lin, ang, inv_mass, resp, a, b,
                                        rax, ray, raz, rbx, rby, rbz,
                                        iiw[a], iiw[b],
                                        jb2[ji, 0] * s, jb2[ji, 1] * s,
                                        jb2[ji, 2] * s)
                    # translation limit clamp
                    if jkaxis[ji] > 0.0 and jlim[ji] != 0:
                        vx, vy, vz = _rel_vel(lin, ang, a, b,
                                              rax, ray, raz, rbx, rby, rbz)
                        qdot = vx * axx + vy * axy + vz * axz
                        if jlim[ji] == 1:
                            lam = -qdot * jkaxis[ji]
                            new_acc = max(jacc_lo[ji] + lam, 0.0)
                            dl = new_acc - jacc_lo[ji]
                            jacc_lo[ji] = new_acc
                            _apply_impulse_rows(lin, ang, inv_mass, resp, a, b,
                                                rax, ray, raz, rbx, rby, rbz,
                                                iiw[a], iiw[b],
                                                axx * dl, axy * dl, axz * dl)
                        else:
                            lam = qdot * jkaxis[ji]
                            new_acc = max(jacc_hi[ji] + lam, 0.0)
                            dl = new_acc - jacc_hi[ji]
                            jacc_hi[ji] = new_acc
                            _apply_impulse_rows(lin, ang, inv_mass, resp, a, b,
                                                rax, ray, raz, rbx, rby, rbz,
                                                iiw[a], iiw[b],
                                                -axx * dl, -axy * dl, -axz * dl)
        if it < vel_iters:
            for ci in range(cfirst, clast, cstep):
                a = ca[ci]
                b = cb[ci]
                rax, ray, raz = cra[ci, 0], cra[ci, 1], cra[ci, 2]
                rbx, rby, rbz = crb[ci, 0], crb[ci, 1], crb[ci, 2]
                nx, ny, nz = cnrm[ci, 0], cnrm[ci, 1], cnrm[ci, 2]
                vx, vy, vz = _rel_vel(lin, ang, a, b,
                                      rax, ray, raz, rbx, rby, rbz)
                vn = vx * nx + vy * ny + vz * nz
                lam = -(vn - cbias[ci]) * cmn[ci]
                new_acc = max(cacc[ci, 0] + lam, 0.0)
                dl = new_acc - cacc[ci, 0]
                cacc[ci, 0] = new_acc
                _apply_impulse_rows(lin, ang, inv_mass, resp, a, b,
                                    rax, ray, raz, rbx, rby, rbz,
                                    iiw[a], iiw[b], nx * dl, ny * dl, nz * dl)
                max_f = cfric[ci] * cacc[ci, 0]
                for t in range(2):
                    if t == 0:
                        tx, ty, tz = ct1[ci, 0], ct1[ci, 1], ct1[ci, 2]
                        mass_t = cmt1[ci]
                        acc = cacc[ci, 1]
                    else:
                        tx, ty, tz = ct2[ci, 0], ct2[ci, 1], ct2[ci, 2]
                        mass_t = cmt2[ci]
                        acc = cacc[ci, 2]
                    vx, vy, vz = _rel_vel(lin, ang, a, b,
                                          rax, ray, raz, rbx, rby, rbz)
                    vt = vx * tx + vy * ty + vz * tz
                    lam_t = -vt * mass_t
                    new_t = min(max(acc + lam_t, -max_f), max_f)
                    dl_t = new_t - acc
                    cacc[ci, 1 + t] = new_t
                    _apply_impulse_rows(lin, ang, inv_mass, resp, a, b,
                                        rax, ray, raz, rbx, rby, rbz,
                                        iiw[a], iiw[b],
                                        tx * dl_t, ty * dl_t, tz * dl_t)

    # -- integrate positions ----------------------------------------------
    for i in range(n):
        if resp[i] == 1 or kine[i] == 1:
            pos[i, 0] += lin[i, 0] * dt
            pos[i, 1] += lin[i, 1] * dt
            pos[i, 2] += lin[i, 2] * dt
            if ang[i, 0] != 0.0 or ang[i, 1] != 0.0 or ang[i, 2] != 0.0:
                quat[i, 0], quat[i, 1], quat[i, 2], quat[i, 3] = _quat_step(
                    quat[i, 0], quat[i, 1], quat[i, 2], quat[i, 3],
                    ang[i, 0], ang[i, 1], ang[i, 2], dt)

    # -- position iterations (geometry fresh every pass) -----------------
    mia = np.empty((3, 3))
    mib = np.empty((3, 3))
    kmat = np.empty((3, 3))
    isum = np.empty((3, 3))
    for it in range(pos_iters):
        if (it * alternate + sweep0) % 2 == 0:
            jfirst, jlast, jstep = 0, k, 1
            cfirst, clast, cstep = 0, m, 1
        else:
            jfirst, jlast, jstep = k - 1, -1, -1
            cfirst, clast, cstep = m - 1, -1, -1
        for ji in range(jfirst, jlast, jstep):
            a = ja[ji]
            b = jb[ji]
            if jkind[ji] == 0:
                _hinge_position_row(pos, quat, inv_mass, inv_diag, resp,
                                    a, b, ji, jla, jlb, jxa, jxb, jrfa, jrfb,
                                    jlo, jhi, max_corr, mia, mib, kmat, isum)
            else:
                _prismatic_position_row(pos, quat, inv_mass, inv_diag, resp,
                                        a, b, ji, jla, jlb, jxa, jrel0,
                                        jlo, jhi, max_corr, mia, mib, kmat,
                                        isum)
        for ci in range(cfirst, clast, cstep):
            a = ca[ci]
            b = cb[ci]
            _contact_position_row(pos, quat, inv_mass, inv_diag, resp,
                                  a, b, ci, cla, clb, cln, cpen,
                                  baumgarte, slop, max_corr, mia, mib)

    # -- accumulated contact force ----------------------------------------
    for ci in range(m):
        a = ca[ci]
        b = cb[ci]
        for d in range(3):
            imp = (cnrm[ci, d] * cacc[ci, 0] + ct1[ci, d] * cacc[ci, 1]
                   + ct2[ci, d] * cacc[ci, 2])
            cforce[a, d] -= imp / dt
            cforce[b, d] += imp / dt


@njit(cache=True)
def _hinge_position_row(pos, quat, inv_mass, inv_diag, resp, a, b, ji,
                        jla, jlb, jxa, jxb, jrfa, jrfb, jlo, jhi,
                        max_corr, mia, mib, kmat, isum):
    # free-coordinate snapshot before any correction touches the pair
    ax0x, ax0y, ax0z = _qrot(quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
                             jxa[ji, 0], jxa[ji, 1], jxa[ji, 2])
    angle_pre = _hinge_angle(quat, a, b, ax0x, ax0y, ax0z,
                             jrfa[ji, 0], jrfa[ji, 1], jrfa[ji, 2],
                             jrfb[ji, 0], jrfb[ji, 1], jrfb[ji, 2])
    # pull the anchor points back together in all three directions
    _iiw_into(mia, quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
              inv_diag[a, 0], inv_diag[a, 1], inv_diag[a, 2], resp[a] == 1)
    _iiw_into(mib, quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3],
              inv_diag[b, 0], inv_diag[b, 1], inv_diag[b, 2], resp[b] == 1)
    oax, oay, oaz = _qrot(quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
                          jla[ji, 0], jla[ji, 1], jla[ji, 2])
    obx, oby, obz = _qrot(quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3],
                          jlb[ji, 0], jlb[ji, 1], jlb[ji, 2])
    pax = pos[a, 0] + oax
    pay = pos[a, 1] + oay
    paz = pos[a, 2] + oaz
    pbx = pos[b, 0] + obx
    pby = pos[b, 1] + oby
    pbz = pos[b, 2] + obz
    rax = pax - pos[a, 0]
    ray = pay - pos[a, 1]
    raz = paz - pos[a, 2]
    rbx = pbx - pos[b, 0]
    rby = pby - pos[b, 1]
    rbz = pbz - pos[b, 2]
    ims = inv_mass[a] + inv_mass[b]
    _point_block_k(kmat, ims, rax, ray, raz, mia, rbx, rby, rbz, mib)
    cx = pbx - pax
    cy = pby - pay
    cz = pbz - paz
    err = np.sqrt(cx * cx + cy * cy + cz * cz)
    det = _det3(kmat)
    if err > 1e-12 and abs(det) > 1e-12:
        if err > max_corr:
            s = max_corr / err
            cx *= s
            cy *= s
            cz *= s
        px, py, pz = _solve3(kmat, det, -cx, -cy, -cz)
        _apply_positional(pos, quat, inv_mass, resp, a, b,
                          rax, ray, raz, rbx, rby, rbz, mia, mib, px, py, pz)

    # realign the axes, then clamp the angle into its limits
    _iiw_into(mia, quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
              inv_diag[a, 0], inv_diag[a, 1], inv_diag[a, 2], resp[a] == 1)
    _iiw_into(mib, quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3],
              inv_diag[b, 0], inv_diag[b, 1], inv_diag[b, 2], resp[b] == 1)
    for r in range(3):
        for c in range(3):
            isum[r, c] = mia[r, c] + mib[r, c]
    axax, axay, axaz = _qrot(quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
                             jxa[ji, 0], jxa[ji, 1], jxa[ji, 2])
    axbx, axby, axbz = _qrot(quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3],
                             jxb[ji, 0], jxb[ji, 1], jxb[ji, 2])
    # relative rotation by +err turns axis_b toward axis_a:
    # (axis_b x axis_a) x axis_b = axis_a - axis_b cos(theta)
    ex, ey, ez = _cross(axbx, axby, axbz, axax, axay, axaz)
    det = _det3(isum)
    if np.sqrt(ex * ex + ey * ey + ez * ez) > 1e-12 and abs(det) > 1e-14:
        px, py, pz = _solve3(isum, det, ex, ey, ez)
        _apply_angular_positional(quat, resp, a, b, mia, mib, px, py, pz)

    # rotation about the hinge axis moves neither the anchors nor the axis
    # alignment, so any angle change the corrections above introduced is
    # drift in the free coordinate; left in, it acts as phantom stiffness
    # that lets the drive under-deliver real torque.  Counter-rotate each
    # body about its own anchor point, split by angular mobility.
    axx, axy, axz = _qrot(quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
                          jxa[ji, 0], jxa[ji, 1], jxa[ji, 2])
    k_axis0 = _vec_mat3_vec(axx, axy, axz, isum, axx, axy, axz)
    if k_axis0 > 1e-12:
        drift = _hinge_angle(quat, a, b, axx, axy, axz,
                             jrfa[ji, 0], jrfa[ji, 1], jrfa[ji, 2],
                             jrfb[ji, 0], jrfb[ji, 1], jrfb[ji, 2]) - angle_pre
        drift = np.arctan2(np.sin(drift), np.cos(drift))
        if drift != 0.0:
            oax, oay, oaz = _qrot(quat[a, 0], quat[a, 1], quat[a, 2],
                                  quat[a, 3],
                                  jla[ji, 0], jla[ji, 1], jla[ji, 2])
            obx, oby, obz = _qrot(quat[b, 0], quat[b, 1], quat[b, 2],
                                  quat[b, 3],
                                  jlb[ji, 0], jlb[ji, 1], jlb[ji, 2])
            sa = _vec_mat3_vec(axx, axy, axz, mia, axx, axy, axz) / k_axis0
            sb = _vec_mat3_vec(axx, axy, axz, mib, axx, axy, axz) / k_axis0
            if resp[a] == 1 and abs(drift * sa) >= 1e-15:
                _rotate_about_point(pos, quat, a,
                                    pos[a, 0] + oax, pos[a, 1] + oay,
                                    pos[a, 2] + oaz,
                                    axx, axy, axz, drift * sa)
            if resp[b] == 1 and abs(drift * sb) >= 1e-15:
                _rotate_about_point(pos, quat, b,
                                    pos[b, 0] + obx, pos[b, 1] + oby,
                                    pos[b, 2] + obz,
                                    axx, axy, axz, -drift * sb)

    axx, axy, axz = _qrot(quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
                          jxa[ji, 0], jxa[ji, 1], jxa[ji, 2])
    angle = _hinge_angle(quat, a, b, axx, axy, axz,
                         jrfa[ji, 0], jrfa[ji, 1], jrfa[ji, 2],
                         jrfb[ji, 0], jrfb[ji, 1], jrfb[ji, 2])
    k_axis = _vec_mat3_vec(axx, axy, axz, isum, axx, axy, axz)
    if k_axis <= 1e-12:
        return
    violation = 0.0
    if angle < jlo[ji]:
        violation = jlo[ji] - angle  # rotate b forward about the axis
    elif angle > jhi[ji]:
        violation = jhi[ji] - angle
    if violation != 0.0:
        step = max(min(violation, 0.2), -0.2)
        s = step / k_axis
        _apply_angular_positional(quat, resp, a, b, mia, mib,
                                  axx * s, axy * s, axz * s)


@njit(cache=True)
def _prismatic_position_row(pos, quat, inv_mass, inv_diag, resp, a, b, ji,
                            jla, jlb, jxa, jrel0, jlo, jhi, max_corr,
                            mia, mib, kmat, isum):
    _iiw_into(mia, quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
              inv_diag[a, 0], inv_diag[a, 1], inv_diag[a, 2], resp[a] == 1)
    _iiw_into(mib, quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3],
              inv_diag[b, 0], inv_diag[b, 1], inv_diag[b, 2], resp[b] == 1)
    for r in range(3):
        for c in range(3):
            isum[r, c] = mia[r, c] + mib[r, c]
    # restore the construction-time relative orientation
    tw, tx, ty, tz = _qmul(quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
                           jrel0[ji, 0], jrel0[ji, 1], jrel0[ji, 2],
                           jrel0[ji, 3])
    dw, dx, dy, dz = _qmul(quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3],
                           tw, -tx, -ty, -tz)
    if dw < 0.0:
        dw, dx, dy, dz = -dw, -dx, -dy, -dz
    rex = 2.0 * dx
    rey = 2.0 * dy
    rez = 2.0 * dz
    det = _det3(isum)
    if np.sqrt(rex * rex + rey * rey + rez * rez) > 1e-12 and abs(det) > 1e-14:
        px, py, pz = _solve3(isum, det, -rex, -rey, -rez)
        _apply_angular_positional(quat, resp, a, b, mia, mib, px, py, pz)

    oax, oay, oaz = _qrot(quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
                          jla[ji, 0], jla[ji, 1], jla[ji, 2])
    obx, oby, obz = _qrot(quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3],
                          jlb[ji, 0], jlb[ji, 1], jlb[ji, 2])
    pax = pos[a, 0] + oax
    pay = pos[a, 1] + oay
    paz = pos[a, 2] + oaz
    pbx = pos[b, 0] + obx
    pby = pos[b, 1] + oby
    pbz = pos[b, 2] + obz
    axx, axy, axz = _qrot(quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
                          jxa[ji, 0], jxa[ji, 1], jxa[ji, 2])
    p1x, p1y, p1z, p2x, p2y, p2z = _tangents(axx, axy, axz)
    sx = pbx - pax
    sy = pby - pay
    sz = pbz - paz
    d1 = sx * p1x + sy * p1y + sz * p1z
    d2 = sx * p2x + sy * p2y + sz * p2z
    q = sx * axx + sy * axy + sz * axz
    along = 0.0
    if q < jlo[ji]:
        along = q - jlo[ji]
    elif q > jhi[ji]:
        along = q - jhi[ji]
    cx = p1x * d1 + p2x * d2 + axx * along
    cy = p1y * d1 + p2y * d2 + axy * along
    cz = p1z * d1 + p2z * d2 + axz * along
    err = np.sqrt(cx * cx + cy * cy + cz * cz)
    if err <= 1e-12:
        return
    rax = pax - pos[a, 0]
    ray = pay - pos[a, 1]
    raz = paz - pos[a, 2]
    rbx = pbx - pos[b, 0]
    rby = pby - pos[b, 1]
    rbz = pbz - pos[b, 2]
    ims = inv_mass[a] + inv_mass[b]
    _point_block_k(kmat, ims, rax, ray, raz, mia, rbx, rby, rbz, mib)
    det = _det3(kmat)
    if abs(det) <= 1e-12:
        return
    if err > max_corr:
        s = max_corr / err
        cx *= s
        cy *= s
        cz *= s
    px, py, pz = _solve3(kmat, det, -cx, -cy, -cz)
    _apply_positional(pos, quat, inv_mass, resp, a, b,
                      rax, ray, raz, rbx, rby, rbz, mia, mib, px, py, pz)


@njit(cache=True)
def _contact_position_row(pos, quat, inv_mass, inv_diag, resp, a, b, ci,
                          cla, clb, cln, cpen, baumgarte, slop, max_corr,
                          mia, mib):
    ra_mat = np.empty((3, 3))
    rb_mat = np.empty((3, 3))
    _mat_from_quat(ra_mat, quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3])
    _mat_from_quat(rb_mat, quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3])
    oax, oay, oaz = _mat3_vec(ra_mat, cla[ci, 0], cla[ci, 1], cla[ci, 2])
    obx, oby, obz = _mat3_vec(rb_mat, clb[ci, 0], clb[ci, 1], clb[ci, 2])
    pax = pos[a, 0] + oax
    pay = pos[a, 1] + oay
    paz = pos[a, 2] + oaz
    pbx = pos[b, 0] + obx
    pby = pos[b, 1] + oby
    pbz = pos[b, 2] + obz
    nx, ny, nz = _mat3_vec(ra_mat, cln[ci, 0], cln[ci, 1], cln[ci, 2])
    # anchors coincided at build; positive drift along n reduces overlap
    pen_now = cpen[ci] - ((pbx - pax) * nx + (pby - pay) * ny
                          + (pbz - paz) * nz)
    c_err = baumgarte * (pen_now - slop)
    if c_err <= 0.0:
        return
    c_err = min(c_err, max_corr)
    rax = pax - pos[a, 0]
    ray = pay - pos[a, 1]
    raz = paz - pos[a, 2]
    rbx = pbx - pos[b, 0]
    rby = pby - pos[b, 1]
    rbz = pbz - pos[b, 2]
    _iiw_into(mia, quat[a, 0], quat[a, 1], quat[a, 2], quat[a, 3],
              inv_diag[a, 0], inv_diag[a, 1], inv_diag[a, 2], resp[a] == 1)
    _iiw_into(mib, quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3],
              inv_diag[b, 0], inv_diag[b, 1], inv_diag[b, 2], resp[b] == 1)
    ims = inv_mass[a] + inv_mass[b]
    mass_n = _eff_mass(ims, rax, ray, raz, mia, rbx, rby, rbz, mib,
                       nx, ny, nz)
    s = c_err * mass_n
    _apply_positional(pos, quat, inv_mass, resp, a, b,
                      rax, ray, raz, rbx, rby, rbz, mia, mib,
                      nx * s, ny * s, nz * s)
