import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from microverse.vecmath import (
    integrate_orientation,
    norm,
    normalized,
    orthonormal_tangents,
    quat,
    quat_conjugate,
    quat_from_axis_angle,
    quat_mul,
    quat_normalize,
    quat_rotate,
    quat_to_matrix,
    vec3,
)


def test_vec3_defaults_to_zero():
    v = vec3()
    assert v.shape == (3,)
    assert np.all(v == 0.0)


def test_norm_and_normalized():
    v = vec3(3.0, 4.0, 0.0)
    assert norm(v) == 5.0
    u = normalized(v)
    assert np.allclose(u, [0.6, 0.8, 0.0])


def test_normalized_zero_vector_raises():
    with pytest.raises(ValueError):
        normalized(vec3())


def test_quat_rotate_matches_matrix():
    q = quat_from_axis_angle(vec3(0.0, 0.0, 1.0), math.pi / 2.0)
    v = vec3(1.0, 0.0, 0.0)
    # 90 degrees about z sends x to y
    assert np.allclose(quat_rotate(q, v), [0.0, 1.0, 0.0], atol=1e-12)
    assert np.allclose(quat_to_matrix(q) @ v, quat_rotate(q, v), atol=1e-12)


def test_quat_mul_composes_rotations():
    qa = quat_from_axis_angle(vec3(1.0, 0.0, 0.0), 0.3)
    qb = quat_from_axis_angle(vec3(0.0, 1.0, 0.0), -0.7)
    v = vec3(0.2, -1.1, 0.5)
    once = quat_rotate(quat_mul(qa, qb), v)
    twice = quat_rotate(qa, quat_rotate(qb, v))
    assert np.allclose(once, twice, atol=1e-12)


def test_quat_conjugate_inverts_unit_rotation():
    q = quat_from_axis_angle(normalized(vec3(1.0, 2.0, 3.0)), 1.1)
    v = vec3(0.4, 0.5, -0.6)
    assert np.allclose(quat_rotate(quat_conjugate(q), quat_rotate(q, v)), v, atol=1e-12)


def test_integrate_orientation_small_step_matches_axis_angle():
    q0 = quat(1.0, 0.0, 0.0, 0.0)
    omega = vec3(0.0, 0.0, 2.0)
    dt = 1e-4
    q1 = integrate_orientation(q0, omega, dt)
    q_exact = quat_from_axis_angle(vec3(0.0, 0.0, 1.0), 2.0 * dt)
    assert np.allclose(q1, q_exact, atol=1e-9)
    assert abs(norm(q1) - 1.0) < 1e-12


def test_integrate_orientation_accumulates_full_turn():
    # one radian per second about x for ~2*pi seconds comes back around
    q = quat(1.0, 0.0, 0.0, 0.0)
    dt = 2.0 * math.pi / 10000.0
    for _ in range(10000):
        q = integrate_orientation(q, vec3(1.0, 0.0, 0.0), dt)
    v = quat_rotate(q, vec3(0.0, 1.0, 0.0))
    assert np.allclose(v, [0.0, 1.0, 0.0], atol=1e-5)


unit_vectors = st.builds(
    lambda x, y, z: (x, y, z),
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1),
).filter(lambda t: 1e-3 < math.sqrt(t[0] ** 2 + t[1] ** 2 + t[2] ** 2) <= 1.8)


@given(unit_vectors)
def test_orthonormal_tangents_frame(t):
    n = normalized(vec3(*t))
    t1, t2 = orthonormal_tangents(n)
    assert abs(norm(t1) - 1.0) < 1e-9
    assert abs(norm(t2) - 1.0) < 1e-9
    assert abs(np.dot(t1, n)) < 1e-9
    assert abs(np.dot(t2, n)) < 1e-9
    # right-handed: t1 x t2 == n
    assert np.allclose(np.cross(t1, t2), n, atol=1e-9)


@given(unit_vectors, st.floats(-math.pi, math.pi))
def test_quat_rotation_preserves_length(t, angle):
    axis = normalized(vec3(*t))
    q = quat_from_axis_angle(axis, angle)
    v = vec3(0.3, -0.4, 1.2)
    assert abs(norm(quat_rotate(q, v)) - norm(v)) < 1e-9


def test_quat_normalize_rejects_zero():
    with pytest.raises(ValueError):
        quat_normalize(np.zeros(4))
