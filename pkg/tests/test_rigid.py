import math

import numpy as np
import pytest

from microverse.errors import NotFound, SimulationDiverged, UnsupportedShapePair
from microverse.rigid import (
    Box,
    Capsule,
    Contact,
    Drive,
    Material,
    RigidWorld,
    Sphere,
    StaticPlane,
    apply_joint_drives,
    detect_contacts,
    integrate_bodies,
    query_rigid_state,
    shape_inertia_diag,
    solve_contacts,
)
from microverse.vecmath import norm, quat_from_axis_angle, quat_rotate, vec3

DT = 1.0 / 60.0
G = 9.81


def make_world(gravity=(0.0, 0.0, -G)):
    return RigidWorld(gravity=gravity)


def add_ground(world):
    return world.add_body(StaticPlane((0.0, 0.0, 1.0), 0.0), position=(0, 0, 0), mass=0.0)


# ---------------------------------------------------------------------------
# integration


def test_free_fall_single_step():
    # semi-implicit Euler: v1 = -g*dt, z1 = z0 + v1*dt
    w = make_world()
    bid = w.add_body(Sphere(0.1), position=(0, 0, 1.0), mass=1.0)
    w.step(DT)
    b = w.body(bid)
    assert b.linear_velocity[2] == pytest.approx(-G * DT, abs=1e-15)
    assert b.linear_velocity[2] == pytest.approx(-0.16350, abs=1e-12)
    assert b.position[2] == pytest.approx(1.0 - G * DT * DT, abs=1e-15)
    assert b.position[2] - 1.0 == pytest.approx(-0.0027250, abs=1e-12)


def test_free_fall_closed_form_many_steps():
    # z_n = z0 - g*dt^2 * n*(n+1)/2 for semi-implicit Euler from rest
    w = make_world()
    bid = w.add_body(Sphere(0.05), position=(0, 0, 10.0), mass=2.0)
    n = 60
    for _ in range(n):
        w.step(DT)
    b = w.body(bid)
    expected = 10.0 - G * DT * DT * n * (n + 1) / 2.0
    assert b.position[2] == pytest.approx(expected, abs=1e-9)
    assert b.linear_velocity[2] == pytest.approx(-G * DT * n, abs=1e-9)


def test_integrate_bodies_op_matches_step_without_contacts():
    w1 = make_world()
    w2 = make_world()
    for w in (w1, w2):
        w.add_body(Box((0.1, 0.2, 0.3)), position=(0, 0, 5.0), mass=1.5,
                   velocity=(0.3, -0.1, 0.0), angular_velocity=(0.0, 2.0, 0.5))
    w1.step(DT)
    integrate_bodies(w2, (0.0, 0.0, -G), DT)
    a, b = w1.body(0), w2.body(0)
    assert np.array_equal(a.position, b.position)
    assert np.array_equal(a.orientation, b.orientation)
    assert np.array_equal(a.linear_velocity, b.linear_velocity)


def test_static_body_never_moves():
    w = make_world()
    bid = w.add_body(Box((1.0, 1.0, 0.1)), position=(0, 0, 0), mass=0.0)
    w.add_body(Sphere(0.1), position=(0, 0, 0.3), mass=1.0)
    for _ in range(60):
        w.step(DT)
    b = w.body(bid)
    assert np.array_equal(b.position, vec3(0, 0, 0))
    assert np.array_equal(b.linear_velocity, vec3())


def test_kinematic_body_moves_by_set_velocity_and_ignores_impulses():
    w = make_world()
    kid = w.add_body(Box((0.5, 0.5, 0.05)), position=(0, 0, 0), mass=5.0,
                     kinematic=True, velocity=(0.2, 0.0, 0.0))
    w.add_body(Sphere(0.1), position=(0, 0, 0.149), mass=1.0)  # resting on top
    w.step(DT)
    k = w.body(kid)
    assert k.position[0] == pytest.approx(0.2 * DT, abs=1e-15)
    assert k.linear_velocity[0] == 0.2  # gravity and contacts leave it alone
    assert k.linear_velocity[2] == 0.0


def test_diverged_state_raises():
    w = make_world()
    bid = w.add_body(Sphere(0.1), position=(0, 0, 1.0), mass=1.0)
    w.body(bid).linear_velocity = vec3(math.inf, 0.0, 0.0)
    with pytest.raises(SimulationDiverged):
        w.step(DT)


# ---------------------------------------------------------------------------
# narrowphase


def test_sphere_plane_contact_geometry():
    w = make_world()
    add_ground(w)
    w.add_body(Sphere(0.1), position=(0.3, -0.2, 0.05), mass=1.0)
    cs = detect_contacts(w)
    assert len(cs) == 1
    c = cs[0]
    assert c.body_a == 0 and c.body_b == 1
    assert np.allclose(c.normal, [0, 0, 1])
    assert c.penetration == pytest.approx(0.05, abs=1e-12)


def test_sphere_sphere_contact_geometry():
    w = make_world()
    w.add_body(Sphere(0.1), position=(0, 0, 0), mass=1.0)
    w.add_body(Sphere(0.1), position=(0.15, 0, 0), mass=1.0)
    cs = detect_contacts(w)
    assert len(cs) == 1
    assert np.allclose(cs[0].normal, [1, 0, 0])
    assert cs[0].penetration == pytest.approx(0.05, abs=1e-12)
    assert np.allclose(cs[0].point, [0.075, 0, 0])


def test_sphere_box_face_contact():
    w = make_world()
    w.add_body(Box((0.5, 0.5, 0.5)), position=(0, 0, 0), mass=0.0)
    w.add_body(Sphere(0.1), position=(0.55, 0, 0), mass=1.0)
    cs = detect_contacts(w)
    assert len(cs) == 1
    assert np.allclose(cs[0].normal, [1, 0, 0])
    assert cs[0].penetration == pytest.approx(0.05, abs=1e-12)


def test_sphere_center_inside_box_resolves_to_nearest_face():
    w = make_world()
    w.add_body(Box((0.5, 0.5, 0.5)), position=(0, 0, 0), mass=0.0)
    w.add_body(Sphere(0.1), position=(0.45, 0, 0), mass=1.0)
    cs = detect_contacts(w)
    assert len(cs) == 1
    assert np.allclose(cs[0].normal, [1, 0, 0])
    assert cs[0].penetration == pytest.approx(0.15, abs=1e-12)


def test_sphere_capsule_side_contact():
    w = make_world()
    w.add_body(Capsule(0.1, 0.2), position=(0, 0, 0), mass=0.0)
    w.add_body(Sphere(0.1), position=(0.15, 0, 0.1), mass=1.0)
    cs = detect_contacts(w)
    assert len(cs) == 1
    assert np.allclose(cs[0].normal, [1, 0, 0])
    assert cs[0].penetration == pytest.approx(0.05, abs=1e-12)
    assert np.allclose(cs[0].point, [0.075, 0, 0.1])


def test_capsule_box_end_contact():
    w = make_world()
    w.add_body(Box((0.5, 0.5, 0.25)), position=(0, 0, 0), mass=0.0)
    w.add_body(Capsule(0.1, 0.2), position=(0, 0, 0.5), mass=1.0)
    cs = detect_contacts(w)
    assert len(cs) == 1
    assert np.allclose(cs[0].normal, [0, 0, 1])  # box -> capsule
    assert cs[0].penetration == pytest.approx(0.05, abs=1e-12)
    assert np.allclose(cs[0].point, [0, 0, 0.25], atol=1e-12)


def test_capsule_box_lying_contact_gives_two_points():
    w = make_world()
    w.add_body(Box((0.5, 0.5, 0.25)), position=(0, 0, 0), mass=0.0)
    q = quat_from_axis_angle(vec3(0, 1, 0), math.pi / 2)  # capsule axis along x
    w.add_body(Capsule(0.1, 0.2), position=(0, 0, 0.3), orientation=q, mass=1.0)
    cs = detect_contacts(w)
    assert len(cs) == 2
    for c in cs:
        assert np.allclose(c.normal, [0, 0, 1], atol=1e-9)
        assert c.penetration == pytest.approx(0.05, abs=1e-9)


def test_box_plane_four_corner_contacts():
    w = make_world()
    add_ground(w)
    w.add_body(Box((0.1, 0.1, 0.1)), position=(0, 0, 0.08), mass=1.0)
    cs = detect_contacts(w)
    assert len(cs) == 4
    for c in cs:
        assert c.penetration == pytest.approx(0.02, abs=1e-12)


def test_capsule_plane_two_end_contacts():
    w = make_world()
    add_ground(w)
    q = quat_from_axis_angle(vec3(0, 1, 0), math.pi / 2)
    w.add_body(Capsule(0.1, 0.3), position=(0, 0, 0.05), orientation=q, mass=1.0)
    cs = detect_contacts(w)
    assert len(cs) == 2


def test_contacts_ordered_by_body_ids():
    w = make_world()
    add_ground(w)
    for i in range(4):
        w.add_body(Sphere(0.1), position=(0.5 * i, 0, 0.05), mass=1.0)
    pairs = [(c.body_a, c.body_b) for c in detect_contacts(w)]
    assert pairs == sorted(pairs)
    assert all(a < b for a, b in pairs)


def test_collision_group_filters_pairs():
    w = make_world()
    w.add_body(Sphere(0.1), position=(0, 0, 0), mass=1.0, collision_group=5)
    w.add_body(Sphere(0.1), position=(0.1, 0, 0), mass=1.0, collision_group=5)
    assert detect_contacts(w) == []
    w.body(1).collision_group = 0
    assert len(detect_contacts(w)) == 1


def test_unsupported_overlapping_pair_raises():
    w = make_world()
    w.add_body(Box((0.2, 0.2, 0.2)), position=(0, 0, 0), mass=1.0)
    w.add_body(Box((0.2, 0.2, 0.2)), position=(0.1, 0, 0), mass=1.0)
    with pytest.raises(UnsupportedShapePair):
        detect_contacts(w)


def test_unsupported_separated_pair_is_tolerated():
    w = make_world((0, 0, 0))
    w.add_body(Box((0.2, 0.2, 0.2)), position=(0, 0, 0), mass=1.0)
    w.add_body(Box((0.2, 0.2, 0.2)), position=(5.0, 0, 0), mass=1.0)
    assert detect_contacts(w) == []
    w.step(DT)  # steps fine while separated


def test_static_pairs_are_skipped():
    w = make_world()
    add_ground(w)
    w.add_body(Box((0.5, 0.5, 0.5)), position=(0, 0, 0), mass=0.0)  # embedded in ground
    assert detect_contacts(w) == []


# ---------------------------------------------------------------------------
# contact response


def test_resting_sphere_penetration_stays_within_slop():
    w = make_world()
    add_ground(w)
    bid = w.add_body(Sphere(0.1), position=(0, 0, 0.1005), mass=1.0)
    for _ in range(100):
        w.step(DT)
    b = w.body(bid)
    pen = 0.1 - b.position[2]
    assert pen <= w.params.slop + 1e-4
    assert norm(b.linear_velocity) < 1e-3


def test_position_correction_injects_no_kinetic_energy():
    # body starts overlapping and at rest with gravity off: the corrector
    # must move it out without giving it any velocity
    w = make_world((0, 0, 0))
    add_ground(w)
    bid = w.add_body(Sphere(0.1), position=(0, 0, 0.08), mass=1.0)
    w.step(DT)
    b = w.body(bid)
    assert w.kinetic_energy() == 0.0
    assert norm(b.linear_velocity) == 0.0
    assert b.position[2] > 0.08  # moved outward


def test_momentum_conserved_in_collision():
    w = make_world((0, 0, 0))
    a = w.add_body(Sphere(0.1), position=(-0.095, 0, 0), mass=1.0,
                   velocity=(1.0, 0, 0), material=Material(restitution=0.3))
    b = w.add_body(Sphere(0.1), position=(0.095, 0, 0), mass=3.0,
                   velocity=(-0.5, 0.2, 0), material=Material(restitution=0.3))
    p_before = (w.body(a).mass * w.body(a).linear_velocity
                + w.body(b).mass * w.body(b).linear_velocity)
    for _ in range(5):
        w.step(DT)
    p_after = (w.body(a).mass * w.body(a).linear_velocity
               + w.body(b).mass * w.body(b).linear_velocity)
    assert np.allclose(p_before, p_after, atol=1e-10)


def test_restitution_bounce_speed():
    w = make_world()
    add_ground(w)
    bid = w.add_body(Sphere(0.1), position=(0, 0, 0.5), mass=1.0,
                     material=Material(restitution=1.0))
    impact = 0.0
    rebound = 0.0
    for _ in range(90):
        w.step(DT)
        vz = w.body(bid).linear_velocity[2]
        impact = min(impact, vz)
        rebound = max(rebound, vz)
    assert impact < -2.5
    # approach speed is sampled after the contact step's gravity kick,
    # so a perfectly elastic rebound carries one extra g*dt
    assert rebound == pytest.approx(-impact + G * DT, rel=0.01)


def test_slow_contact_does_not_bounce():
    w = make_world()
    add_ground(w)
    bid = w.add_body(Sphere(0.1), position=(0, 0, 0.102), mass=1.0,
                     material=Material(restitution=1.0))
    for _ in range(60):
        w.step(DT)
    # approach speed stayed under the restitution threshold: it settles
    assert w.body(bid).position[2] < 0.102
    assert abs(w.body(bid).linear_velocity[2]) < 0.05


def test_contact_force_balances_weight_at_rest():
    w = make_world()
    add_ground(w)
    bid = w.add_body(Sphere(0.1), position=(0, 0, 0.0995), mass=2.0)
    for _ in range(60):
        w.step(DT)
    f = w.body(bid).accumulated_contact_force
    assert f[2] == pytest.approx(2.0 * G, rel=0.05)
    # ground sees the opposite push
    assert w.body(0).accumulated_contact_force[2] == pytest.approx(-2.0 * G, rel=0.05)


def _incline_world(mu, theta=math.pi / 6):
    w = make_world()
    n = vec3(-math.sin(theta), 0.0, math.cos(theta))
    w.add_body(StaticPlane(tuple(n), 0.0), position=(0, 0, 0), mass=0.0,
               material=Material(friction=mu))
    q = quat_from_axis_angle(vec3(0, 1, 0), -theta)
    bid = w.add_body(Box((0.1, 0.1, 0.05)), position=tuple(n * 0.0505), orientation=q,
                     mass=1.0, material=Material(friction=mu))
    return w, bid


def test_high_friction_box_holds_on_incline():
    # mu = 0.8 > tan(30 deg): static friction keeps the box in place
    w, bid = _incline_world(0.8)
    start = w.body(bid).position.copy()
    for _ in range(120):
        w.step(DT)
    b = w.body(bid)
    assert norm(b.position - start) < 5e-3
    assert norm(b.linear_velocity) < 0.01


def test_low_friction_box_slides_with_expected_acceleration():
    # a = g*(sin(theta) - mu*cos(theta)) for a sliding block
    theta, mu = math.pi / 6, 0.2
    w, bid = _incline_world(mu, theta)
    expected = G * (math.sin(theta) - mu * math.cos(theta))
    v1 = v2 = None
    for i in range(60):
        w.step(DT)
        if i == 29:
            v1 = norm(w.body(bid).linear_velocity)
        if i == 59:
            v2 = norm(w.body(bid).linear_velocity)
    measured = (v2 - v1) / (30 * DT)
    assert measured == pytest.approx(expected, rel=0.05)


def test_solve_contacts_op_removes_approach_velocity():
    w = make_world((0, 0, 0))
    a = w.add_body(Sphere(0.1), position=(0, 0, 0.099), mass=1.0)
    add = w.add_body(StaticPlane((0, 0, 1), 0.0), position=(0, 0, 0), mass=0.0)
    w.body(a).linear_velocity = vec3(0, 0, -1.0)
    contacts = detect_contacts(w)
    assert contacts
    solve_contacts(w, contacts, iterations=10, dt=DT)
    assert w.body(a).linear_velocity[2] >= -1e-9
    assert w.body(a).accumulated_contact_force[2] > 0.0
    assert add == 1


def test_solve_contacts_rejects_bad_iterations():
    w = make_world()
    with pytest.raises(ValueError):
        solve_contacts(w, [], iterations=0, dt=DT)


# ---------------------------------------------------------------------------
# joints


def test_hinge_pendulum_keeps_anchor_and_energy():
    w = make_world()
    base = w.add_body(Sphere(0.02), position=(0, 0, 0), mass=0.0)
    bob = w.add_body(Sphere(0.05), position=(0.5, 0, 0), mass=1.0)
    w.add_joint("hinge", base, bob, anchor=(0, 0, 0), axis=(0, 1, 0))
    max_ke = 0.0
    for _ in range(90):
        w.step(DT)
        max_ke = max(max_ke, w.kinetic_energy())
        # the bob must stay on its circle about the anchor
        assert norm(w.body(bob).position) == pytest.approx(0.5, abs=2e-3)
    # swinging down from horizontal converts m*g*l into kinetic energy
    assert max_ke == pytest.approx(1.0 * G * 0.5, rel=0.08)


def test_hinge_angle_and_speed_signs():
    w = make_world()
    base = w.add_body(Sphere(0.02), position=(0, 0, 0), mass=0.0)
    bob = w.add_body(Sphere(0.05), position=(0.5, 0, 0), mass=1.0)
    jid = w.add_joint("hinge", base, bob, anchor=(0, 0, 0), axis=(0, 1, 0))
    assert w.joint_coordinate(jid) == pytest.approx(0.0, abs=1e-12)
    for _ in range(10):
        w.step(DT)
    # gravity swings the +x bob downward, which is positive about +y
    assert w.joint_coordinate(jid) > 0.01
    assert w.joint_speed(jid) > 0.0


def test_hinge_limits_stop_the_swing():
    w = make_world()
    base = w.add_body(Sphere(0.02), position=(0, 0, 0), mass=0.0)
    bob = w.add_body(Sphere(0.05), position=(0.5, 0, 0), mass=1.0)
    jid = w.add_joint("hinge", base, bob, anchor=(0, 0, 0), axis=(0, 1, 0),
                      limits=(-0.3, 0.3))
    angles = []
    for _ in range(180):
        w.step(DT)
        angles.append(w.joint_coordinate(jid))
    assert max(angles) <= 0.3 + 0.03
    assert min(angles) >= -0.3 - 0.03


def test_hinge_drive_tracks_target():
    w = make_world()
    base = w.add_body(Sphere(0.02), position=(0, 0, 0), mass=0.0)
    arm = w.add_body(Box((0.15, 0.02, 0.02)), position=(0.15, 0, 0), mass=0.2)
    jid = w.add_joint("hinge", base, arm, anchor=(0, 0, 0), axis=(0, 1, 0),
                      drive=Drive(target=0.0, kp=50.0, kd=5.0))
    for _ in range(120):
        w.step(DT)
    assert abs(w.joint_coordinate(jid)) < 0.05  # held horizontal against gravity
    w.joint(jid).drive.target = 0.8
    for _ in range(120):
        w.step(DT)
    assert w.joint_coordinate(jid) == pytest.approx(0.8, abs=0.05)


def test_prismatic_slides_only_along_axis():
    w = make_world()
    base = w.add_body(Box((0.1, 0.1, 0.02)), position=(0, 0, 0), mass=0.0)
    slider = w.add_body(Box((0.05, 0.05, 0.05)), position=(0, 0, 0.3), mass=0.5)
    jid = w.add_joint("prismatic", base, slider, anchor=(0, 0, 0.3), axis=(0, 0, 1),
                      limits=(-0.1, 0.1))
    for _ in range(60):
        w.step(DT)
    b = w.body(slider)
    assert w.joint_coordinate(jid) == pytest.approx(-0.1, abs=5e-3)  # resting on limit
    assert abs(b.position[0]) < 1e-6 and abs(b.position[1]) < 1e-6
    assert abs(b.orientation[0]) > 0.9999  # no rotation picked up


def test_prismatic_drive_reaches_target():
    w = make_world()
    base = w.add_body(Box((0.1, 0.1, 0.02)), position=(0, 0, 0), mass=0.0)
    slider = w.add_body(Box((0.05, 0.05, 0.05)), position=(0, 0, 0.3), mass=0.5)
    jid = w.add_joint("prismatic", base, slider, anchor=(0, 0, 0.3), axis=(0, 0, 1),
                      limits=(-0.1, 0.1), drive=Drive(target=0.05, kp=2000.0, kd=60.0))
    for _ in range(120):
        w.step(DT)
    assert w.joint_coordinate(jid) == pytest.approx(0.05, abs=0.005)


def test_drive_target_clamped_to_limits():
    w = make_world((0, 0, 0))
    base = w.add_body(Box((0.1, 0.1, 0.02)), position=(0, 0, 0), mass=0.0)
    slider = w.add_body(Box((0.05, 0.05, 0.05)), position=(0, 0, 0.3), mass=0.5)
    jid = w.add_joint("prismatic", base, slider, anchor=(0, 0, 0.3), axis=(0, 0, 1),
                      limits=(-0.1, 0.1), drive=Drive(target=5.0, kp=2000.0, kd=80.0))
    for _ in range(240):
        w.step(DT)
    assert w.joint_coordinate(jid) <= 0.1 + 5e-3


def test_apply_joint_drives_is_equal_and_opposite():
    w = make_world((0, 0, 0))
    a = w.add_body(Box((0.1, 0.1, 0.1)), position=(0, 0, 0), mass=1.0)
    b = w.add_body(Box((0.1, 0.1, 0.1)), position=(0, 0, 0.4), mass=1.0)
    w.add_joint("prismatic", a, b, anchor=(0, 0, 0.4), axis=(0, 0, 1),
                limits=(-0.2, 0.2), drive=Drive(target=0.1, kp=100.0, kd=0.0))
    apply_joint_drives(w, DT)
    pa = w.body(a).mass * w.body(a).linear_velocity
    pb = w.body(b).mass * w.body(b).linear_velocity
    assert np.allclose(pa + pb, 0.0, atol=1e-12)
    assert w.body(b).linear_velocity[2] > 0.0


def test_remove_body_drops_its_joints():
    w = make_world()
    a = w.add_body(Sphere(0.1), position=(0, 0, 0), mass=0.0)
    b = w.add_body(Sphere(0.1), position=(0.3, 0, 0), mass=1.0)
    w.add_joint("hinge", a, b, anchor=(0, 0, 0), axis=(0, 1, 0))
    w.remove_body(b)
    assert w.joints == {}
    with pytest.raises(NotFound):
        w.body(b)


def test_add_joint_validation():
    w = make_world()
    a = w.add_body(Sphere(0.1), position=(0, 0, 0), mass=0.0)
    b = w.add_body(Sphere(0.1), position=(0.3, 0, 0), mass=1.0)
    with pytest.raises(ValueError):
        w.add_joint("ball", a, b, anchor=(0, 0, 0), axis=(0, 1, 0))
    with pytest.raises(ValueError):
        w.add_joint("hinge", a, b, anchor=(0, 0, 0), axis=(0, 1, 0), limits=(1.0, -1.0))
    with pytest.raises(NotFound):
        w.add_joint("hinge", a, 99, anchor=(0, 0, 0), axis=(0, 1, 0))


# ---------------------------------------------------------------------------
# housekeeping


def test_query_rigid_state_returns_copies():
    w = make_world()
    bid = w.add_body(Sphere(0.1), position=(1, 2, 3), mass=1.0)
    pos, orn, lin, ang, force = query_rigid_state(w, bid)
    pos[0] = 99.0
    assert w.body(bid).position[0] == 1.0
    assert orn[0] == 1.0
    assert np.array_equal(lin, vec3()) and np.array_equal(ang, vec3())
    assert np.array_equal(force, vec3())


def test_query_rigid_state_unknown_id():
    w = make_world()
    with pytest.raises(NotFound):
        query_rigid_state(w, 123)


def test_add_body_validation():
    w = make_world()
    with pytest.raises(ValueError):
        w.add_body(Sphere(-1.0), position=(0, 0, 0))
    with pytest.raises(ValueError):
        w.add_body(Sphere(0.1), position=(0, 0, 0), mass=-1.0)
    with pytest.raises(ValueError):
        w.add_body(StaticPlane((0, 0, 1), 0.0), position=(0, 0, 0), mass=1.0)
    with pytest.raises(ValueError):
        w.add_body(Sphere(0.1), position=(0, 0, 0), mass=0.0, kinematic=True)
    with pytest.raises(ValueError):
        w.step(0.0)


def test_shape_inertia_values():
    assert np.allclose(shape_inertia_diag(Sphere(0.1), 2.0), [0.008, 0.008, 0.008])
    assert np.allclose(shape_inertia_diag(Box((0.1, 0.2, 0.3)), 3.0),
                       [0.13, 0.10, 0.05])


def test_deterministic_replay_bit_exact():
    def build():
        w = make_world()
        add_ground(w)
        w.add_body(Sphere(0.1), position=(0.0, 0.0, 0.4), mass=1.0,
                   velocity=(0.5, 0.1, 0.0))
        w.add_body(Box((0.1, 0.1, 0.1)), position=(0.5, 0.0, 0.3), mass=2.0,
                   angular_velocity=(0.0, 3.0, 0.0))
        q = quat_from_axis_angle(vec3(1, 0, 0), 0.3)
        w.add_body(Capsule(0.05, 0.15), position=(-0.4, 0.2, 0.5), orientation=q,
                   mass=0.5)
        b = w.add_body(Sphere(0.08), position=(1.2, 0, 0.6), mass=1.0)
        w.add_joint("hinge", 0, b, anchor=(1.2, 0, 1.0), axis=(0, 1, 0))
        return w

    w1, w2 = build(), build()
    for _ in range(50):
        w1.step(DT)
        w2.step(DT)
    for bid in sorted(w1.bodies):
        a, b = w1.body(bid), w2.body(bid)
        assert np.array_equal(a.position, b.position)
        assert np.array_equal(a.orientation, b.orientation)
        assert np.array_equal(a.linear_velocity, b.linear_velocity)
        assert np.array_equal(a.angular_velocity, b.angular_velocity)
