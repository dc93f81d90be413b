"""Motor solver: balance score, offset scan vs brute force, embedding.

The scan check sweeps a 10x finer offset lattice with the same volume
objective and demands the solver's argmax lands within one scan step of
the brute-force one.
"""

import math

import numpy as np
import pytest

from voxfab.errors import GeometryFailure, NoFeasibleOffset, ZeroFeasibleRange
from voxfab.generator import tripod
from voxfab.geometry import VolumeField, count_overlap_cells, make_box, marching_cubes
from voxfab.body import SemiVirtualBody, process_body
from voxfab.morphology import JointAnnotation, JointClearanceParams, KinematicTree
from voxfab.motor import (
    HOLDER_ON_A,
    HOLDER_ON_B,
    MotorSolverParams,
    MotorSpec,
    attachment_solids,
    balance_score,
    embed_motor,
    feasible_motion_and_carve,
    gated_score,
    motor_pose,
    part_side,
    scan_motor_offset,
    solve_all_motors,
)

SPEC = MotorSpec()
PARAMS = MotorSolverParams()
CLEAR = JointClearanceParams(cylinder_radius=9.6, cylinder_half_length=16.8,
                             soft_sphere_radius=17.6)


def slab_field(z_lo, z_hi, xy=(6, 34), dims=(40, 40, 64)):
    vals = np.zeros(dims, dtype=bool)
    vals[xy[0]:xy[1], xy[0]:xy[1], z_lo:z_hi] = True
    return VolumeField(np.zeros(3), 1.0, vals)


def two_slab_fixture():
    """Asymmetric slabs around a +z joint: thick base below, thin limb
    above, so the score trades holder grip against connector grip and the
    optimum sits strictly inside the scan range."""
    field_a = slab_field(6, 26)
    field_b = slab_field(34, 44)
    joint = JointAnnotation(id=0, position=(20.0, 20.0, 30.0),
                            axis=(0.0, 0.0, 1.0), motion_range=(-0.6, 0.6))
    return field_a, field_b, joint


def brute_force_scan(field_a, field_b, joint, spec, params, refine=10):
    """Exhaustive argmax of the gated volume objective on a finer lattice."""
    side_a = part_side(field_a, field_b, joint)
    lo, hi = params.scan_range
    step = params.scan_step / refine
    best = (-np.inf, None, None)
    for delta in np.arange(lo, hi + step / 2, step):
        center = joint.position + delta * joint.axis
        for config, fh, fc, side in (
                (HOLDER_ON_A, field_a, field_b, side_a),
                (HOLDER_ON_B, field_b, field_a, -side_a)):
            holder, conn = attachment_solids(center, joint.axis, side, spec)
            v_h = count_overlap_cells(fh, holder) * fh.cell_size ** 3
            v_c = count_overlap_cells(fc, conn) * fc.cell_size ** 3
            s = gated_score(v_h, v_c, params.tau, params.balance_weight)
            if s > best[0]:
                best = (s, float(delta), config)
    return best


def test_balance_score_symmetry_and_monotonicity(rng):
    pairs = rng.uniform(0.0, 5000.0, size=(1000, 2))
    bumps = rng.uniform(1.0, 500.0, size=1000)
    for (a, b), d in zip(pairs, bumps):
        assert balance_score(a, b, 0.25) == balance_score(b, a, 0.25)
        assert balance_score(a + d, b, 0.25) > balance_score(a, b, 0.25)
        assert balance_score(a, b + d, 0.25) > balance_score(a, b, 0.25)


def test_gated_score_threshold():
    assert gated_score(499.9, 800.0, 500.0, 0.25) == 0.0
    assert gated_score(800.0, 499.9, 500.0, 0.25) == 0.0
    g = gated_score(500.0, 500.0, 500.0, 0.25)
    assert g == pytest.approx(500.0 + 0.25 * 1000.0)


def test_motor_pose_frame():
    joint = JointAnnotation(id=3, position=(1.0, 2.0, 3.0),
                            axis=(0.0, 1.0, 0.0), motion_range=(-1.0, 1.0))
    pose = motor_pose(joint, offset=5.0)
    assert pose[:3, 3] == pytest.approx([1.0, 7.0, 3.0])
    assert pose[:3, 2] == pytest.approx([0.0, 1.0, 0.0])
    r = pose[:3, :3]
    assert r @ r.T == pytest.approx(np.eye(3), abs=1e-12)
    assert np.linalg.det(r) == pytest.approx(1.0)
    assert pose[3] == pytest.approx([0.0, 0.0, 0.0, 1.0])


def test_attachment_solids_mirror():
    center = np.array([0.0, 0.0, 0.0])
    axis = np.array([0.0, 0.0, 1.0])
    holder, conn = attachment_solids(center, axis, 1.0, SPEC)
    # holder on +z: all holder solids above the center, connector below
    assert all(s.center[2] > 0 for s in holder)
    assert all(s.center[2] < 0 for s in conn)
    holder2, conn2 = attachment_solids(center, axis, -1.0, SPEC)
    assert all(s.center[2] < 0 for s in holder2)
    assert all(s.center[2] > 0 for s in conn2)
    with pytest.raises(ValueError):
        attachment_solids(center, axis, 0.5, SPEC)


def test_part_side_projection():
    field_a, field_b, joint = two_slab_fixture()
    assert part_side(field_a, field_b, joint) == -1.0
    assert part_side(field_b, field_a, joint) == 1.0


def test_scan_matches_fine_brute_force():
    field_a, field_b, joint = two_slab_fixture()
    placement = scan_motor_offset(None, None, joint, SPEC, PARAMS,
                                  field_a=field_a, field_b=field_b)
    s_fine, delta_fine, config_fine = brute_force_scan(
        field_a, field_b, joint, SPEC, PARAMS)
    assert s_fine > 0
    assert abs(placement.offset - delta_fine) <= PARAMS.scan_step
    assert placement.configuration == config_fine
    # the coarse optimum can never beat the fine one
    assert placement.score <= s_fine + 1e-9


def test_scan_curve_gate_is_pointwise():
    field_a, field_b, joint = two_slab_fixture()
    placement = scan_motor_offset(None, None, joint, SPEC, PARAMS,
                                  field_a=field_a, field_b=field_b)
    curves = placement.curves
    assert curves.shape[1] == 4
    gated = 0
    for delta, v_h, v_c, s in curves:
        if min(v_h, v_c) < PARAMS.tau:
            assert s == 0.0
            gated += 1
        else:
            expect = math.sqrt(v_h * v_c) \
                + PARAMS.balance_weight * (v_h + v_c)
            assert s == pytest.approx(expect, rel=1e-12)
    assert gated > 0  # the fixture exercises both branches


def test_scan_reports_measured_volumes():
    field_a, field_b, joint = two_slab_fixture()
    placement = scan_motor_offset(None, None, joint, SPEC, PARAMS,
                                  field_a=field_a, field_b=field_b)
    center = joint.position + placement.offset * joint.axis
    holder, conn = attachment_solids(center, joint.axis,
                                     placement.holder_side, SPEC)
    fh, fc = ((field_a, field_b) if placement.configuration == HOLDER_ON_A
              else (field_b, field_a))
    assert placement.v_h == count_overlap_cells(fh, holder)
    assert placement.v_c == count_overlap_cells(fc, conn)
    assert placement.v_h >= PARAMS.tau and placement.v_c >= PARAMS.tau


def test_no_feasible_offset_raises():
    # slivers far off the joint axis: the attachments never reach material
    field_a = slab_field(2, 4, xy=(0, 3))
    field_b = slab_field(60, 62, xy=(0, 3))
    joint = JointAnnotation(id=0, position=(20.0, 20.0, 30.0),
                            axis=(0.0, 0.0, 1.0), motion_range=(-0.5, 0.5))
    with pytest.raises(NoFeasibleOffset) as err:
        scan_motor_offset(None, None, joint, SPEC, PARAMS,
                          field_a=field_a, field_b=field_b)
    assert err.value.stage == "motor"
    assert err.value.reason == "no_feasible_offset"


def test_embed_motor_unions_and_bores():
    field_a, field_b, joint = two_slab_fixture()
    placement = scan_motor_offset(None, None, joint, SPEC, PARAMS,
                                  field_a=field_a, field_b=field_b)
    parts = {0: field_a, 1: field_b}
    before = {sid: f.occupied_volume() for sid, f in parts.items()}
    embed_motor(parts, placement, SPEC, hosts=(0, 1))
    center = placement.pose[:3, 3]
    axis = placement.pose[:3, 2]
    from voxfab.motor import _bore_solids
    bores = _bore_solids(center, axis, SPEC)
    for sid, f in parts.items():
        assert count_overlap_cells(f, bores) == 0
        assert f.values.any(), f"part {sid} vanished"
    holder_host = 0 if placement.configuration == HOLDER_ON_A else 1
    holder, _ = attachment_solids(center, axis, placement.holder_side, SPEC)
    grip = count_overlap_cells(parts[holder_host], holder)
    assert grip > 0  # sleeve material survives the bore
    # embedding must change both parts
    for sid in parts:
        assert parts[sid].occupied_volume() != before[sid]


def test_embed_motor_rejects_empty_grip():
    field_a = slab_field(2, 4, xy=(0, 3))
    field_b = slab_field(60, 62, xy=(0, 3))
    joint = JointAnnotation(id=0, position=(20.0, 20.0, 30.0),
                            axis=(0.0, 0.0, 1.0), motion_range=(-0.5, 0.5))
    good_a, good_b, good_joint = two_slab_fixture()
    placement = scan_motor_offset(None, None, good_joint, SPEC, PARAMS,
                                  field_a=good_a, field_b=good_b)
    with pytest.raises(GeometryFailure):
        embed_motor({0: field_a, 1: field_b}, placement, SPEC, hosts=(0, 1))


def _toy_body(field_a, field_b, joint):
    parts = {0: marching_cubes(field_a, 0.5), 1: marching_cubes(field_b, 0.5)}
    tree = KinematicTree(nodes=[0, 1], edges=[(joint.id, 0, 1)], root=0,
                         valid=True)
    return SemiVirtualBody(rigid_parts=parts, skin=None, tree=tree,
                           joints=[joint], rigid_fields={0: field_a,
                                                         1: field_b})


def test_feasible_motion_full_range_for_clear_parts():
    field_a, field_b, joint = two_slab_fixture()
    body = _toy_body(field_a, field_b, joint)
    interval, carved = feasible_motion_and_carve(body, joint, PARAMS)
    # 10 mm of air between the slabs: rotation about z never collides
    assert interval == joint.motion_range
    assert carved == {0: 0.0, 1: 0.0}


def test_feasible_motion_rejects_heavy_static_overlap():
    field_a = slab_field(6, 30)
    field_b = slab_field(8, 44)  # interpenetrates a over 22 mm of height
    joint = JointAnnotation(id=0, position=(20.0, 20.0, 30.0),
                            axis=(0.0, 0.0, 1.0), motion_range=(-0.5, 0.5))
    body = _toy_body(field_a, field_b, joint)
    with pytest.raises(ZeroFeasibleRange) as err:
        feasible_motion_and_carve(body, joint, PARAMS)
    assert err.value.reason == "zero_feasible_range"


def test_solve_all_motors_on_tripod():
    body = process_body(tripod(), CLEAR, shell_thickness=8.0)
    solution = solve_all_motors(body, SPEC, PARAMS)
    assert [p.joint_id for p in solution.placements] == [0, 1, 2]
    for p in solution.placements:
        assert p.score > 0
        assert PARAMS.scan_range[0] <= p.offset <= PARAMS.scan_range[1]
        assert min(p.v_h, p.v_c) >= PARAMS.tau
        lo, hi = solution.phi_feasible[p.joint_id]
        assert lo <= 0.0 <= hi
        joint = body.joint_by_id(p.joint_id)
        assert joint.motion_range[0] <= lo and hi <= joint.motion_range[1]
    assert solution.body_overlap_mm3 == 0.0


def test_solve_all_motors_is_deterministic():
    def run():
        body = process_body(tripod(), CLEAR, shell_thickness=8.0)
        sol = solve_all_motors(body, SPEC, PARAMS)
        return [(p.joint_id, p.offset, p.configuration, p.score, p.v_h,
                 p.v_c) for p in sol.placements]

    assert run() == run()
