"""Morphology format, segmentation, and kinematic tree validation.

Segmentation has an independent BFS flood-fill oracle; the file format
checks pin the exact run-length order (x fastest, then y, then z).
"""

import json
from collections import deque

import numpy as np
import pytest

from voxfab.errors import InvariantViolation, MalformedFile
from voxfab.generator import ring, tripod
from voxfab.morphology import (
    JointAnnotation,
    JointClearanceParams,
    MaterialGrid,
    MaterialLabel,
    MorphologySpec,
    build_kinematic_tree,
    dilate,
    erode,
    joint_cylinder_mask,
    label_segments,
    parse_morphology,
    serialize_morphology,
)

CLEAR = JointClearanceParams(cylinder_radius=9.6, cylinder_half_length=16.8,
                             soft_sphere_radius=17.6)


def flood_fill_components(mask: np.ndarray) -> int:
    """6-connected component count by plain BFS, independent of ndimage."""
    seen = np.zeros(mask.shape, dtype=bool)
    count = 0
    steps = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1),
             (0, 0, -1)]
    for start in map(tuple, np.argwhere(mask)):
        if seen[start]:
            continue
        count += 1
        queue = deque([start])
        seen[start] = True
        while queue:
            x, y, z = queue.popleft()
            for dx, dy, dz in steps:
                n = (x + dx, y + dy, z + dz)
                if all(0 <= n[i] < mask.shape[i] for i in range(3)) \
                        and mask[n] and not seen[n]:
                    seen[n] = True
                    queue.append(n)
    return count


def small_spec(labels, joints=(), voxel=4.0, meta=None):
    grid = MaterialGrid(dims=labels.shape, voxel_size=voxel, labels=labels)
    return MorphologySpec(grid=grid, joints=list(joints), meta=meta or {})


def test_serialize_parse_round_trip():
    spec = tripod()
    data = serialize_morphology(spec)
    back = parse_morphology(data)
    assert np.array_equal(back.grid.labels, spec.grid.labels)
    assert back.grid.voxel_size == spec.grid.voxel_size
    assert len(back.joints) == len(spec.joints)
    for a, b in zip(back.joints, spec.joints):
        assert a.id == b.id
        assert a.position == pytest.approx(b.position)
        assert a.axis == pytest.approx(b.axis)
        assert a.motion_range == b.motion_range
    assert back.meta == spec.meta
    # canonical form is stable
    assert serialize_morphology(back) == data


def test_rle_order_is_x_fastest():
    labels = np.zeros((4, 4, 4), dtype=np.uint8)
    labels[0, 0, 0] = 1   # flat index 0
    labels[1, 0, 0] = 1   # flat index 1
    labels[0, 1, 0] = 2   # flat index 4
    labels[0, 0, 1] = 1   # flat index 16
    doc = json.loads(serialize_morphology(small_spec(labels)))
    assert doc["labels_rle"] == [[2, 1], [2, 0], [1, 2], [11, 0], [1, 1],
                                 [47, 0]]


def test_parse_rejects_structural_problems():
    spec = tripod()
    doc = json.loads(serialize_morphology(spec))

    def corrupt(**changes):
        bad = dict(doc)
        bad.update(changes)
        return json.dumps(bad)

    with pytest.raises(MalformedFile):
        parse_morphology(b"{not json")
    with pytest.raises(MalformedFile):
        parse_morphology(json.dumps([1, 2]))
    with pytest.raises(MalformedFile):
        parse_morphology(corrupt(version=99))
    with pytest.raises(MalformedFile):
        parse_morphology(corrupt(dims=[24, 16]))
    with pytest.raises(MalformedFile):
        parse_morphology(corrupt(labels_rle=[[5, 1]]))  # wrong voxel count
    with pytest.raises(MalformedFile):
        parse_morphology(corrupt(labels_rle=doc["labels_rle"][:-1]
                                 + [[doc["labels_rle"][-1][0], 7]]))
    with pytest.raises(MalformedFile):
        parse_morphology(corrupt(joints=[{"id": 0}]))
    with pytest.raises(MalformedFile):
        parse_morphology(corrupt(meta=[1]))
    missing = dict(doc)
    del missing["voxel_size_mm"]
    with pytest.raises(MalformedFile):
        parse_morphology(json.dumps(missing))


def test_semantic_validation():
    with pytest.raises(InvariantViolation):
        JointAnnotation(id=0, position=(0, 0, 0), axis=(0, 0, 2),
                        motion_range=(-1, 1))
    with pytest.raises(InvariantViolation):
        JointAnnotation(id=0, position=(0, 0, 0), axis=(0, 0, 1),
                        motion_range=(0.5, 1.0))  # range must bracket 0
    with pytest.raises(InvariantViolation):
        MaterialGrid(dims=(2, 8, 8), voxel_size=4.0,
                     labels=np.zeros((2, 8, 8), dtype=np.uint8))
    labels = np.zeros((8, 8, 8), dtype=np.uint8)
    labels[0, 0, 0] = 9
    with pytest.raises(InvariantViolation):
        MaterialGrid(dims=(8, 8, 8), voxel_size=4.0, labels=labels)
    # joint outside the grid bbox
    with pytest.raises(InvariantViolation):
        small_spec(np.zeros((8, 8, 8), dtype=np.uint8),
                   joints=[JointAnnotation(id=0, position=(1000, 0, 0),
                                           axis=(0, 0, 1),
                                           motion_range=(-1, 1))])


def test_joint_cylinder_mask_geometry():
    spec = tripod()
    joint = spec.joints[0]
    mask = joint_cylinder_mask(spec.grid, joint, radius=9.6,
                               half_length=16.8)
    centers = spec.grid.voxel_centers(np.ones(spec.grid.dims, dtype=bool))
    d = centers - joint.position
    axial = d @ joint.axis
    rad2 = np.einsum("ij,ij->i", d, d) - axial ** 2
    expect = ((np.abs(axial) <= 16.8)
              & (rad2 <= 9.6 ** 2)).reshape(spec.grid.dims)
    assert np.array_equal(mask, expect)


def test_label_segments_matches_flood_fill_oracle():
    spec = tripod()
    labeling = label_segments(spec.grid, spec.joints, CLEAR)
    cut = spec.grid.labels == int(MaterialLabel.RIGID)
    for j in spec.joints:
        cut &= ~joint_cylinder_mask(spec.grid, j, CLEAR.cylinder_radius,
                                    CLEAR.cylinder_half_length)
    assert labeling.segment_count == flood_fill_components(cut)
    assert labeling.segment_count == 4  # three feet and a torso
    # ids dense, -1 elsewhere, volumes consistent with voxel counts
    ids = labeling.segment_id
    assert set(np.unique(ids)) == set(range(-1, labeling.segment_count))
    assert np.all(ids[~cut] == -1)
    for sid in range(labeling.segment_count):
        assert labeling.segment_volumes[sid] \
            == np.count_nonzero(ids == sid)


def test_kinematic_tree_tripod_is_valid():
    spec = tripod()
    labeling = label_segments(spec.grid, spec.joints, CLEAR)
    tree = build_kinematic_tree(spec.grid, labeling, spec.joints, CLEAR)
    assert tree.valid
    assert tree.invalid_reason is None
    assert len(tree.edges) == labeling.segment_count - 1
    assert {e[0] for e in tree.edges} == {j.id for j in spec.joints}
    # root is the torso, the largest segment
    assert tree.root == int(np.argmax(labeling.segment_volumes))
    for _, a, b in tree.edges:
        assert a < b


def test_kinematic_tree_rejects_cycle():
    spec = ring()
    labeling = label_segments(spec.grid, spec.joints, CLEAR)
    tree = build_kinematic_tree(spec.grid, labeling, spec.joints, CLEAR)
    assert not tree.valid
    assert "cycle" in tree.invalid_reason


def test_kinematic_tree_rejects_disconnected_segments():
    labels = np.zeros((24, 8, 8), dtype=np.uint8)
    labels[0:6, :, :] = 1
    labels[18:24, :, :] = 1  # far island, no joint in between
    spec = small_spec(labels)
    labeling = label_segments(spec.grid, spec.joints, CLEAR)
    tree = build_kinematic_tree(spec.grid, labeling, spec.joints, CLEAR)
    assert not tree.valid
    assert "disconnected" in tree.invalid_reason


def test_erode_dilate_ball():
    occ = np.zeros((9, 9, 9), dtype=bool)
    occ[2:7, 2:7, 2:7] = True
    shrunk = erode(occ, 1)
    # erosion by a radius-1 ball peels one face layer
    expect = np.zeros_like(occ)
    expect[3:6, 3:6, 3:6] = True
    assert np.array_equal(shrunk, expect)
    grown = dilate(shrunk, 1)
    assert np.count_nonzero(grown) > np.count_nonzero(shrunk)
    assert np.array_equal(erode(occ, 0), occ)
    assert np.array_equal(dilate(occ, 0), occ)
