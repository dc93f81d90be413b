"""Mesh kernel: constructors, volume, watertightness, marching cubes, OBB.

Volumes of the polyhedral constructors have closed forms (n-gon prisms),
so those checks run at full float precision; the marching-cubes checks are
topological (watertight, Euler characteristic) plus a 10% volume band.
"""

import numpy as np
import pytest

from voxfab.errors import DegenerateGeometry
from voxfab.geometry import (
    TriMesh,
    VolumeField,
    is_watertight,
    make_box,
    make_cylinder,
    make_sphere,
    marching_cubes,
    mesh_volume,
    oriented_bounding_box,
)
from voxfab.geometry.mesh import merge_meshes


def euler_characteristic(mesh: TriMesh) -> int:
    v = len(mesh.vertices)
    f = len(mesh.triangles)
    edges = np.sort(np.concatenate([mesh.triangles[:, [0, 1]],
                                    mesh.triangles[:, [1, 2]],
                                    mesh.triangles[:, [2, 0]]]), axis=1)
    e = len(np.unique(edges, axis=0))
    return v - e + f


def _rotation(axis, angle):
    from scipy.spatial.transform import Rotation
    return Rotation.from_rotvec(np.asarray(axis, dtype=float) * angle).as_matrix()


def test_box_volume_exact():
    mesh = make_box((3.0, 4.0, 5.0), center=(10.0, -2.0, 7.0))
    assert is_watertight(mesh)
    assert mesh_volume(mesh) == pytest.approx(6.0 * 8.0 * 10.0, rel=1e-12)


def test_cylinder_volume_matches_prism_formula():
    n = 48
    r, h = 7.0, 11.0
    mesh = make_cylinder(r, h, axis=(1.0, 2.0, -1.0), center=(4.0, 4.0, 4.0),
                         segments=n)
    assert is_watertight(mesh)
    # closed form for the inscribed n-gon prism
    area = 0.5 * n * r * r * np.sin(2.0 * np.pi / n)
    assert mesh_volume(mesh) == pytest.approx(area * 2.0 * h, rel=1e-9)


def test_sphere_volume_near_analytic():
    mesh = make_sphere(6.0, rings=32, segments=64)
    assert is_watertight(mesh)
    exact = 4.0 / 3.0 * np.pi * 6.0 ** 3
    assert abs(mesh_volume(mesh) - exact) / exact < 0.02


def test_watertight_rejects_open_mesh():
    mesh = make_box((1.0, 1.0, 1.0))
    holed = TriMesh(vertices=mesh.vertices.copy(),
                    triangles=mesh.triangles[:-1].copy())
    assert not is_watertight(holed)


def test_marching_cubes_ball_topology():
    shape = (24, 24, 24)
    idx = np.indices(shape).reshape(3, -1).T + 0.5
    occ = (np.linalg.norm(idx - 12.0, axis=1) <= 9.0).reshape(shape)
    field = VolumeField(np.zeros(3), 1.0, occ)
    mesh = marching_cubes(field)
    assert is_watertight(mesh)
    assert euler_characteristic(mesh) == 2
    assert abs(mesh_volume(mesh) - field.occupied_volume()) \
        / field.occupied_volume() < 0.10


def test_marching_cubes_cube_topology():
    occ = np.zeros((14, 14, 14), dtype=bool)
    occ[3:11, 3:11, 3:11] = True
    field = VolumeField(np.zeros(3), 0.5, occ)
    mesh = marching_cubes(field)
    assert is_watertight(mesh)
    assert euler_characteristic(mesh) == 2
    assert abs(mesh_volume(mesh) - field.occupied_volume()) \
        / field.occupied_volume() < 0.10


def test_merge_meshes_concatenates_with_offsets():
    a = make_box((1.0, 1.0, 1.0))
    b = make_box((2.0, 2.0, 2.0), center=(10.0, 0.0, 0.0))
    verts, tris, offsets = merge_meshes([a, b])
    assert len(verts) == len(a.vertices) + len(b.vertices)
    assert offsets[1] == len(a.vertices)
    assert np.array_equal(tris[len(a.triangles):],
                          b.triangles + len(a.vertices))


def test_oriented_bounding_box_recovers_rotated_box():
    rot = _rotation((1.0, 1.0, 0.3), 0.7)
    mesh = make_box((9.0, 5.0, 2.0), center=(3.0, -1.0, 6.0), axes=rot)
    obb = oriented_bounding_box(mesh)
    assert obb.center == pytest.approx([3.0, -1.0, 6.0], abs=1e-9)
    assert np.sort(obb.extents) == pytest.approx([2.0, 5.0, 9.0], abs=1e-9)
    assert obb.max_extent == pytest.approx(18.0, abs=1e-9)
    # axes form a right-handed orthonormal frame
    assert np.linalg.det(obb.axes) == pytest.approx(1.0, abs=1e-9)
    assert obb.axes @ obb.axes.T == pytest.approx(np.eye(3), abs=1e-9)


def test_oriented_bounding_box_is_deterministic():
    mesh = make_sphere(4.0, rings=12, segments=20)
    a = oriented_bounding_box(mesh)
    b = oriented_bounding_box(mesh)
    assert np.array_equal(a.axes, b.axes)
    assert np.array_equal(a.extents, b.extents)


def test_oriented_bounding_box_rejects_flat_geometry():
    flat = TriMesh(vertices=np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0],
                                      [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]),
                   triangles=np.array([[0, 1, 2], [1, 3, 2]]))
    with pytest.raises(DegenerateGeometry):
        oriented_bounding_box(flat)
