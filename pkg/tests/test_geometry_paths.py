"""Surface graph, geodesics, curvature, tube sweeps.

Dijkstra costs are cross-checked against networkx on the same weighted
graph; curvature against the circumradius of regular polygons; the swept
tube against the closed-form capsule volume.
"""

import networkx as nx
import numpy as np
import pytest

from voxfab.errors import Disconnected
from voxfab.geometry import make_box, make_sphere, surface_geodesic, sweep_tube
from voxfab.geometry.mesh import merge_meshes
from voxfab.geometry.paths import (
    SurfacePath,
    build_surface_graph,
    max_path_curvature,
    path_curvature,
    path_resample,
    shortest_path_nodes,
    smooth_path,
)


def circle_points(radius, n, arc=2.0 * np.pi, z=0.0):
    t = np.linspace(0.0, arc, n, endpoint=False)
    return np.column_stack([radius * np.cos(t), radius * np.sin(t),
                            np.full(n, z)])


def path_length(points):
    return float(np.linalg.norm(np.diff(points, axis=0), axis=1).sum())


def test_surface_graph_shape_and_symmetry():
    mesh = make_box((5.0, 5.0, 5.0))
    g = build_surface_graph(mesh.vertices, mesh.triangles)
    n_edges = len(np.unique(np.sort(
        mesh.triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1), axis=0))
    assert g.n_vertices == len(mesh.vertices)
    assert len(g.positions) == len(mesh.vertices) + n_edges
    assert (g.matrix != g.matrix.T).nnz == 0
    assert np.all(g.matrix.data > 0)


@pytest.mark.parametrize("start,end", [(0, 7), (1, 6), (3, 4)])
def test_shortest_path_cost_matches_networkx(start, end):
    mesh = make_sphere(8.0, rings=8, segments=12)
    g = build_surface_graph(mesh.vertices, mesh.triangles)
    nodes = shortest_path_nodes(g, start, end)
    assert nodes[0] == start and nodes[-1] == end
    cost = sum(g.matrix[int(a), int(b)]
               for a, b in zip(nodes[:-1], nodes[1:]))
    ref = nx.from_scipy_sparse_array(g.matrix)
    expect = nx.dijkstra_path_length(ref, start, end)
    assert cost == pytest.approx(expect, rel=1e-12)
    # every hop must be an actual graph edge
    for a, b in zip(nodes[:-1], nodes[1:]):
        assert g.matrix[int(a), int(b)] > 0


def test_geodesic_at_least_euclidean():
    mesh = make_sphere(10.0, rings=16, segments=24)
    for start, end in [(0, len(mesh.vertices) - 1), (2, 200), (5, 101)]:
        path = surface_geodesic(mesh, start, end)
        straight = float(np.linalg.norm(mesh.vertices[end]
                                        - mesh.vertices[start]))
        assert path_length(path.waypoints) >= straight - 1e-9
        assert path.waypoints[0] == pytest.approx(mesh.vertices[start])
        assert path.waypoints[-1] == pytest.approx(mesh.vertices[end])


def test_disconnected_components_raise():
    a = make_box((3.0, 3.0, 3.0))
    b = make_box((3.0, 3.0, 3.0), center=(100.0, 0.0, 0.0))
    verts, tris, offsets = merge_meshes([a, b])
    g = build_surface_graph(verts, tris)
    with pytest.raises(Disconnected):
        shortest_path_nodes(g, 0, offsets[1])


@pytest.mark.parametrize("n", [32, 64, 256])
def test_circle_curvature_matches_radius(n):
    radius = 7.3
    kappa = path_curvature(circle_points(radius, n))
    expect = 1.0 / radius
    assert np.all(np.abs(kappa - expect) <= 0.05 * expect)


def test_straight_line_curvature_is_zero():
    pts = np.linspace([0.0, 0.0, 0.0], [10.0, 5.0, 2.0], 9)
    assert max_path_curvature(pts) == 0.0
    assert len(path_curvature(pts[:2])) == 0


def test_smooth_path_pins_endpoints_and_reduces_curvature():
    zigzag = np.array([[float(i), float(i % 2), 0.0] for i in range(12)])
    path = SurfacePath(waypoints=zigzag)
    smoothed = smooth_path(path, window=5)
    assert smoothed.waypoints[0] == pytest.approx(zigzag[0])
    assert smoothed.waypoints[-1] == pytest.approx(zigzag[-1])
    assert max_path_curvature(smoothed.waypoints) \
        < max_path_curvature(zigzag)


def test_path_resample_respects_spacing():
    path = SurfacePath(waypoints=np.array([[0.0, 0.0, 0.0],
                                           [9.0, 0.0, 0.0],
                                           [9.0, 4.0, 0.0]]))
    pts = path_resample(path, spacing=1.0)
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    assert np.all(steps <= 1.0 + 1e-9)
    assert pts[0] == pytest.approx(path.waypoints[0])
    assert pts[-1] == pytest.approx(path.waypoints[-1])
    # original corner is kept
    assert np.any(np.all(np.isclose(pts, [9.0, 0.0, 0.0]), axis=1))


def test_sweep_tube_capsule_volume():
    length, radius = 20.0, 2.5
    path = SurfacePath(waypoints=np.array([[0.0, 0.0, 0.0],
                                           [length, 0.0, 0.0]]))
    field = sweep_tube(path, radius, cell_size=0.4)
    exact = np.pi * radius ** 2 * length + 4.0 / 3.0 * np.pi * radius ** 3
    assert abs(field.occupied_volume() - exact) / exact < 0.10


def test_sweep_tube_on_existing_lattice():
    path = SurfacePath(waypoints=np.array([[2.0, 2.0, 2.0],
                                           [6.0, 2.0, 2.0]]))
    base = sweep_tube(path, 1.0, cell_size=0.5)
    like = sweep_tube(path, 1.5, cell_size=0.5, like=base)
    assert like.same_lattice(base)
    # larger radius strictly contains the smaller tube
    assert np.all(like.values[base.values])
    assert like.occupied_volume() > base.occupied_volume()
