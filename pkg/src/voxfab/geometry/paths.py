"""Paths on mesh surfaces: geodesics over a midpoint-refined edge graph,
smoothing, and swept-tube rasterization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from ..errors import Disconnected, InvariantViolation
from .field import VolumeField, make_lattice
from .mesh import TriMesh


@dataclass
class SurfacePath:
    """Polyline in world mm. Consecutive waypoints must be distinct."""

    waypoints: np.ndarray
    host_part: str | None = None

    def __post_init__(self):
        self.waypoints = np.asarray(self.waypoints,
                                    dtype=np.float64).reshape(-1, 3)
        if len(self.waypoints) < 2:
            raise InvariantViolation("waypoints", "path needs >= 2 points")
        steps = np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1)
        if np.any(steps < 1e-12):
            raise InvariantViolation("waypoints",
                                     "consecutive waypoints coincide")

    def length(self) -> float:
        return float(np.linalg.norm(
            np.diff(self.waypoints, axis=0), axis=1).sum())


@dataclass
class SurfaceGraph:
    """Shortest-path graph over a triangle surface.

    Nodes 0..V-1 are the mesh vertices; nodes V.. are edge midpoints. Graph
    edges are the half-edges (vertex to midpoint), the midpoint triangles
    inside each face, and the vertex-to-opposite-midpoint medians, so paths
    may cut across faces instead of hugging the wireframe.
    """

    positions: np.ndarray
    matrix: object  # scipy CSR adjacency, symmetric, weights in mm
    n_vertices: int


def build_surface_graph(vertices: np.ndarray, triangles: np.ndarray,
                        extra_edges: np.ndarray | None = None) -> SurfaceGraph:
    """Midpoint-refined graph of a triangle soup. extra_edges (pairs of
    vertex ids) add off-surface connections such as joint bridges."""
    vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    nv = len(vertices)
    tri_edges = np.sort(
        triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
    edges, inverse = np.unique(tri_edges, axis=0, return_inverse=True)
    mid = 0.5 * (vertices[edges[:, 0]] + vertices[edges[:, 1]])
    positions = np.vstack([vertices, mid])
    mid_ids = nv + np.arange(len(edges))
    # Tri t uses edge ids inverse[3t + m] for m = 0 (v0v1), 1 (v1v2), 2 (v2v0).
    per_tri = inverse.reshape(-1, 3)
    pairs = [
        np.column_stack([edges[:, 0], mid_ids]),
        np.column_stack([edges[:, 1], mid_ids]),
        np.column_stack([mid_ids[per_tri[:, 0]], mid_ids[per_tri[:, 1]]]),
        np.column_stack([mid_ids[per_tri[:, 1]], mid_ids[per_tri[:, 2]]]),
        np.column_stack([mid_ids[per_tri[:, 2]], mid_ids[per_tri[:, 0]]]),
        np.column_stack([triangles[:, 0], mid_ids[per_tri[:, 1]]]),
        np.column_stack([triangles[:, 1], mid_ids[per_tri[:, 2]]]),
        np.column_stack([triangles[:, 2], mid_ids[per_tri[:, 0]]]),
    ]
    if extra_edges is not None and len(extra_edges):
        pairs.append(np.asarray(extra_edges, dtype=np.int64).reshape(-1, 2))
    pe = np.vstack(pairs)
    pe = np.unique(np.sort(pe, axis=1), axis=0)
    w = np.linalg.norm(positions[pe[:, 0]] - positions[pe[:, 1]], axis=1)
    keep = w > 1e-12
    pe, w = pe[keep], w[keep]
    n = len(positions)
    mat = coo_matrix(
        (np.concatenate([w, w]),
         (np.concatenate([pe[:, 0], pe[:, 1]]),
          np.concatenate([pe[:, 1], pe[:, 0]]))),
        shape=(n, n)).tocsr()
    return SurfaceGraph(positions=positions, matrix=mat, n_vertices=nv)


def shortest_path_nodes(graph: SurfaceGraph, start: int, end: int) -> np.ndarray:
    """Node ids of one shortest path. Among equally short predecessors the
    lowest node id wins, so results are reproducible. Raises Disconnected."""
    csr = graph.matrix
    dist = dijkstra(csr, directed=False, indices=start)
    if not np.isfinite(dist[end]):
        raise Disconnected(f"no path between nodes {start} and {end}")
    path = [end]
    node = end
    indptr, indices, data = csr.indptr, csr.indices, csr.data
    while node != start:
        nbr = indices[indptr[node]:indptr[node + 1]]
        wgt = data[indptr[node]:indptr[node + 1]]
        slack = dist[nbr] + wgt - dist[node]
        ok = nbr[slack <= 1e-9 * max(1.0, dist[node])]
        if len(ok) == 0:
            raise Disconnected("shortest-path reconstruction failed")
        node = int(ok.min())
        path.append(node)
    return np.array(path[::-1], dtype=np.int64)


def surface_geodesic(mesh: TriMesh, start_vertex: int,
                     end_vertex: int) -> SurfacePath:
    """Approximate geodesic between two mesh vertices along the refined
    surface graph."""
    graph = build_surface_graph(mesh.vertices, mesh.triangles)
    nodes = shortest_path_nodes(graph, int(start_vertex), int(end_vertex))
    return SurfacePath(waypoints=graph.positions[nodes],
                       host_part=mesh.part_label)


def smooth_path(path: SurfacePath, window: int) -> SurfacePath:
    """Centered moving average with endpoints pinned. Near the ends the
    window shrinks symmetrically, so collinear equally spaced input is a
    fixed point. window must be odd and at most the waypoint count."""
    if window < 1 or window % 2 == 0:
        raise InvariantViolation("window", "must be odd and >= 1")
    pts = path.waypoints
    n = len(pts)
    if window > n:
        raise InvariantViolation("window", "wider than the path")
    if window == 1:
        return SurfacePath(pts.copy(), path.host_part)
    h = window // 2
    out = np.empty_like(pts)
    for i in range(n):
        hi = min(h, i, n - 1 - i)
        out[i] = pts[i - hi:i + hi + 1].mean(axis=0)
    # Smoothing may merge waypoints; keep the polyline valid and the two
    # endpoints pinned.
    merged = [out[0]]
    for p in out[1:-1]:
        if np.linalg.norm(p - merged[-1]) > 1e-12:
            merged.append(p)
    while len(merged) > 1 and np.linalg.norm(out[-1] - merged[-1]) <= 1e-12:
        merged.pop()
    merged.append(out[-1])
    if len(merged) < 2:
        raise InvariantViolation("window", "smoothing collapsed the path")
    return SurfacePath(np.asarray(merged), path.host_part)


def path_curvature(points: np.ndarray) -> np.ndarray:
    """Menger curvature (1/circumradius, in 1/mm) at each interior vertex
    of a polyline: kappa = 2 |e1 x e2| / (|e1| |e2| |e1 + e2|). Collinear
    triples get 0. Returns an array of length n-2 (empty for n < 3)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(pts) < 3:
        return np.zeros(0)
    e1 = pts[1:-1] - pts[:-2]
    e2 = pts[2:] - pts[1:-1]
    cross = np.linalg.norm(np.cross(e1, e2), axis=1)
    denom = (np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
             * np.linalg.norm(e1 + e2, axis=1))
    out = np.zeros(len(cross))
    ok = denom > 1e-30
    out[ok] = 2.0 * cross[ok] / denom[ok]
    return out


def max_path_curvature(points: np.ndarray) -> float:
    kappa = path_curvature(points)
    return float(kappa.max()) if len(kappa) else 0.0


def path_resample(path: SurfacePath, spacing: float) -> np.ndarray:
    """Points along the polyline no farther than `spacing` apart,
    including the original waypoints."""
    pts = path.waypoints
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        seg = np.linalg.norm(b - a)
        n = max(1, int(np.ceil(seg / spacing)))
        for s in range(1, n + 1):
            out.append(a + (b - a) * (s / n))
    return np.asarray(out)


def sweep_tube(path: SurfacePath, radius: float, cell_size: float,
               like: VolumeField | None = None) -> VolumeField:
    """Occupancy of a tube of given radius swept along the path. With `like`
    the tube is rasterized on that field's lattice (values untouched),
    otherwise on a fresh lattice padded around the path."""
    if radius <= 0:
        raise InvariantViolation("radius", "tube radius must be positive")
    if like is None:
        lo = path.waypoints.min(axis=0) - (radius + 2 * cell_size)
        hi = path.waypoints.max(axis=0) + (radius + 2 * cell_size)
        field = make_lattice(lo, hi, cell_size, margin_cells=1)
    else:
        field = VolumeField(like.origin.copy(), like.cell_size,
                            np.zeros(like.dims, dtype=bool))
    samples = path_resample(path, field.cell_size * 0.5)
    r2 = radius * radius
    rvec = np.full(3, radius)
    for p in samples:
        slc = field.index_box_of(p - rvec, p + rvec)
        shape = tuple(s.stop - s.start for s in slc)
        if min(shape) <= 0:
            continue
        idx = np.indices(shape).reshape(3, -1).T
        idx += np.array([s.start for s in slc])
        centers = field.origin + (idx + 0.5) * field.cell_size
        d = centers - p
        inside = (np.einsum("ij,ij->i", d, d) <= r2).reshape(shape)
        field.values[slc] |= inside
    return field
