"""Triangle meshes: watertightness, signed volume, oriented bounding boxes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateGeometry, NonWatertight

DEGENERATE_AREA = 1e-12  # mm^2; triangles thinner than this are dropped


@dataclass
class TriMesh:
    """Indexed triangle mesh in world millimeters.

    Degenerate triangles (area below DEGENERATE_AREA) are removed on
    construction; vertex positions are kept as float64.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    part_label: str | None = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.triangles.size:
            if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
                raise DegenerateGeometry("triangle index out of range")
            keep = self.triangle_areas() > DEGENERATE_AREA
            self.triangles = self.triangles[keep]

    def triangle_areas(self) -> np.ndarray:
        v = self.vertices[self.triangles]
        return 0.5 * np.linalg.norm(
            np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)

    def triangle_normals(self) -> np.ndarray:
        """Unit normals; zero vector for (numerically) degenerate triangles."""
        v = self.vertices[self.triangles]
        n = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
        length = np.linalg.norm(n, axis=1, keepdims=True)
        return np.where(length > 1e-30, n / np.maximum(length, 1e-300), 0.0)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if len(self.vertices) == 0:
            raise DegenerateGeometry("empty mesh has no bounds")
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def _directed_edges(triangles: np.ndarray) -> np.ndarray:
    return triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)


def is_watertight(mesh: TriMesh) -> bool:
    """True when the mesh is a closed orientable surface: every undirected
    edge is shared by exactly two triangles with opposite directions."""
    if len(mesh.triangles) < 4:
        return False
    d = _directed_edges(mesh.triangles)
    # Opposite directions: each directed edge must appear exactly once.
    _, dir_counts = np.unique(d, axis=0, return_counts=True)
    if dir_counts.max() != 1:
        return False
    und = np.sort(d, axis=1)
    _, counts = np.unique(und, axis=0, return_counts=True)
    return bool(counts.min() == 2 and counts.max() == 2)


def mesh_volume(mesh: TriMesh) -> float:
    """Enclosed volume in mm^3 via the divergence theorem. Positive for
    outward-oriented surfaces. Raises NonWatertight on open meshes."""
    if not is_watertight(mesh):
        raise NonWatertight("mesh volume requires a closed oriented surface")
    v = mesh.vertices[mesh.triangles]
    return float(np.einsum("ij,ij->", v[:, 0], np.cross(v[:, 1], v[:, 2])) / 6.0)


def merge_meshes(meshes: list[TriMesh]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Concatenate meshes into one vertex/triangle soup.

    Returns (vertices, triangles, vertex_offsets) where vertex_offsets[i] is
    the index of mesh i's first vertex in the merged array.
    """
    offsets = np.zeros(len(meshes), dtype=np.int64)
    verts, tris = [], []
    total = 0
    for i, m in enumerate(meshes):
        offsets[i] = total
        verts.append(m.vertices)
        tris.append(m.triangles + total)
        total += len(m.vertices)
    if not meshes:
        return np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64), offsets
    return np.vstack(verts), np.vstack(tris), offsets


@dataclass
class OrientedBox:
    """Oriented bounding box: axes are rows of a right-handed rotation,
    extents are half-extents sorted in descending order."""

    center: np.ndarray
    axes: np.ndarray
    extents: np.ndarray

    @property
    def max_extent(self) -> float:
        """Largest full width of the box (extents store half-widths)."""
        return float(2.0 * self.extents[0])

    def corners(self) -> np.ndarray:
        signs = np.array([[sx, sy, sz] for sx in (-1, 1)
                          for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
        return self.center + (signs * self.extents) @ self.axes


def oriented_bounding_box(mesh: TriMesh) -> OrientedBox:
    """PCA box from the exact area-weighted covariance of the surface.

    Second moments are integrated analytically per triangle (not lumped at
    centroids) so symmetric surfaces keep axis-aligned eigenvectors even at
    coarse tessellation. Axes are the covariance eigenvectors; extents come
    from projecting all vertices. Deterministic sign convention: each axis
    points so that its largest-magnitude component is positive; if that
    leaves a left-handed frame the last (shortest) axis is negated. Raises
    DegenerateGeometry for flat or near-empty geometry.
    """
    if len(mesh.vertices) < 4 or len(mesh.triangles) < 2:
        raise DegenerateGeometry("oriented box needs a non-flat mesh")
    areas = mesh.triangle_areas()
    total = areas.sum()
    if total <= DEGENERATE_AREA:
        raise DegenerateGeometry("mesh has no surface area")
    v = mesh.vertices[mesh.triangles]
    centroids = v.mean(axis=1)
    mu = (areas[:, None] * centroids).sum(axis=0) / total
    # Integral of (x - mu)(x - mu)^T over each triangle:
    # A/12 * (sum_i d_i d_i^T + 9 c c^T) with d_i = p_i - mu, c = centroid - mu.
    d = v - mu
    c = centroids - mu
    second = np.einsum("tia,tib->tab", d, d) + 9.0 * np.einsum(
        "ta,tb->tab", c, c)
    cov = np.einsum("t,tab->ab", areas / 12.0, second) / total
    _, vecs = np.linalg.eigh(cov)
    axes = vecs.T  # rows
    proj = mesh.vertices @ axes.T
    lo, hi = proj.min(axis=0), proj.max(axis=0)
    extents = (hi - lo) / 2.0
    centers_local = (hi + lo) / 2.0
    order = np.argsort(-extents, kind="stable")
    axes, extents, centers_local = axes[order], extents[order], centers_local[order]
    for i in range(3):
        k = int(np.argmax(np.abs(axes[i])))
        if axes[i, k] < 0:
            axes[i] = -axes[i]
            centers_local[i] = -centers_local[i]
    if np.linalg.det(axes) < 0:
        axes[2] = -axes[2]
        centers_local[2] = -centers_local[2]
    if extents[2] <= 1e-9:
        raise DegenerateGeometry("mesh is flat along its shortest axis")
    center = centers_local @ axes
    return OrientedBox(center=center, axes=axes, extents=extents)
