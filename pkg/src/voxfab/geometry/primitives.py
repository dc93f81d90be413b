"""Analytic solids and their meshes.

Solids double as predicates (contains) for cell-level rasterization onto
fields and as watertight meshes for export and volume checks. All meshes are
outward oriented.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidDimension
from .field import VolumeField
from .mesh import TriMesh


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise InvalidDimension("axis must be a nonzero vector")
    return v / n


def orthonormal_frame(axis) -> np.ndarray:
    """Right-handed frame (rows u, v, w) with w = axis. Deterministic: u is
    built from whichever world axis is least aligned with w."""
    w = _unit(axis)
    seed = np.zeros(3)
    seed[int(np.argmin(np.abs(w)))] = 1.0
    u = np.cross(seed, w)
    u /= np.linalg.norm(u)
    v = np.cross(w, u)
    return np.vstack([u, v, w])


@dataclass(frozen=True)
class Cylinder:
    """Finite solid cylinder centered on `center`, axis `axis` (unit),
    half length along the axis, radius across it."""

    center: np.ndarray
    axis: np.ndarray
    radius: float
    half_length: float

    def __post_init__(self):
        object.__setattr__(self, "center",
                           np.asarray(self.center, dtype=float).reshape(3))
        object.__setattr__(self, "axis", _unit(self.axis))
        if self.radius <= 0 or self.half_length <= 0:
            raise InvalidDimension("cylinder dimensions must be positive")

    def contains(self, points: np.ndarray) -> np.ndarray:
        d = np.asarray(points, dtype=float).reshape(-1, 3) - self.center
        ax = d @ self.axis
        rad2 = np.einsum("ij,ij->i", d, d) - ax * ax
        return (np.abs(ax) <= self.half_length) & (rad2 <= self.radius ** 2)

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        # Exact box of a finite cylinder: |h*a| + r*sqrt(1-a^2) per axis.
        a = self.axis
        reach = (self.half_length * np.abs(a)
                 + self.radius * np.sqrt(np.maximum(1.0 - a * a, 0.0)))
        return self.center - reach, self.center + reach

    def volume(self) -> float:
        return float(np.pi * self.radius ** 2 * 2.0 * self.half_length)


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center",
                           np.asarray(self.center, dtype=float).reshape(3))
        if self.radius <= 0:
            raise InvalidDimension("sphere radius must be positive")

    def contains(self, points: np.ndarray) -> np.ndarray:
        d = np.asarray(points, dtype=float).reshape(-1, 3) - self.center
        return np.einsum("ij,ij->i", d, d) <= self.radius ** 2

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        r = np.full(3, self.radius)
        return self.center - r, self.center + r

    def volume(self) -> float:
        return float(4.0 / 3.0 * np.pi * self.radius ** 3)


@dataclass(frozen=True)
class Box:
    """Oriented solid box; axes are rows of a rotation, extents are half."""

    center: np.ndarray
    axes: np.ndarray
    extents: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center",
                           np.asarray(self.center, dtype=float).reshape(3))
        object.__setattr__(self, "axes",
                           np.asarray(self.axes, dtype=float).reshape(3, 3))
        object.__setattr__(self, "extents",
                           np.asarray(self.extents, dtype=float).reshape(3))
        if np.any(self.extents <= 0):
            raise InvalidDimension("box extents must be positive")

    def contains(self, points: np.ndarray) -> np.ndarray:
        d = np.asarray(points, dtype=float).reshape(-1, 3) - self.center
        local = d @ self.axes.T
        return np.all(np.abs(local) <= self.extents + 1e-12, axis=1)

    def corners(self) -> np.ndarray:
        signs = np.array([[sx, sy, sz] for sx in (-1, 1)
                          for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
        return self.center + (signs * self.extents) @ self.axes

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        c = self.corners()
        return c.min(axis=0), c.max(axis=0)

    def volume(self) -> float:
        return float(8.0 * np.prod(self.extents))

    def surface_samples(self, spacing: float) -> np.ndarray:
        """Corner + face lattice points at most `spacing` apart, used for
        conservative containment tests."""
        pts = [self.corners()]
        e = self.extents
        for axis in range(3):
            u, v = [i for i in range(3) if i != axis]
            nu = max(2, int(np.ceil(2 * e[u] / spacing)) + 1)
            nv = max(2, int(np.ceil(2 * e[v] / spacing)) + 1)
            us = np.linspace(-e[u], e[u], nu)
            vs = np.linspace(-e[v], e[v], nv)
            U, V = np.meshgrid(us, vs, indexing="ij")
            for side in (-e[axis], e[axis]):
                local = np.zeros((U.size, 3))
                local[:, u] = U.ravel()
                local[:, v] = V.ravel()
                local[:, axis] = side
                pts.append(self.center + local @ self.axes)
        return np.vstack(pts)


Solid = Cylinder | Sphere | Box


# ---------------------------------------------------------------------------
# Field-level rasterization of solids


def _solids_aabb(solids: list) -> tuple[np.ndarray, np.ndarray]:
    los, his = zip(*(s.aabb() for s in solids))
    return np.min(los, axis=0), np.max(his, axis=0)


def solid_cell_mask(field: VolumeField, solids) -> tuple[tuple, np.ndarray]:
    """(slices, mask) of field cells whose centers lie in the solid union.
    The mask only covers the solids' bounding box for speed."""
    if not isinstance(solids, (list, tuple)):
        solids = [solids]
    lo, hi = _solids_aabb(list(solids))
    slc = field.index_box_of(lo, hi, pad_cells=1)
    shape = tuple(s.stop - s.start for s in slc)
    if min(shape) <= 0:
        return slc, np.zeros(shape, dtype=bool)
    idx = np.indices(shape).reshape(3, -1).T
    idx += np.array([s.start for s in slc])
    centers = field.origin + (idx + 0.5) * field.cell_size
    mask = np.zeros(len(centers), dtype=bool)
    for s in solids:
        mask |= s.contains(centers)
    return slc, mask.reshape(shape)


def count_overlap_cells(field: VolumeField, solids) -> int:
    """Number of occupied field cells inside the solid union."""
    slc, mask = solid_cell_mask(field, solids)
    return int(np.count_nonzero(field.occupancy()[slc] & mask))


def apply_union(field: VolumeField, solids) -> None:
    slc, mask = solid_cell_mask(field, solids)
    field.values[slc] |= mask


def apply_difference(field: VolumeField, solids) -> None:
    slc, mask = solid_cell_mask(field, solids)
    field.values[slc] &= ~mask


# ---------------------------------------------------------------------------
# Primitive meshes

_BOX_FACES = np.array([
    [0, 1, 3], [0, 3, 2],  # -x
    [4, 6, 7], [4, 7, 5],  # +x
    [0, 4, 5], [0, 5, 1],  # -y
    [2, 3, 7], [2, 7, 6],  # +y
    [0, 2, 6], [0, 6, 4],  # -z
    [1, 5, 7], [1, 7, 3],  # +z
], dtype=np.int64)


def make_box(half_extents, center=(0.0, 0.0, 0.0),
             axes: np.ndarray | None = None) -> TriMesh:
    """Axis-aligned (or rotated, when axes given) box mesh, 12 triangles."""
    e = np.asarray(half_extents, dtype=float).reshape(3)
    if np.any(e <= 0):
        raise InvalidDimension("box half extents must be positive")
    signs = np.array([[sx, sy, sz] for sx in (-1, 1)
                      for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
    local = signs * e
    if axes is not None:
        local = local @ np.asarray(axes, dtype=float).reshape(3, 3)
    return TriMesh(vertices=np.asarray(center, dtype=float) + local,
                   triangles=_BOX_FACES.copy())


def make_cylinder(radius: float, half_length: float, axis=(0.0, 0.0, 1.0),
                  center=(0.0, 0.0, 0.0), segments: int = 48) -> TriMesh:
    """Closed cylinder mesh with fan caps."""
    if radius <= 0 or half_length <= 0:
        raise InvalidDimension("cylinder dimensions must be positive")
    if segments < 3:
        raise InvalidDimension("cylinder needs at least 3 segments")
    frame = orthonormal_frame(axis)
    u, v, w = frame
    c = np.asarray(center, dtype=float).reshape(3)
    ang = 2.0 * np.pi * np.arange(segments) / segments
    ring = np.outer(np.cos(ang), u) + np.outer(np.sin(ang), v)
    bottom = c - half_length * w + radius * ring
    top = c + half_length * w + radius * ring
    verts = np.vstack([bottom, top, c - half_length * w, c + half_length * w])
    cb, ct = 2 * segments, 2 * segments + 1
    tris = []
    for i in range(segments):
        j = (i + 1) % segments
        # Side quad, outward.
        tris.append([i, j, segments + i])
        tris.append([j, segments + j, segments + i])
        # Caps: bottom faces -w, top faces +w.
        tris.append([cb, j, i])
        tris.append([ct, segments + i, segments + j])
    return TriMesh(vertices=verts, triangles=np.array(tris, dtype=np.int64))


def make_sphere(radius: float, center=(0.0, 0.0, 0.0), rings: int = 24,
                segments: int = 48) -> TriMesh:
    """UV sphere mesh with pole fans."""
    if radius <= 0:
        raise InvalidDimension("sphere radius must be positive")
    if rings < 2 or segments < 3:
        raise InvalidDimension("sphere tessellation too coarse")
    c = np.asarray(center, dtype=float).reshape(3)
    verts = [c + np.array([0.0, 0.0, radius])]
    for r in range(1, rings):
        phi = np.pi * r / rings
        z = radius * np.cos(phi)
        rr = radius * np.sin(phi)
        ang = 2.0 * np.pi * np.arange(segments) / segments
        band = np.column_stack([rr * np.cos(ang), rr * np.sin(ang),
                                np.full(segments, z)])
        verts.append(c + band)
    verts.append(c + np.array([0.0, 0.0, -radius]))
    verts = np.vstack([np.atleast_2d(v) for v in verts])
    south = len(verts) - 1
    tris = []
    first = lambda r: 1 + (r - 1) * segments
    for i in range(segments):
        j = (i + 1) % segments
        tris.append([0, first(1) + i, first(1) + j])
    for r in range(1, rings - 1):
        a, b = first(r), first(r + 1)
        for i in range(segments):
            j = (i + 1) % segments
            tris.append([a + i, b + i, b + j])
            tris.append([a + i, b + j, a + j])
    last = first(rings - 1)
    for i in range(segments):
        j = (i + 1) % segments
        tris.append([south, last + j, last + i])
    return TriMesh(vertices=verts, triangles=np.array(tris, dtype=np.int64))
