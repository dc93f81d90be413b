"""Scalar volume fields on axis-aligned lattices.

A field stores one value per cell; cell (i, j, k) is centered at
origin + (idx + 0.5) * cell_size. Occupancy fields are boolean, signed
distance fields are float64 in millimeters (positive inside). Everything
outside the lattice counts as empty / far outside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import InvariantViolation, NoInterior, NonWatertight
from .mesh import TriMesh, is_watertight


@dataclass
class VolumeField:
    origin: np.ndarray
    cell_size: float
    values: np.ndarray

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        self.cell_size = float(self.cell_size)
        self.values = np.asarray(self.values)
        if self.values.ndim != 3:
            raise ValueError("field values must be a 3d array")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape

    def copy(self) -> "VolumeField":
        return VolumeField(self.origin.copy(), self.cell_size,
                           self.values.copy())

    def same_lattice(self, other: "VolumeField") -> bool:
        return (self.dims == other.dims
                and abs(self.cell_size - other.cell_size) < 1e-12
                and bool(np.all(np.abs(self.origin - other.origin) < 1e-9)))

    def occupancy(self) -> np.ndarray:
        return self.values.astype(bool)

    def occupied_volume(self) -> float:
        """Total volume of truthy cells in mm^3."""
        return float(np.count_nonzero(self.values)) * self.cell_size ** 3

    def cell_centers(self, mask: np.ndarray | None = None) -> np.ndarray:
        idx = np.argwhere(self.occupancy() if mask is None else mask)
        return self.origin + (idx + 0.5) * self.cell_size

    def center_of_mass(self) -> np.ndarray:
        """Mean of occupied cell centers (world mm). Raises on empty."""
        idx = np.argwhere(self.occupancy())
        if len(idx) == 0:
            raise InvariantViolation("values", "field has no occupied cells")
        return self.origin + (idx.mean(axis=0) + 0.5) * self.cell_size

    def axis_centers(self, axis: int) -> np.ndarray:
        n = self.dims[axis]
        return self.origin[axis] + (np.arange(n) + 0.5) * self.cell_size

    def world_to_index(self, points: np.ndarray) -> np.ndarray:
        """Continuous index coordinates: integer i lands on cell i's center."""
        points = np.asarray(points, dtype=float)
        return (points - self.origin) / self.cell_size - 0.5

    def index_box_of(self, lo: np.ndarray, hi: np.ndarray,
                     pad_cells: int = 0) -> tuple[slice, slice, slice]:
        """Slices covering the world box [lo, hi], clipped to the lattice."""
        i0 = np.floor((np.asarray(lo) - self.origin) / self.cell_size).astype(int)
        i1 = np.ceil((np.asarray(hi) - self.origin) / self.cell_size).astype(int)
        i0 = np.clip(i0 - pad_cells, 0, self.dims)
        i1 = np.clip(i1 + 1 + pad_cells, 0, self.dims)
        return tuple(slice(int(a), int(b)) for a, b in zip(i0, i1))

    def sample_nearest(self, points: np.ndarray):
        """Values at the cells containing the points; 0 outside the lattice."""
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        idx = np.floor((points - self.origin) / self.cell_size).astype(np.int64)
        inb = np.all((idx >= 0) & (idx < np.array(self.dims)), axis=1)
        out = np.zeros(len(points), dtype=self.values.dtype)
        ii = idx[inb]
        out[inb] = self.values[ii[:, 0], ii[:, 1], ii[:, 2]]
        return out

    def sample_trilinear(self, points: np.ndarray,
                         fill: float = -1e30) -> np.ndarray:
        """Trilinear interpolation of a float field; `fill` outside."""
        pts = self.world_to_index(np.asarray(points, dtype=float).reshape(-1, 3))
        return ndimage.map_coordinates(
            self.values.astype(np.float64), pts.T, order=1,
            mode="constant", cval=fill)


def make_lattice(lo: np.ndarray, hi: np.ndarray, cell_size: float,
                 margin_cells: int = 1) -> VolumeField:
    """Empty boolean field whose cells cover [lo, hi] plus a margin."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    origin = lo - margin_cells * cell_size
    dims = np.maximum(
        np.ceil((hi - lo) / cell_size - 1e-9).astype(int) + 2 * margin_cells, 1)
    return VolumeField(origin, cell_size,
                       np.zeros(tuple(int(d) for d in dims), dtype=bool))


def field_boolean(a: VolumeField, b: VolumeField, op: str) -> VolumeField:
    """union / intersection / difference of occupancy fields, evaluated on
    a's lattice. b is resampled by nearest cell when the lattices differ;
    cells outside b count as empty."""
    av = a.occupancy()
    if a.same_lattice(b):
        bv = b.occupancy()
    else:
        centers = a.origin + (np.indices(a.dims).reshape(3, -1).T + 0.5) * a.cell_size
        bv = b.sample_nearest(centers).astype(bool).reshape(a.dims)
    if op == "union":
        out = av | bv
    elif op == "intersection":
        out = av & bv
    elif op == "difference":
        out = av & ~bv
    else:
        raise ValueError(f"unknown boolean op {op!r}")
    return VolumeField(a.origin.copy(), a.cell_size, out)


def signed_distance(occ: VolumeField) -> VolumeField:
    """Signed distance sampled at cell centers: positive inside, negative
    outside, with the surface half a cell outside boundary cell centers.
    The lattice border counts as empty. Raises NoInterior on empty fields."""
    o = occ.occupancy()
    if not o.any():
        raise NoInterior("occupancy field has no occupied cell")
    padded = np.pad(o, 1, mode="constant", constant_values=False)
    din = ndimage.distance_transform_edt(padded)[1:-1, 1:-1, 1:-1]
    dout = ndimage.distance_transform_edt(~o)
    phi = np.where(o, din - 0.5, -(dout - 0.5)) * occ.cell_size
    return VolumeField(occ.origin.copy(), occ.cell_size, phi)


def max_interior_clearance(sdf: VolumeField) -> tuple[float, np.ndarray]:
    """Deepest interior point: (clearance_mm, world_point). Ties resolve to
    the first cell in C scan order. Raises NoInterior when nothing is inside."""
    phi = sdf.values
    if not (phi > 0).any():
        raise NoInterior("signed distance field has no interior cell")
    flat = int(np.argmax(phi))
    idx = np.unravel_index(flat, phi.shape)
    point = sdf.origin + (np.array(idx) + 0.5) * sdf.cell_size
    return float(phi[idx]), point


# ---------------------------------------------------------------------------
# Mesh rasterization

# Fixed sub-cell ray offsets keep rays off exact vertex/edge alignments.
_RAY_EPS = (0.6180339887e-6, 0.7548776662e-6)


def _rasterize_parity(vertices: np.ndarray, triangles: np.ndarray,
                      origin: np.ndarray, dims: tuple[int, int, int],
                      cell: float) -> np.ndarray:
    """Cell-center point-in-solid test by +x ray crossing parity."""
    nx, ny, nz = dims
    ry = origin[1] + (np.arange(ny) + 0.5 + _RAY_EPS[0]) * cell
    rz = origin[2] + (np.arange(nz) + 0.5 + _RAY_EPS[1]) * cell
    delta = np.zeros((nx + 1, ny, nz), dtype=np.int32)
    tv = vertices[triangles]
    for v in tv:
        ylo, yhi = v[:, 1].min(), v[:, 1].max()
        zlo, zhi = v[:, 2].min(), v[:, 2].max()
        j0, j1 = np.searchsorted(ry, (ylo, yhi))
        k0, k1 = np.searchsorted(rz, (zlo, zhi))
        j1 = min(j1 + 1, ny)
        k1 = min(k1 + 1, nz)
        if j0 >= j1 or k0 >= k1:
            continue
        d1 = v[1] - v[0]
        d2 = v[2] - v[0]
        det = d1[1] * d2[2] - d2[1] * d1[2]
        if abs(det) < 1e-30:
            continue
        Y, Z = np.meshgrid(ry[j0:j1], rz[k0:k1], indexing="ij")
        py = Y - v[0, 1]
        pz = Z - v[0, 2]
        s = (py * d2[2] - d2[1] * pz) / det
        t = (d1[1] * pz - py * d1[2]) / det
        hit = (s >= 0.0) & (t >= 0.0) & (s + t <= 1.0)
        if not hit.any():
            continue
        xc = v[0, 0] + s[hit] * d1[0] + t[hit] * d2[0]
        i0 = np.floor((xc - origin[0]) / cell - 0.5).astype(np.int64) + 1
        i0 = np.clip(i0, 0, nx)
        jj, kk = np.nonzero(hit)
        np.add.at(delta, (i0, jj + j0, kk + k0), 1)
    return (np.cumsum(delta, axis=0)[:nx] % 2).astype(bool)


def voxelize(mesh: TriMesh, cell_size: float) -> VolumeField:
    """Occupancy of the solid bounded by a watertight mesh, on a fresh
    lattice with a one-cell empty margin. A cell is occupied when its center
    lies inside the surface."""
    if not is_watertight(mesh):
        raise NonWatertight("voxelize requires a closed mesh")
    lo, hi = mesh.bounds()
    lattice = make_lattice(lo, hi, cell_size, margin_cells=1)
    occ = _rasterize_parity(mesh.vertices, mesh.triangles, lattice.origin,
                            lattice.dims, cell_size)
    return VolumeField(lattice.origin, cell_size, occ)


def intersection_volume(a: TriMesh, b: TriMesh, cell_size: float) -> float:
    """Volume of the boolean intersection of two solids, in mm^3, measured
    on one shared lattice so the result is symmetric in its arguments."""
    for m in (a, b):
        if not is_watertight(m):
            raise NonWatertight("intersection volume requires closed meshes")
    alo, ahi = a.bounds()
    blo, bhi = b.bounds()
    lo = np.minimum(alo, blo)
    hi = np.maximum(ahi, bhi)
    lattice = make_lattice(lo, hi, cell_size, margin_cells=1)
    occ_a = _rasterize_parity(a.vertices, a.triangles, lattice.origin,
                              lattice.dims, cell_size)
    occ_b = _rasterize_parity(b.vertices, b.triangles, lattice.origin,
                              lattice.dims, cell_size)
    return float(np.count_nonzero(occ_a & occ_b)) * cell_size ** 3
