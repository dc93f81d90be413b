"""Abstract morphology layer: material grids, joint annotations, file I/O,
segmentation, and the kinematic tree.

A morphology is a dense voxel grid of material labels plus a list of hinge
joints given in world millimeters. World frame: voxel (i, j, k) occupies the
axis-aligned cube [i, i+1) x [j, j+1) x [k, k+1) scaled by voxel_size, so its
center sits at (idx + 0.5) * voxel_size and the grid corner is the origin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from scipy import ndimage

from .errors import InvariantViolation, MalformedFile

FORMAT_VERSION = 1
DIM_MIN = 4
DIM_MAX = 256
AXIS_UNIT_TOL = 1e-9


class MaterialLabel(IntEnum):
    EMPTY = 0
    RIGID = 1
    SOFT = 2


@dataclass
class MaterialGrid:
    """Dense voxel label grid. labels has shape dims and values in {0,1,2}."""

    dims: tuple[int, int, int]
    voxel_size: float
    labels: np.ndarray

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.dims) != 3:
            raise InvariantViolation("dims", "expected three axes")
        for d in self.dims:
            if not (DIM_MIN <= d <= DIM_MAX):
                raise InvariantViolation(
                    "dims", f"axis length {d} outside [{DIM_MIN}, {DIM_MAX}]")
        if not (self.voxel_size > 0):
            raise InvariantViolation("voxel_size_mm", "must be positive")
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        if self.labels.shape != self.dims:
            raise InvariantViolation(
                "labels", f"shape {self.labels.shape} != dims {self.dims}")
        if self.labels.max(initial=0) > 2:
            raise InvariantViolation("labels", "label codes must be 0, 1 or 2")

    @property
    def bbox_max(self) -> np.ndarray:
        """World-space upper corner of the grid in mm."""
        return np.array(self.dims, dtype=float) * self.voxel_size

    def voxel_centers(self, mask: np.ndarray | None = None) -> np.ndarray:
        """World centers of masked voxels (all voxels when mask is None)."""
        if mask is None:
            mask = np.ones(self.dims, dtype=bool)
        idx = np.argwhere(mask)
        return (idx + 0.5) * self.voxel_size


@dataclass
class JointAnnotation:
    """Hinge joint: anchor point, unit rotation axis, motion range in rad."""

    id: int
    position: np.ndarray
    axis: np.ndarray
    motion_range: tuple[float, float]

    def __post_init__(self):
        self.id = int(self.id)
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.axis = np.asarray(self.axis, dtype=float).reshape(3)
        lo, hi = (float(self.motion_range[0]), float(self.motion_range[1]))
        self.motion_range = (lo, hi)
        if abs(np.linalg.norm(self.axis) - 1.0) > AXIS_UNIT_TOL:
            raise InvariantViolation(
                "axis", f"joint {self.id} axis is not unit length")
        if not (lo <= 0.0 <= hi):
            raise InvariantViolation(
                "range_rad", f"joint {self.id} range must bracket 0")
        if hi - lo > 2.0 * np.pi + 1e-12:
            raise InvariantViolation(
                "range_rad", f"joint {self.id} range wider than a full turn")


@dataclass
class MorphologySpec:
    """A material grid plus joints plus free-form metadata."""

    grid: MaterialGrid
    joints: list[JointAnnotation]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [j.id for j in self.joints]
        if len(ids) != len(set(ids)):
            raise InvariantViolation("joints", "joint ids must be unique")
        hi = self.grid.bbox_max
        for j in self.joints:
            if np.any(j.position < -1e-9) or np.any(j.position > hi + 1e-9):
                raise InvariantViolation(
                    "position_mm",
                    f"joint {j.id} position lies outside the grid bbox")


@dataclass(frozen=True)
class JointClearanceParams:
    """Clearance carved around each joint before meshing.

    cylinder_radius / cylinder_half_length bound the rigid-side clearance
    cylinder along the joint axis; soft_sphere_radius bounds the soft-side
    clearance ball; opening_radius_voxels is the erode-dilate radius applied
    to the soft occupancy.
    """

    cylinder_radius: float
    cylinder_half_length: float
    soft_sphere_radius: float
    opening_radius_voxels: int = 1

    def __post_init__(self):
        if min(self.cylinder_radius, self.cylinder_half_length,
               self.soft_sphere_radius) <= 0:
            raise InvariantViolation("clearance", "radii must be positive")
        if self.opening_radius_voxels < 0:
            raise InvariantViolation("clearance", "opening radius must be >= 0")


# ---------------------------------------------------------------------------
# File format


def _rle_encode(flat: np.ndarray) -> list[list[int]]:
    if flat.size == 0:
        return []
    change = np.flatnonzero(flat[1:] != flat[:-1])
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change + 1, [flat.size]))
    return [[int(e - s), int(flat[s])] for s, e in zip(starts, ends)]


def _rle_decode(runs, total: int) -> np.ndarray:
    counts = np.array([r[0] for r in runs], dtype=np.int64)
    values = np.array([r[1] for r in runs], dtype=np.int64)
    if counts.size and counts.min() < 1:
        raise MalformedFile("labels_rle: run counts must be >= 1")
    if counts.sum() != total:
        raise MalformedFile(
            f"labels_rle: runs cover {counts.sum()} voxels, expected {total}")
    if values.size and (values.min() < 0 or values.max() > 2):
        raise MalformedFile("labels_rle: label codes must be 0, 1 or 2")
    return np.repeat(values, counts).astype(np.uint8)


def parse_morphology(data: bytes | str) -> MorphologySpec:
    """Parse a .vmorph document. Raises MalformedFile on structural problems
    and InvariantViolation on semantic ones."""
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedFile(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedFile("top-level value must be an object")
    for key in ("version", "dims", "voxel_size_mm", "labels_rle", "joints"):
        if key not in doc:
            raise MalformedFile(f"missing required field {key!r}")
    if doc["version"] != FORMAT_VERSION:
        raise MalformedFile(f"unsupported version {doc['version']!r}")
    dims = doc["dims"]
    if (not isinstance(dims, list) or len(dims) != 3
            or not all(isinstance(d, int) for d in dims)):
        raise MalformedFile("dims must be three integers")
    if not isinstance(doc["labels_rle"], list) or not all(
            isinstance(r, list) and len(r) == 2
            and all(isinstance(v, int) for v in r) for r in doc["labels_rle"]):
        raise MalformedFile("labels_rle must be a list of [count, label]")
    nx, ny, nz = dims
    flat = _rle_decode(doc["labels_rle"], nx * ny * nz)
    # File order is x-fastest, then y, then z.
    labels = flat.reshape((nz, ny, nx)).transpose(2, 1, 0)
    try:
        voxel_size = float(doc["voxel_size_mm"])
    except (TypeError, ValueError) as exc:
        raise MalformedFile("voxel_size_mm must be a number") from exc
    grid = MaterialGrid(dims=(nx, ny, nz), voxel_size=voxel_size,
                        labels=labels)
    joints = []
    if not isinstance(doc["joints"], list):
        raise MalformedFile("joints must be a list")
    for entry in doc["joints"]:
        if not isinstance(entry, dict):
            raise MalformedFile("each joint must be an object")
        for key in ("id", "position_mm", "axis", "range_rad"):
            if key not in entry:
                raise MalformedFile(f"joint missing field {key!r}")
        joints.append(JointAnnotation(
            id=entry["id"], position=entry["position_mm"],
            axis=entry["axis"],
            motion_range=(entry["range_rad"][0], entry["range_rad"][1])))
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise MalformedFile("meta must be an object")
    return MorphologySpec(grid=grid, joints=joints, meta=meta)


def serialize_morphology(spec: MorphologySpec) -> bytes:
    """Serialize to canonical bytes: sorted keys, compact separators, runs in
    x-fastest order. parse(serialize(s)) reproduces s exactly."""
    flat = spec.grid.labels.transpose(2, 1, 0).ravel()
    doc = {
        "version": FORMAT_VERSION,
        "dims": list(spec.grid.dims),
        "voxel_size_mm": spec.grid.voxel_size,
        "labels_rle": _rle_encode(flat),
        "joints": [
            {
                "id": j.id,
                "position_mm": [float(v) for v in j.position],
                "axis": [float(v) for v in j.axis],
                "range_rad": [j.motion_range[0], j.motion_range[1]],
            }
            for j in sorted(spec.joints, key=lambda j: j.id)
        ],
        "meta": spec.meta,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


# ---------------------------------------------------------------------------
# Segmentation and kinematic tree


def joint_cylinder_mask(grid: MaterialGrid, joint: JointAnnotation,
                        radius: float, half_length: float) -> np.ndarray:
    """Boolean mask of voxels whose centers lie in the joint's clearance
    cylinder (finite, centered on the joint position, aligned to its axis)."""
    nx, ny, nz = grid.dims
    s = grid.voxel_size
    ii = (np.arange(nx) + 0.5) * s - joint.position[0]
    jj = (np.arange(ny) + 0.5) * s - joint.position[1]
    kk = (np.arange(nz) + 0.5) * s - joint.position[2]
    dx, dy, dz = np.meshgrid(ii, jj, kk, indexing="ij")
    a = joint.axis
    axial = dx * a[0] + dy * a[1] + dz * a[2]
    rad2 = dx * dx + dy * dy + dz * dz - axial * axial
    return (np.abs(axial) <= half_length) & (rad2 <= radius * radius)


@dataclass
class SegmentLabeling:
    """Per-voxel rigid segment ids. segment_id is -1 outside rigid material
    and inside joint clearance; ids are dense in [0, segment_count)."""

    segment_id: np.ndarray
    segment_count: int
    segment_volumes: np.ndarray


_CONN6 = ndimage.generate_binary_structure(3, 1)


def label_segments(grid: MaterialGrid, joints: list[JointAnnotation],
                   clearance: JointClearanceParams) -> SegmentLabeling:
    """Split rigid material into segments separated by joint clearance.

    Connectivity is 6-neighbor. Segment ids are assigned by scanline order
    (x-fastest) of each component's first voxel, so the labeling is
    deterministic for a given grid and joint set.
    """
    mask = grid.labels == MaterialLabel.RIGID
    for j in joints:
        mask &= ~joint_cylinder_mask(grid, j, clearance.cylinder_radius,
                                     clearance.cylinder_half_length)
    raw, n = ndimage.label(mask, structure=_CONN6)
    seg = np.full(grid.dims, -1, dtype=np.int32)
    if n == 0:
        return SegmentLabeling(seg, 0, np.zeros(0, dtype=np.int64))
    # Rank components by the x-fastest linear index of their first voxel.
    nx, ny, nz = grid.dims
    ii, jj, kk = np.nonzero(raw)
    lin = ii + nx * (jj + ny * kk)
    comp = raw[ii, jj, kk]
    first = np.full(n + 1, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(first, comp, lin)
    order = np.argsort(first[1:], kind="stable")
    remap = np.zeros(n + 1, dtype=np.int32)
    remap[order + 1] = np.arange(n, dtype=np.int32)
    remap[0] = -1
    seg = remap[raw]
    volumes = np.bincount(seg[seg >= 0].ravel(), minlength=n).astype(np.int64)
    return SegmentLabeling(seg, n, volumes)


@dataclass
class KinematicTree:
    """Segments as nodes, joints as edges. edges are (joint_id, seg_a, seg_b)
    with seg_a < seg_b; root is the largest segment (ties: lower id)."""

    nodes: list[int]
    edges: list[tuple[int, int, int]]
    root: int | None
    valid: bool
    invalid_reason: str | None = None


def build_kinematic_tree(grid: MaterialGrid, labeling: SegmentLabeling,
                         joints: list[JointAnnotation],
                         clearance: JointClearanceParams) -> KinematicTree:
    """Attach each joint to the two segments it separates and validate that
    the result is one connected tree.

    A joint's incident segments are the two with the largest rigid-voxel
    counts inside its clearance cylinder dilated by one voxel (ties go to the
    lower segment id). Validity requires every joint to touch two distinct
    segments, the graph to be connected, and the edge count to equal
    node count - 1.
    """
    n = labeling.segment_count
    nodes = list(range(n))
    if n == 0:
        return KinematicTree(nodes, [], None, False, "no rigid segments")
    root = int(np.argmax(labeling.segment_volumes))
    edges: list[tuple[int, int, int]] = []
    grow = grid.voxel_size
    for j in sorted(joints, key=lambda j: j.id):
        mask = joint_cylinder_mask(grid, j, clearance.cylinder_radius + grow,
                                   clearance.cylinder_half_length + grow)
        ids = labeling.segment_id[mask]
        ids = ids[ids >= 0]
        counts = np.bincount(ids, minlength=n)
        touched = np.flatnonzero(counts)
        if touched.size < 2:
            return KinematicTree(
                nodes, edges, root, False,
                f"joint {j.id} touches fewer than two segments")
        # Two largest counts; argsort on (-count, id) keeps ties deterministic.
        top = sorted(touched, key=lambda s: (-counts[s], s))[:2]
        a, b = sorted(int(s) for s in top)
        edges.append((j.id, a, b))
    # Union-find over segments.
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for _, a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    roots = {find(x) for x in range(n)}
    if len(roots) > 1:
        return KinematicTree(nodes, edges, root, False,
                             "segments are disconnected")
    if len(edges) != n - 1:
        return KinematicTree(nodes, edges, root, False,
                             "joints form a cycle")
    return KinematicTree(nodes, edges, root, True, None)


# ---------------------------------------------------------------------------
# Voxel morphology operators


def _ball_structure(radius: int) -> np.ndarray:
    r = int(radius)
    span = np.arange(-r, r + 1)
    dx, dy, dz = np.meshgrid(span, span, span, indexing="ij")
    return (dx * dx + dy * dy + dz * dz) <= r * r


def erode(occupancy: np.ndarray, radius_voxels: int) -> np.ndarray:
    """Morphological erosion with a Euclidean ball. Cells beyond the array
    border count as empty. radius 0 is the identity."""
    occ = np.ascontiguousarray(occupancy, dtype=bool)
    if radius_voxels == 0:
        return occ.copy()
    return ndimage.binary_erosion(
        occ, structure=_ball_structure(radius_voxels), border_value=0)


def dilate(occupancy: np.ndarray, radius_voxels: int) -> np.ndarray:
    """Morphological dilation with a Euclidean ball, clipped at the border.
    radius 0 is the identity."""
    occ = np.ascontiguousarray(occupancy, dtype=bool)
    if radius_voxels == 0:
        return occ.copy()
    return ndimage.binary_dilation(
        occ, structure=_ball_structure(radius_voxels), border_value=0)
