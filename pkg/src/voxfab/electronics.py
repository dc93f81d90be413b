"""Electronics solver: battery and controller placement inside rigid parts.

Placement is anchored at each candidate segment's center of mass and scanned
over a discrete orientation set (the 24 chiral octahedral rotations, then
fine tilts). Containment is tested against the segment's signed distance
field after motor embedding, so motor bores and screw holes read as outside.
On success the box cavities are carved and the vertical-insertion
interference volume above each box is recorded.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .body import SemiVirtualBody
from .errors import (REASON_NO_BATTERY_HOST, REASON_NO_CONTROLLER_HOST,
                     GeometryFailure, InvalidDimension, StageFailure)
from .geometry import (Box, VolumeField, signed_distance, solid_cell_mask)

CONTROLLER = "controller"
BATTERY = "battery"

_FINE_ANGLES_DEG = (-30.0, -15.0, 15.0, 30.0)


@dataclass(frozen=True)
class ElectronicsSpec:
    """Component box extents are full widths in mm, in the box frame."""

    controller_box: tuple[float, float, float] = (42.0, 42.0, 14.0)
    battery_box: tuple[float, float, float] = (58.0, 32.0, 20.0)
    clearance: float = 1.5
    insertion_axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if min(self.controller_box) <= 0 or min(self.battery_box) <= 0:
            raise InvalidDimension("box extents must be positive")
        if self.clearance < 0:
            raise InvalidDimension("clearance must be >= 0")
        axis = np.asarray(self.insertion_axis, dtype=float)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
            raise InvalidDimension("insertion axis must be unit length")


@dataclass
class ElectronicsPlacement:
    component: str
    segment: int
    position: np.ndarray       # anchor, the host segment's center of mass
    rotation: np.ndarray       # world_dir = rotation @ box_dir, det +1
    box_center: np.ndarray     # derived box center (stacking offset applied)
    v_insert_mm3: float | None = None

    def pose_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.box_center
        return m


def candidate_orientations(level: str = "coarse") -> list[np.ndarray]:
    """Deterministic rotation candidates. coarse: the 24 orientation-
    preserving signed axis permutations, identity first. fine: coarse plus
    every coarse rotation composed with +-15 and +-30 degree tilts about
    each box axis, deduplicated by rotation angle."""
    coarse = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1.0, -1.0), repeat=3):
            r = np.zeros((3, 3))
            for row, (col, s) in enumerate(zip(perm, signs)):
                r[row, col] = s
            if np.linalg.det(r) > 0:
                coarse.append(r)
    if level == "coarse":
        return coarse
    if level != "fine":
        raise ValueError(f"unknown orientation level {level!r}")
    out = list(coarse)
    for base in coarse:
        for axis in range(3):
            vec = np.zeros(3)
            vec[axis] = 1.0
            for deg in _FINE_ANGLES_DEG:
                tilt = Rotation.from_rotvec(np.deg2rad(deg) * vec).as_matrix()
                cand = base @ tilt
                if all(_rotation_distance(cand, r) > 1e-6 for r in out):
                    out.append(cand)
    return out


def _rotation_distance(r1: np.ndarray, r2: np.ndarray) -> float:
    """Angle of the relative rotation, in radians."""
    tr = np.clip((np.trace(r1.T @ r2) - 1.0) / 2.0, -1.0, 1.0)
    return float(np.arccos(tr))


def _box_solid(extents, center: np.ndarray, rotation: np.ndarray,
               inflate: float = 0.0) -> Box:
    half = np.asarray(extents, dtype=float) / 2.0 + inflate
    return Box(center=center, axes=rotation.T, extents=half)


def test_containment(part_sdf: VolumeField, extents, center: np.ndarray,
                     rotation: np.ndarray, clearance: float) -> bool:
    """True iff every box sample point (vertices plus face lattices at most
    one cell apart) sits at signed distance >= clearance inside the part."""
    box = _box_solid(extents, center, rotation)
    samples = box.surface_samples(part_sdf.cell_size)
    phi = part_sdf.sample_trilinear(samples)
    return bool(np.all(phi >= clearance))


def _extent_along(extents, axis_box: np.ndarray) -> float:
    """Full width of an extents box along a unit direction in its frame."""
    return float(np.abs(np.asarray(extents, dtype=float)) @ np.abs(axis_box))


def segment_center_of_mass(field: VolumeField) -> np.ndarray:
    idx = np.argwhere(field.occupancy())
    return field.origin + (idx.mean(axis=0) + 0.5) * field.cell_size


def _stacked_centers(anchor: np.ndarray, rotation: np.ndarray,
                     spec: ElectronicsSpec) -> tuple[np.ndarray, np.ndarray]:
    """Box centers for the battery-below-controller stack centered on the
    anchor, separated by the clearance gap along the insertion axis."""
    axis_box = np.asarray(spec.insertion_axis, dtype=float)
    stack_dir = rotation @ axis_box
    h_ctl = _extent_along(spec.controller_box, axis_box)
    h_bat = _extent_along(spec.battery_box, axis_box)
    total = h_bat + spec.clearance + h_ctl
    bat_center = anchor - stack_dir * (total / 2.0 - h_bat / 2.0)
    ctl_center = anchor + stack_dir * (total / 2.0 - h_ctl / 2.0)
    return ctl_center, bat_center


def _segments_by_volume(fields: dict[int, VolumeField]) -> list[int]:
    return sorted(fields, key=lambda sid: (-fields[sid].occupied_volume(),
                                           sid))


def place_electronics(body: SemiVirtualBody,
                      spec: ElectronicsSpec) -> list[ElectronicsPlacement]:
    """Find poses for both components and carve their cavities (in place).

    First tries to host the stacked pair in one segment (largest first);
    failing that, distributes the controller and battery across segments
    independently. The first orientation-list success wins, making the
    search deterministic. Raises StageFailure when a component has no host.
    """
    fields = body.rigid_fields
    sdfs = {sid: signed_distance(f) for sid, f in fields.items()
            if f.values.any()}
    order = _segments_by_volume({sid: fields[sid] for sid in sdfs})
    rotations = candidate_orientations("fine")
    placements = None
    for sid in order:
        anchor = segment_center_of_mass(fields[sid])
        for rot in rotations:
            ctl_center, bat_center = _stacked_centers(anchor, rot, spec)
            if (test_containment(sdfs[sid], spec.controller_box, ctl_center,
                                 rot, spec.clearance)
                    and test_containment(sdfs[sid], spec.battery_box,
                                         bat_center, rot, spec.clearance)):
                placements = [
                    ElectronicsPlacement(CONTROLLER, sid, anchor, rot,
                                         ctl_center),
                    ElectronicsPlacement(BATTERY, sid, anchor, rot,
                                         bat_center),
                ]
                break
        if placements:
            break
    if placements is None:
        placements = _place_distributed(fields, sdfs, order, rotations, spec)
    carve_cavities(fields, placements, spec)
    for sid in sorted({pl.segment for pl in placements}):
        body.refresh_rigid_mesh(sid)   # downstream routing must see cavities
    return placements


def _place_single(sdfs, order, rotations, extents, clearance, fields,
                  exclude: int | None = None):
    for sid in order:
        if sid == exclude:
            continue
        anchor = segment_center_of_mass(fields[sid])
        for rot in rotations:
            if test_containment(sdfs[sid], extents, anchor, rot, clearance):
                return sid, anchor, rot
    return None


def _place_distributed(fields, sdfs, order, rotations,
                       spec: ElectronicsSpec) -> list[ElectronicsPlacement]:
    ctl = _place_single(sdfs, order, rotations, spec.controller_box,
                        spec.clearance, fields)
    if ctl is None:
        raise StageFailure("electronics", REASON_NO_CONTROLLER_HOST,
                           detail="no segment hosts the controller box")
    sid_c, anchor_c, rot_c = ctl
    bat = _place_single(sdfs, order, rotations, spec.battery_box,
                        spec.clearance, fields, exclude=sid_c)
    if bat is None:
        raise StageFailure("electronics", REASON_NO_BATTERY_HOST,
                           detail="no remaining segment hosts the battery box")
    sid_b, anchor_b, rot_b = bat
    return [
        ElectronicsPlacement(CONTROLLER, sid_c, anchor_c, rot_c, anchor_c),
        ElectronicsPlacement(BATTERY, sid_b, anchor_b, rot_b, anchor_b),
    ]


def carve_cavities(parts: dict[int, VolumeField],
                   placements: list[ElectronicsPlacement],
                   spec: ElectronicsSpec) -> dict[str, float]:
    """Subtract clearance-inflated box cavities from the host parts and
    record per-component vertical-insertion interference: the part volume
    intersected by the box swept along world +z up to the part's bbox top.
    Mutates parts and fills each placement's v_insert_mm3."""
    out = {}
    for pl in placements:
        extents = (spec.controller_box if pl.component == CONTROLLER
                   else spec.battery_box)
        host = parts[pl.segment]
        cavity = _box_solid(extents, pl.box_center, pl.rotation,
                            inflate=spec.clearance)
        slc, cavity_mask = solid_cell_mask(host, cavity)
        host.values[slc] &= ~cavity_mask
        if not host.values.any():
            raise GeometryFailure(None, f"part {pl.segment} vanished while "
                                  "carving electronics", stage="electronics")
        v = _insertion_interference(host, extents, pl.box_center, pl.rotation)
        pl.v_insert_mm3 = v
        out[pl.component] = v
    return out


def _insertion_interference(part: VolumeField, extents, center: np.ndarray,
                            rotation: np.ndarray) -> float:
    """Volume of part material inside the box's upward sweep (world +z)."""
    box = _box_solid(extents, center, rotation)
    box_occ = np.zeros(part.dims, dtype=bool)
    slc, mask = solid_cell_mask(part, box)
    box_occ[slc] = mask
    if not box_occ.any():
        return 0.0
    occ = part.occupancy()
    part_cells = np.argwhere(occ)
    top_k = int(part_cells[:, 2].max())
    swept = np.maximum.accumulate(box_occ, axis=2)
    swept &= ~box_occ
    swept[:, :, top_k + 1:] = False
    return float(np.count_nonzero(swept & occ)) * part.cell_size ** 3
