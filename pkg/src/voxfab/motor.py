"""Motor solver: feasible joint motion, interference carving, offset scan,
and holder/connector embedding.

For each joint the solver first sweeps the child part through the annotated
motion range and carves any interference, then scans motor offsets along the
joint axis. At offset delta the motor center sits at p_j + delta * a_j; the
holder sleeve occupies one axial side and the connector bracket the other.
The attachment strength proxy is the material volume each solid wraps:
V_h (holder vs its target part) and V_c (connector vs the other part), and
the score is S(delta) = [V_h >= tau and V_c >= tau] * g with
g = sqrt(V_h * V_c) + alpha * (V_h + V_c). Ties prefer smaller |delta|,
then the holder_on_a configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial.transform import Rotation

from .body import SemiVirtualBody
from .errors import (GeometryFailure, InvalidDimension, InvalidTree,
                     NoFeasibleOffset, ZeroFeasibleRange)
from .geometry import (Cylinder, TriMesh, VolumeField, apply_difference,
                       apply_union, count_overlap_cells, orthonormal_frame,
                       voxelize)
from .morphology import JointAnnotation

HOLDER_ON_A = "holder_on_a"
HOLDER_ON_B = "holder_on_b"


@dataclass(frozen=True)
class MotorSpec:
    """Parametric motor + mount geometry, all lengths in mm."""

    body_radius: float = 6.0
    body_length: float = 14.0
    holder_outer_radius: float = 11.0
    holder_length: float = 18.0
    holder_wall: float = 2.0
    flange_radius: float = 14.0
    flange_thickness: float = 4.0
    connector_outer_radius: float = 9.0
    connector_length: float = 12.0
    screw_count: int = 4
    screw_circle_radius: float = 7.5
    screw_hole_radius: float = 1.5
    fit_clearance: float = 1.0
    mass_g: float = 60.0

    def __post_init__(self):
        dims = (self.body_radius, self.body_length, self.holder_outer_radius,
                self.holder_length, self.holder_wall, self.flange_radius,
                self.flange_thickness, self.connector_outer_radius,
                self.connector_length, self.screw_circle_radius,
                self.screw_hole_radius, self.fit_clearance)
        if min(dims) <= 0:
            raise InvalidDimension("motor dimensions must be positive")
        if self.holder_outer_radius <= self.body_radius:
            raise InvalidDimension(
                "holder outer radius must exceed the motor body radius")
        if self.holder_outer_radius < self.body_radius + self.holder_wall:
            raise InvalidDimension("holder wall does not fit around the body")
        if self.screw_count < 2:
            raise InvalidDimension("need at least two screw holes")


@dataclass(frozen=True)
class MotorSolverParams:
    tau: float = 500.0
    balance_weight: float = 0.25
    scan_range: tuple[float, float] = (-28.0, 28.0)  # +-2 motor lengths
    scan_step: float = 2.0                           # half a default voxel
    rotation_samples: int = 13
    interference_tol_fraction: float = 0.005
    carve_budget_fraction: float = 0.20

    def __post_init__(self):
        if not (self.scan_range[0] < self.scan_range[1]):
            raise InvalidDimension("scan range must be a nonempty interval")
        if self.tau < 0 or self.balance_weight < 0:
            raise InvalidDimension("tau and balance weight must be >= 0")
        if self.scan_step <= 0:
            raise InvalidDimension("scan step must be positive")
        if self.rotation_samples < 3:
            raise InvalidDimension("need at least 3 rotation samples")

    def offsets(self) -> np.ndarray:
        lo, hi = self.scan_range
        n = int(np.floor((hi - lo) / self.scan_step + 1e-9)) + 1
        return lo + self.scan_step * np.arange(n)


@dataclass
class MotorPlacement:
    joint_id: int
    offset: float
    configuration: str
    pose: np.ndarray
    score: float
    v_h: float
    v_c: float
    curves: np.ndarray  # columns: delta, V_h, V_c, S (chosen configuration)
    holder_side: float = -1.0  # axial side the holder physically occupies


def balance_score(v_h: float, v_c: float, alpha: float) -> float:
    """g = sqrt(V_h V_c) + alpha (V_h + V_c); symmetric and monotone."""
    return float(np.sqrt(v_h * v_c) + alpha * (v_h + v_c))


def gated_score(v_h: float, v_c: float, tau: float, alpha: float) -> float:
    """S = indicator(min(V_h, V_c) >= tau) * g."""
    if v_h < tau or v_c < tau:
        return 0.0
    return balance_score(v_h, v_c, alpha)


def motor_pose(joint: JointAnnotation, offset: float) -> np.ndarray:
    """4x4 transform: origin at p_j + offset * a_j, local z along the axis."""
    frame = orthonormal_frame(joint.axis)
    m = np.eye(4)
    m[:3, :3] = frame.T  # columns u, v, axis
    m[:3, 3] = joint.position + offset * joint.axis
    return m


def _holder_solids(center: np.ndarray, a: np.ndarray, side: float,
                   spec: MotorSpec) -> list[Cylinder]:
    """Holder sleeve + flange on the given axial side (+1 or -1)."""
    sleeve = Cylinder(center + side * (spec.holder_length / 2) * a, a,
                      spec.holder_outer_radius, spec.holder_length / 2)
    flange = Cylinder(
        center + side * (spec.holder_length - spec.flange_thickness / 2) * a,
        a, spec.flange_radius, spec.flange_thickness / 2)
    return [sleeve, flange]


def _connector_solid(center: np.ndarray, a: np.ndarray, side: float,
                     spec: MotorSpec) -> list[Cylinder]:
    return [Cylinder(center + side * (spec.connector_length / 2) * a, a,
                     spec.connector_outer_radius, spec.connector_length / 2)]


def attachment_solids(center: np.ndarray, axis: np.ndarray,
                      holder_side: float, spec: MotorSpec
                      ) -> tuple[list[Cylinder], list[Cylinder]]:
    """(holder solids, connector solids) around the motor center, with the
    holder on the given axial side (+1 or -1) and the connector mirrored."""
    if holder_side not in (-1.0, 1.0):
        raise ValueError(f"holder_side must be +-1, got {holder_side!r}")
    return (_holder_solids(center, axis, holder_side, spec),
            _connector_solid(center, axis, -holder_side, spec))


def part_side(field_a: VolumeField, field_b: VolumeField,
              joint: JointAnnotation) -> float:
    """Which axial side of the joint part a occupies: +1 when its center of
    mass projects farther along the axis than part b's, else -1. This pins
    where holder_on_a physically puts the holder."""
    proj_a = float((field_a.center_of_mass() - joint.position) @ joint.axis)
    proj_b = float((field_b.center_of_mass() - joint.position) @ joint.axis)
    return 1.0 if proj_a >= proj_b else -1.0


def _bore_solids(center: np.ndarray, a: np.ndarray,
                 spec: MotorSpec) -> list[Cylinder]:
    """Motor-body clearance plus screw holes, subtracted from every part."""
    solids = [Cylinder(center, a, spec.body_radius + spec.fit_clearance,
                       spec.body_length / 2 + spec.fit_clearance)]
    frame = orthonormal_frame(a)
    span = spec.body_length + spec.holder_length + spec.connector_length
    for k in range(spec.screw_count):
        ang = 2.0 * np.pi * k / spec.screw_count
        radial = np.cos(ang) * frame[0] + np.sin(ang) * frame[1]
        solids.append(Cylinder(center + spec.screw_circle_radius * radial, a,
                               spec.screw_hole_radius, span / 2))
    return solids


# ---------------------------------------------------------------------------
# Feasible motion sweep


def _bbox_slices(occ: np.ndarray, pad: int, shape) -> tuple[slice, ...]:
    idx = np.argwhere(occ)
    if len(idx) == 0:
        return tuple(slice(0, 0) for _ in range(3))
    lo = np.maximum(idx.min(axis=0) - pad, 0)
    hi = np.minimum(idx.max(axis=0) + 1 + pad, shape)
    return tuple(slice(int(a), int(b)) for a, b in zip(lo, hi))


def _rotated_overlap(moving: VolumeField, moving_slc, static: VolumeField,
                     static_slc, pivot: np.ndarray, axis: np.ndarray,
                     angle: float) -> np.ndarray:
    """Occupancy of rotate(moving, angle) on static's bbox window."""
    if angle == 0.0:
        # Same lattice: the window is a direct slice of the moving field.
        return moving.values[static_slc]
    rot = Rotation.from_rotvec(angle * np.asarray(axis)).as_matrix()
    cell = moving.cell_size
    src = moving.values[moving_slc].astype(np.uint8)
    src_origin = moving.origin + np.array(
        [s.start for s in moving_slc]) * cell
    out_shape = tuple(s.stop - s.start for s in static_slc)
    out_origin = static.origin + np.array(
        [s.start for s in static_slc]) * cell
    # Map output cell centers back through the inverse rotation.
    rt = rot.T
    half = 0.5 * cell * np.ones(3)
    offset_world = rt @ (out_origin + half - pivot) + pivot - (src_origin + half)
    offset = offset_world / cell
    vals = ndimage.affine_transform(
        src, rt, offset=offset, output_shape=out_shape, order=0,
        prefilter=False, mode="constant", cval=0)
    return vals.astype(bool)


def feasible_motion_and_carve(body: SemiVirtualBody, joint: JointAnnotation,
                              params: MotorSolverParams
                              ) -> tuple[tuple[float, float], dict[int, float]]:
    """Sweep the joint through its motion range, find the maximal feasible
    sub-interval around angle 0, and carve the swept interference out of both
    parts (in place). Returns (feasible interval, carved mm^3 per segment).

    Feasible means the rotated child overlaps the parent by at most
    interference_tol_fraction of the smaller part volume. If even angle 0
    exceeds the tolerance, the static overlap is carved once; exceeding
    carve_budget_fraction of the smaller part volume raises ZeroFeasibleRange.
    """
    a_id, b_id = body.edge_map()[joint.id]
    fa = body.rigid_fields[a_id]
    fb = body.rigid_fields[b_id]
    if not fa.same_lattice(fb):
        raise ValueError("part fields must share one lattice")
    cell3 = fa.cell_size ** 3
    vol_a = fa.occupied_volume()
    vol_b = fb.occupied_volume()
    smaller = min(vol_a, vol_b)
    tol = params.interference_tol_fraction * smaller
    budget = params.carve_budget_fraction * smaller
    slc_a = _bbox_slices(fa.values, 2, fa.dims)
    slc_b = _bbox_slices(fb.values, 2, fb.dims)
    carved = {a_id: 0.0, b_id: 0.0}

    lo, hi = joint.motion_range
    angles = np.unique(np.concatenate(
        [np.linspace(lo, hi, params.rotation_samples), [0.0]]))
    zero_idx = int(np.argmin(np.abs(angles)))

    static_overlap = fa.values[slc_a] & fb.values[slc_a]
    v0 = float(np.count_nonzero(static_overlap)) * cell3
    if v0 > tol:
        if v0 > budget:
            raise ZeroFeasibleRange(
                joint.id, f"static overlap {v0:.1f} mm^3 exceeds budget")
        fa.values[slc_a] &= ~static_overlap
        fb.values[slc_a] &= ~static_overlap
        carved[a_id] += v0
        carved[b_id] += v0

    def overlap_volume(angle: float) -> float:
        rot_b = _rotated_overlap(fb, slc_b, fa, slc_a, joint.position,
                                 joint.axis, angle)
        return float(np.count_nonzero(rot_b & fa.values[slc_a])) * cell3

    feasible = np.zeros(len(angles), dtype=bool)
    feasible[zero_idx] = True
    for i in range(zero_idx + 1, len(angles)):
        if overlap_volume(float(angles[i])) <= tol:
            feasible[i] = True
        else:
            break
    for i in range(zero_idx - 1, -1, -1):
        if overlap_volume(float(angles[i])) <= tol:
            feasible[i] = True
        else:
            break

    feas_idx = np.flatnonzero(feasible)
    interval = (float(angles[feas_idx[0]]), float(angles[feas_idx[-1]]))

    # Carve the union of feasible-sample intersections from both parts, so
    # the joint can actually move through its feasible interval.
    carve_a = np.zeros_like(fa.values[slc_a])
    carve_b = np.zeros_like(fb.values[slc_b])
    for i in feas_idx:
        angle = float(angles[i])
        if angle == 0.0:
            continue
        rot_b = _rotated_overlap(fb, slc_b, fa, slc_a, joint.position,
                                 joint.axis, angle)
        carve_a |= rot_b & fa.values[slc_a]
        rot_a = _rotated_overlap(fa, slc_a, fb, slc_b, joint.position,
                                 joint.axis, -angle)
        carve_b |= rot_a & fb.values[slc_b]
    if carve_a.any():
        carved[a_id] += float(np.count_nonzero(
            carve_a & fa.values[slc_a])) * cell3
        fa.values[slc_a] &= ~carve_a
    if carve_b.any():
        carved[b_id] += float(np.count_nonzero(
            carve_b & fb.values[slc_b])) * cell3
        fb.values[slc_b] &= ~carve_b
    return interval, carved


# ---------------------------------------------------------------------------
# Offset scan


def _scan_fields(field_h: VolumeField, field_c: VolumeField,
                 joint: JointAnnotation, holder_side: float, spec: MotorSpec,
                 params: MotorSolverParams) -> np.ndarray:
    """Score curve for one configuration: rows (delta, V_h, V_c, S). The
    holder is placed on holder_side and measured against field_h, the
    connector mirrored and measured against field_c."""
    cell3_h = field_h.cell_size ** 3
    cell3_c = field_c.cell_size ** 3
    rows = []
    for delta in params.offsets():
        center = joint.position + float(delta) * joint.axis
        holder, connector = attachment_solids(center, joint.axis,
                                              holder_side, spec)
        v_h = count_overlap_cells(field_h, holder) * cell3_h
        v_c = count_overlap_cells(field_c, connector) * cell3_c
        s = gated_score(v_h, v_c, params.tau, params.balance_weight)
        rows.append((float(delta), v_h, v_c, s))
    return np.array(rows)


def scan_motor_offset(part_a: TriMesh, part_b: TriMesh,
                      joint: JointAnnotation, spec: MotorSpec,
                      params: MotorSolverParams,
                      field_a: VolumeField | None = None,
                      field_b: VolumeField | None = None,
                      cell_size: float = 1.0) -> MotorPlacement:
    """Scan both configurations over the offset lattice and keep the argmax.

    Volumes are measured by rasterizing the attachment solids against part
    occupancy fields (supplied, or voxelized from the meshes at cell_size).
    Raises NoFeasibleOffset when every sample is gated to zero.
    """
    if field_a is None:
        field_a = voxelize(part_a, cell_size)
    if field_b is None:
        field_b = voxelize(part_b, cell_size)
    side_a = part_side(field_a, field_b, joint)
    curves = {
        HOLDER_ON_A: _scan_fields(field_a, field_b, joint, side_a,
                                  spec, params),
        HOLDER_ON_B: _scan_fields(field_b, field_a, joint, -side_a,
                                  spec, params),
    }
    best = None  # (score, -|delta|, prefers holder_on_a, -delta, config, row)
    for config in (HOLDER_ON_A, HOLDER_ON_B):
        for row in curves[config]:
            delta, v_h, v_c, s = row
            key = (s, -abs(delta), config == HOLDER_ON_A, -delta)
            if best is None or key > best[0]:
                best = (key, config, row)
    (s, _, _, _), config, row = best
    if s <= 0.0:
        raise NoFeasibleOffset(joint.id,
                               "all offsets fall below the volume gate")
    delta, v_h, v_c, s = (float(v) for v in row)
    return MotorPlacement(joint_id=joint.id, offset=delta,
                          configuration=config,
                          pose=motor_pose(joint, delta), score=s, v_h=v_h,
                          v_c=v_c, curves=curves[config],
                          holder_side=side_a if config == HOLDER_ON_A
                          else -side_a)


# ---------------------------------------------------------------------------
# Embedding


def embed_motor(parts: dict[int, VolumeField], placement: MotorPlacement,
                spec: MotorSpec,
                hosts: tuple[int, int] | None = None) -> None:
    """Union holder/connector onto their host part fields, then bore the
    motor-body clearance and screw holes through every part (in place).

    The motor center and axis come from the placement pose. hosts names the
    (part_a, part_b) pair the placement was scanned against; by default the
    two lowest part ids in ascending order, matching tree edge order.
    """
    center = placement.pose[:3, 3]
    axis = placement.pose[:3, 2]
    holder, connector = attachment_solids(center, axis,
                                          placement.holder_side, spec)
    if hosts is None:
        if len(parts) != 2:
            raise ValueError("hosts required when parts has more than a pair")
        hosts = tuple(sorted(parts))
    a_id, b_id = hosts
    if placement.configuration == HOLDER_ON_A:
        holder_host, connector_host = a_id, b_id
    else:
        holder_host, connector_host = b_id, a_id
    cell3 = parts[holder_host].cell_size ** 3
    grip_h = count_overlap_cells(parts[holder_host], holder) * cell3
    grip_c = count_overlap_cells(parts[connector_host], connector) * cell3
    if grip_h <= 0.0 or grip_c <= 0.0:
        raise GeometryFailure(
            placement.joint_id, "attachment solids touch no part material")
    apply_union(parts[holder_host], holder)
    apply_union(parts[connector_host], connector)
    bores = _bore_solids(center, axis, spec)
    for f in parts.values():
        apply_difference(f, bores)
    for sid in (holder_host, connector_host):
        if not parts[sid].values.any():
            raise GeometryFailure(placement.joint_id,
                                  f"part {sid} vanished during embedding")


# ---------------------------------------------------------------------------
# Stage driver


@dataclass
class MotorSolution:
    placements: list[MotorPlacement]
    phi_feasible: dict[int, tuple[float, float]]
    carved_mm3: dict[int, float] = field(default_factory=dict)
    body_overlap_mm3: float = 0.0


def pairwise_overlap_volume(fields: dict[int, VolumeField]) -> float:
    """Total intersection volume across all part pairs (mm^3)."""
    ids = sorted(fields)
    total = 0.0
    for i, a in enumerate(ids):
        fa = fields[a]
        for b in ids[i + 1:]:
            fb = fields[b]
            total += float(np.count_nonzero(
                fa.values & fb.values)) * fa.cell_size ** 3
    return total


def solve_all_motors(body: SemiVirtualBody, spec: MotorSpec,
                     params: MotorSolverParams) -> MotorSolution:
    """Process joints in ascending id order; each joint mutates the shared
    part fields, so later joints see earlier carves and embeds. Any joint
    failure aborts the stage with a StageFailure subclass."""
    if not body.tree.valid:
        raise InvalidTree(body.tree.invalid_reason or "invalid tree")
    if body.rigid_fields is None:
        raise ValueError("solve_all_motors needs a body with part fields")
    placements = []
    phi = {}
    carved_total: dict[int, float] = {}
    edge_map = body.edge_map()
    for jid in sorted(edge_map):
        joint = body.joint_by_id(jid)
        interval, carved = feasible_motion_and_carve(body, joint, params)
        phi[jid] = interval
        for sid, v in carved.items():
            carved_total[sid] = carved_total.get(sid, 0.0) + v
        a_id, b_id = edge_map[jid]
        placement = scan_motor_offset(
            body.rigid_parts[a_id], body.rigid_parts[b_id], joint, spec,
            params, field_a=body.rigid_fields[a_id],
            field_b=body.rigid_fields[b_id])
        embed_motor(body.rigid_fields, placement, spec, hosts=(a_id, b_id))
        placements.append(placement)
    for sid in sorted(body.rigid_parts):
        body.refresh_rigid_mesh(sid)
    overlap = pairwise_overlap_volume(body.rigid_fields)
    return MotorSolution(placements=placements, phi_feasible=phi,
                         carved_mm3=carved_total,
                         body_overlap_mm3=overlap)
