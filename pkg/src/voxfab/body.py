"""Semi-virtual body processors.

The rigid processor turns each kinematic segment into its own watertight
mesh with joint clearance cylinders removed; the soft processor turns soft
voxels into one hollow skin shell. Both work on occupancy fields sampled on
a shared fine lattice so later solver stages can carve the same cells, and
mesh outputs are isosurfaces of those fields.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InconsistentLayers, NoRigidSegments
from .geometry import (Cylinder, Sphere, TriMesh, VolumeField,
                       apply_difference, is_watertight, marching_cubes,
                       mesh_volume, write_binary_stl)
from .morphology import (JointAnnotation, JointClearanceParams, KinematicTree,
                         MaterialGrid, MaterialLabel, MorphologySpec,
                         SegmentLabeling, build_kinematic_tree, dilate, erode,
                         label_segments)

# Default lattice refinement: two cells per voxel.
CELLS_PER_VOXEL = 2
# World margin around the voxel bbox so motor flanges near the hull fit.
LATTICE_MARGIN_MM = 16.0


def default_cell_size(voxel_size: float) -> float:
    return voxel_size / CELLS_PER_VOXEL


def body_lattice(grid: MaterialGrid, cell_size: float,
                 margin_mm: float = LATTICE_MARGIN_MM) -> VolumeField:
    """Empty occupancy lattice covering the occupied-voxel bbox plus a
    margin (the whole grid when nothing is occupied). The origin is a
    multiple of cell_size, so cells stay nested in voxels and cell centers
    sample voxels without bias even on sparse 64-cubed grids."""
    margin_cells = int(np.ceil(margin_mm / cell_size))
    occ = np.argwhere(grid.labels != int(MaterialLabel.EMPTY))
    if len(occ):
        lo_w = occ.min(axis=0) * grid.voxel_size
        hi_w = (occ.max(axis=0) + 1) * grid.voxel_size
    else:
        lo_w = np.zeros(3)
        hi_w = np.asarray(grid.dims, dtype=float) * grid.voxel_size
    lo_cell = np.floor(lo_w / cell_size + 1e-9).astype(int) - margin_cells
    hi_cell = np.ceil(hi_w / cell_size - 1e-9).astype(int) + margin_cells
    origin = lo_cell * cell_size
    dims = tuple(int(d) for d in hi_cell - lo_cell)
    return VolumeField(origin.astype(float), cell_size,
                       np.zeros(dims, dtype=bool))


def _cell_to_voxel_index(lattice: VolumeField, grid: MaterialGrid):
    """Per-axis voxel index of each lattice cell center (may be out of range)."""
    out = []
    for axis in range(3):
        centers = lattice.axis_centers(axis)
        out.append(np.floor(centers / grid.voxel_size).astype(np.int64))
    return out


def _gather_grid(lattice: VolumeField, grid: MaterialGrid,
                 values: np.ndarray, fill):
    """Sample a per-voxel array at every lattice cell center."""
    vx, vy, vz = _cell_to_voxel_index(lattice, grid)
    okx = (vx >= 0) & (vx < grid.dims[0])
    oky = (vy >= 0) & (vy < grid.dims[1])
    okz = (vz >= 0) & (vz < grid.dims[2])
    gathered = values[np.ix_(np.clip(vx, 0, grid.dims[0] - 1),
                             np.clip(vy, 0, grid.dims[1] - 1),
                             np.clip(vz, 0, grid.dims[2] - 1))]
    valid = okx[:, None, None] & oky[None, :, None] & okz[None, None, :]
    return np.where(valid, gathered, fill)


def _clearance_cylinders(joints: list[JointAnnotation],
                         clearance: JointClearanceParams) -> list[Cylinder]:
    return [Cylinder(j.position, j.axis, clearance.cylinder_radius,
                     clearance.cylinder_half_length) for j in joints]


def rigid_segment_fields(spec: MorphologySpec,
                         clearance: JointClearanceParams,
                         cell_size: float,
                         labeling: SegmentLabeling | None = None,
                         margin_mm: float = LATTICE_MARGIN_MM,
                         ) -> dict[int, VolumeField]:
    """Per-segment occupancy on the shared lattice, clearance removed."""
    if labeling is None:
        labeling = label_segments(spec.grid, spec.joints, clearance)
    if labeling.segment_count == 0:
        raise NoRigidSegments("morphology has no rigid segments")
    lattice = body_lattice(spec.grid, cell_size, margin_mm)
    seg_at_cell = _gather_grid(lattice, spec.grid, labeling.segment_id, -1)
    cylinders = _clearance_cylinders(spec.joints, clearance)
    fields: dict[int, VolumeField] = {}
    for sid in range(labeling.segment_count):
        occ = VolumeField(lattice.origin.copy(), cell_size,
                          seg_at_cell == sid)
        # Voxel-level clearance left a jagged boundary; re-carve at cell level.
        for cyl in cylinders:
            apply_difference(occ, cyl)
        fields[sid] = occ
    return fields


def process_rigid(spec: MorphologySpec, clearance: JointClearanceParams,
                  cell_size: float | None = None) -> dict[int, TriMesh]:
    """Segment the rigid material and mesh each segment with joint clearance
    cylinders subtracted. Raises NoRigidSegments when nothing is rigid."""
    if cell_size is None:
        cell_size = default_cell_size(spec.grid.voxel_size)
    fields = rigid_segment_fields(spec, clearance, cell_size)
    return {sid: marching_cubes(f, 0.5, part_label=f"rigid_{sid}")
            for sid, f in fields.items()}


def soft_shell_field(spec: MorphologySpec, clearance: JointClearanceParams,
                     shell_thickness: float,
                     cell_size: float,
                     margin_mm: float = LATTICE_MARGIN_MM,
                     ) -> VolumeField | None:
    """Soft occupancy -> joint sphere clearance -> erode-dilate opening ->
    hollow shell. None when nothing survives."""
    lattice = body_lattice(spec.grid, cell_size, margin_mm)
    occ = _gather_grid(lattice, spec.grid,
                       spec.grid.labels == MaterialLabel.SOFT, False)
    if not occ.any():
        return None
    f = VolumeField(lattice.origin.copy(), cell_size, occ)
    for j in spec.joints:
        apply_difference(f, Sphere(j.position, clearance.soft_sphere_radius))
    occ = f.values
    if not occ.any():
        return None
    # Opening and hollowing radii are specified in voxels, applied in cells.
    cells_per_voxel = max(1, round(spec.grid.voxel_size / cell_size))
    open_r = clearance.opening_radius_voxels * cells_per_voxel
    if open_r:
        occ = dilate(erode(occ, open_r), open_r)
    if not occ.any():
        return None
    shell_voxels = int(np.ceil(shell_thickness / spec.grid.voxel_size - 1e-9))
    shell_r = max(1, shell_voxels) * cells_per_voxel
    shell = occ & ~erode(occ, shell_r)
    if not shell.any():
        return None
    return VolumeField(lattice.origin.copy(), cell_size, shell)


def process_soft(spec: MorphologySpec, clearance: JointClearanceParams,
                 shell_thickness: float,
                 cell_size: float | None = None) -> TriMesh | None:
    """Hollow skin mesh from the soft voxels; None when no soft material
    survives clearance and opening."""
    if cell_size is None:
        cell_size = default_cell_size(spec.grid.voxel_size)
    f = soft_shell_field(spec, clearance, shell_thickness, cell_size)
    if f is None:
        return None
    return marching_cubes(f, 0.5, part_label="skin")


@dataclass
class SemiVirtualBody:
    """Layered output of the processors: one watertight mesh per rigid
    segment, an optional hollow skin, the kinematic tree, and the occupancy
    fields the meshes were extracted from (shared lattice)."""

    rigid_parts: dict[int, TriMesh]
    skin: TriMesh | None
    tree: KinematicTree
    joints: list[JointAnnotation]
    labeling: SegmentLabeling | None = None
    rigid_fields: dict[int, VolumeField] | None = None
    skin_field: VolumeField | None = None
    voxel_size: float = 1.0
    provenance: dict = field(default_factory=dict)

    def joint_by_id(self, joint_id: int) -> JointAnnotation:
        for j in self.joints:
            if j.id == joint_id:
                return j
        raise KeyError(f"no joint {joint_id}")

    def edge_map(self) -> dict[int, tuple[int, int]]:
        return {jid: (a, b) for jid, a, b in self.tree.edges}

    def refresh_rigid_mesh(self, sid: int) -> None:
        self.rigid_parts[sid] = marching_cubes(
            self.rigid_fields[sid], 0.5, part_label=f"rigid_{sid}")

    def refresh_skin_mesh(self) -> None:
        if self.skin_field is not None and self.skin_field.values.any():
            self.skin = marching_cubes(self.skin_field, 0.5,
                                       part_label="skin")
        else:
            self.skin = None


def compose_layers(rigid_parts: dict[int, TriMesh], skin: TriMesh | None,
                   tree: KinematicTree, joints: list[JointAnnotation],
                   labeling: SegmentLabeling | None = None,
                   rigid_fields: dict[int, VolumeField] | None = None,
                   skin_field: VolumeField | None = None,
                   voxel_size: float = 1.0,
                   provenance: dict | None = None) -> SemiVirtualBody:
    """Assemble the layered body, failing fast on cross-layer mismatches."""
    if set(rigid_parts.keys()) != set(tree.nodes):
        raise InconsistentLayers(
            f"part ids {sorted(rigid_parts)} != tree nodes {sorted(tree.nodes)}")
    if rigid_fields is not None and set(rigid_fields) != set(rigid_parts):
        raise InconsistentLayers("rigid field ids differ from part ids")
    edge_joints = {jid for jid, _, _ in tree.edges}
    known = {j.id for j in joints}
    if not edge_joints <= known:
        raise InconsistentLayers(
            f"tree references unknown joints {sorted(edge_joints - known)}")
    for sid, mesh in rigid_parts.items():
        if not is_watertight(mesh) or mesh_volume(mesh) <= 0:
            raise InconsistentLayers(
                f"rigid part {sid} is not a closed positive-volume mesh")
    return SemiVirtualBody(
        rigid_parts=dict(sorted(rigid_parts.items())), skin=skin, tree=tree,
        joints=sorted(joints, key=lambda j: j.id), labeling=labeling,
        rigid_fields=rigid_fields, skin_field=skin_field,
        voxel_size=voxel_size, provenance=provenance or {})


def process_body(spec: MorphologySpec, clearance: JointClearanceParams,
                 shell_thickness: float, cell_size: float | None = None,
                 margin_mm: float = LATTICE_MARGIN_MM,
                 labeling: SegmentLabeling | None = None,
                 tree: KinematicTree | None = None) -> SemiVirtualBody:
    """Full semi-virtual stage: segmentation, tree, rigid parts, skin.

    Callers that already ran segmentation and tree validation can pass both
    in to skip the recompute."""
    if cell_size is None:
        cell_size = default_cell_size(spec.grid.voxel_size)
    if labeling is None:
        labeling = label_segments(spec.grid, spec.joints, clearance)
    if labeling.segment_count == 0:
        raise NoRigidSegments("morphology has no rigid segments")
    if tree is None:
        tree = build_kinematic_tree(spec.grid, labeling, spec.joints,
                                    clearance)
    fields = rigid_segment_fields(spec, clearance, cell_size,
                                  labeling=labeling, margin_mm=margin_mm)
    parts = {sid: marching_cubes(f, 0.5, part_label=f"rigid_{sid}")
             for sid, f in fields.items()}
    skin_field = soft_shell_field(spec, clearance, shell_thickness,
                                  cell_size, margin_mm=margin_mm)
    skin = (marching_cubes(skin_field, 0.5, part_label="skin")
            if skin_field is not None else None)
    provenance = {
        "cell_size_mm": cell_size,
        "shell_thickness_mm": shell_thickness,
        "clearance": {
            "cylinder_radius_mm": clearance.cylinder_radius,
            "cylinder_half_length_mm": clearance.cylinder_half_length,
            "soft_sphere_radius_mm": clearance.soft_sphere_radius,
            "opening_radius_voxels": clearance.opening_radius_voxels,
        },
    }
    return compose_layers(parts, skin, tree, spec.joints, labeling=labeling,
                          rigid_fields=fields, skin_field=skin_field,
                          voxel_size=spec.grid.voxel_size,
                          provenance=provenance)


def export_body(body: SemiVirtualBody, out_dir: str | Path) -> list[Path]:
    """Write body.json plus rigid_<id>.stl and skin.stl."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    doc = {
        "parts": [
            {"segment": sid, "file": f"rigid_{sid}.stl",
             "triangles": int(len(m.triangles)),
             "volume_mm3": mesh_volume(m)}
            for sid, m in sorted(body.rigid_parts.items())
        ],
        "skin": ({"file": "skin.stl",
                  "triangles": int(len(body.skin.triangles))}
                 if body.skin is not None else None),
        "tree": {
            "nodes": body.tree.nodes,
            "edges": [list(e) for e in body.tree.edges],
            "root": body.tree.root,
            "valid": body.tree.valid,
        },
        "joints": [
            {"id": j.id, "position_mm": [float(v) for v in j.position],
             "axis": [float(v) for v in j.axis],
             "range_rad": list(j.motion_range)}
            for j in body.joints
        ],
        "provenance": body.provenance,
    }
    path = out / "body.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True))
    written.append(path)
    for sid, mesh in sorted(body.rigid_parts.items()):
        p = out / f"rigid_{sid}.stl"
        write_binary_stl(mesh, p)
        written.append(p)
    if body.skin is not None:
        p = out / "skin.stl"
        write_binary_stl(body.skin, p)
        written.append(p)
    return written
