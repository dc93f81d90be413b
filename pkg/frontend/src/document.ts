import {
  JointGizmo,
  Material,
  OutOfBoundsError,
  PipelineResponse,
  Vec3,
} from './types';

/**
 * The editable sketch: a sparse voxel map over a fixed grid plus joint
 * gizmos. Voxels are keyed by linear index in x-fastest order (the same
 * order the wire format's RLE stream uses), holding only non-empty cells.
 */
export class SketchDocument {
  readonly dims: Vec3;
  readonly voxelSizeMm: number;
  private voxels = new Map<number, Material>();
  private joints = new Map<number, JointGizmo>();
  /** Cache of the most recent pipeline response for this document. */
  lastResponse: PipelineResponse | null = null;

  constructor(dims: Vec3, voxelSizeMm: number) {
    if (dims.some((d) => !Number.isInteger(d) || d < 1)) {
      throw new OutOfBoundsError(`dims must be positive integers: ${dims}`);
    }
    if (!(voxelSizeMm > 0)) {
      throw new OutOfBoundsError(`voxel size must be positive: ${voxelSizeMm}`);
    }
    this.dims = [...dims] as Vec3;
    this.voxelSizeMm = voxelSizeMm;
  }

  inBounds(x: number, y: number, z: number): boolean {
    const [nx, ny, nz] = this.dims;
    return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
  }

  /** Linear index, x fastest: matches the RLE stream order. */
  index(x: number, y: number, z: number): number {
    if (!this.inBounds(x, y, z)) {
      throw new OutOfBoundsError(`(${x},${y},${z}) outside grid ${this.dims}`);
    }
    const [nx, ny] = this.dims;
    return x + nx * (y + ny * z);
  }

  coords(index: number): Vec3 {
    const [nx, ny] = this.dims;
    const x = index % nx;
    const y = Math.floor(index / nx) % ny;
    const z = Math.floor(index / (nx * ny));
    return [x, y, z];
  }

  materialAt(x: number, y: number, z: number): Material {
    return this.voxels.get(this.index(x, y, z)) ?? Material.Empty;
  }

  /** Set one voxel; returns the previous material. */
  setVoxel(index: number, material: Material): Material {
    const cellCount = this.dims[0] * this.dims[1] * this.dims[2];
    if (!Number.isInteger(index) || index < 0 || index >= cellCount) {
      throw new OutOfBoundsError(`index ${index} outside grid`);
    }
    const prev = this.voxels.get(index) ?? Material.Empty;
    if (material === Material.Empty) {
      this.voxels.delete(index);
    } else {
      this.voxels.set(index, material);
    }
    return prev;
  }

  get voxelCount(): number {
    return this.voxels.size;
  }

  /** Non-empty cells as [index, material], ascending by index. */
  cells(): Array<[number, Material]> {
    return [...this.voxels.entries()].sort((a, b) => a[0] - b[0]);
  }

  setJoint(gizmo: JointGizmo): JointGizmo | null {
    const prev = this.joints.get(gizmo.id) ?? null;
    this.joints.set(gizmo.id, {
      ...gizmo,
      positionMm: [...gizmo.positionMm] as Vec3,
      axis: [...gizmo.axis] as Vec3,
      rangeRad: [...gizmo.rangeRad] as [number, number],
    });
    return prev;
  }

  removeJoint(id: number): JointGizmo | null {
    const prev = this.joints.get(id) ?? null;
    this.joints.delete(id);
    return prev;
  }

  jointList(): JointGizmo[] {
    return [...this.joints.values()].sort((a, b) => a.id - b.id);
  }

  nextJointId(): number {
    let id = 0;
    while (this.joints.has(id)) id += 1;
    return id;
  }

  clone(): SketchDocument {
    const copy = new SketchDocument(this.dims, this.voxelSizeMm);
    copy.voxels = new Map(this.voxels);
    for (const j of this.joints.values()) copy.setJoint(j);
    copy.lastResponse = this.lastResponse;
    return copy;
  }

  /** Structural equality of grid content and joints (response cache aside). */
  equals(other: SketchDocument): boolean {
    if (
      this.dims.join() !== other.dims.join() ||
      this.voxelSizeMm !== other.voxelSizeMm ||
      this.voxels.size !== other.voxels.size ||
      this.joints.size !== other.joints.size
    ) {
      return false;
    }
    for (const [k, v] of this.voxels) {
      if (other.voxels.get(k) !== v) return false;
    }
    for (const [id, j] of this.joints) {
      const o = other.joints.get(id);
      if (
        !o ||
        j.positionMm.join() !== o.positionMm.join() ||
        j.axis.join() !== o.axis.join() ||
        j.rangeRad.join() !== o.rangeRad.join()
      ) {
        return false;
      }
    }
    return true;
  }
}
