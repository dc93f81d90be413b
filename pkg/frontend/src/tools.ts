import { SketchDocument } from './document';
import { EditCommand, History } from './history';
import { JointGizmo, Material, OutOfBoundsError, Vec3 } from './types';

export type PaintTool = 'brush' | 'box-fill' | 'erase';

/** Inclusive voxel-index box; brush adds a radius around min (its center). */
export interface PaintRegion {
  min: Vec3;
  max: Vec3;
  /** brush only: spherical radius in voxels around the region center */
  radius?: number;
}

function regionCells(
  doc: SketchDocument,
  tool: PaintTool,
  region: PaintRegion,
): number[] {
  const { min, max } = region;
  for (const p of [min, max]) {
    if (!doc.inBounds(p[0], p[1], p[2])) {
      throw new OutOfBoundsError(`region corner (${p}) outside grid ${doc.dims}`);
    }
  }
  if (min.some((v, i) => v > max[i])) {
    throw new OutOfBoundsError(`region min ${min} exceeds max ${max}`);
  }
  const cells: number[] = [];
  if (tool === 'brush') {
    const r = region.radius ?? 0;
    const c: Vec3 = [
      (min[0] + max[0]) / 2,
      (min[1] + max[1]) / 2,
      (min[2] + max[2]) / 2,
    ];
    const lo = c.map((v) => Math.max(0, Math.ceil(v - r))) as Vec3;
    const hi = c.map((v, i) => Math.min(doc.dims[i] - 1, Math.floor(v + r))) as Vec3;
    for (let z = lo[2]; z <= hi[2]; z++) {
      for (let y = lo[1]; y <= hi[1]; y++) {
        for (let x = lo[0]; x <= hi[0]; x++) {
          const d2 = (x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2;
          if (d2 <= r * r) cells.push(doc.index(x, y, z));
        }
      }
    }
  } else {
    for (let z = min[2]; z <= max[2]; z++) {
      for (let y = min[1]; y <= max[1]; y++) {
        for (let x = min[0]; x <= max[0]; x++) {
          cells.push(doc.index(x, y, z));
        }
      }
    }
  }
  return cells;
}

class PaintCommand implements EditCommand {
  readonly label: string;
  private previous: Array<[number, Material]> = [];

  constructor(
    private tool: PaintTool,
    private material: Material,
    private region: PaintRegion,
  ) {
    this.label = `${tool} ${Material[material].toLowerCase()}`;
  }

  apply(doc: SketchDocument): void {
    this.previous = [];
    const target = this.tool === 'erase' ? Material.Empty : this.material;
    for (const index of regionCells(doc, this.tool, this.region)) {
      const prev = doc.setVoxel(index, target);
      if (prev !== target) this.previous.push([index, prev]);
    }
  }

  revert(doc: SketchDocument): void {
    // restore in reverse apply order
    for (let i = this.previous.length - 1; i >= 0; i--) {
      const [index, material] = this.previous[i];
      doc.setVoxel(index, material);
    }
  }

  get editCount(): number {
    return this.previous.length;
  }
}

/**
 * Apply a paint tool through the history. Returns the number of voxels that
 * actually changed; a stroke that changes nothing (erase over empty space,
 * repaint with the same material) leaves the history untouched.
 */
export function paint(
  doc: SketchDocument,
  history: History,
  tool: PaintTool,
  material: Material,
  region: PaintRegion,
): number {
  if (tool === 'erase') material = Material.Empty;
  if (tool !== 'erase' && material === Material.Empty) {
    throw new OutOfBoundsError('paint material must be rigid or soft');
  }
  const command = new PaintCommand(tool, material, region);
  command.apply(doc);
  if (command.editCount === 0) {
    command.revert(doc); // nothing changed; keep history clean
    return 0;
  }
  command.revert(doc);
  history.apply(doc, command);
  return command.editCount;
}

// --- joint gizmos -----------------------------------------------------------

/** The 26 lattice directions: every nonzero vector in {-1,0,1}^3, unit. */
export const SNAP_DIRECTIONS: Vec3[] = (() => {
  const dirs: Vec3[] = [];
  for (let x = -1; x <= 1; x++) {
    for (let y = -1; y <= 1; y++) {
      for (let z = -1; z <= 1; z++) {
        if (x === 0 && y === 0 && z === 0) continue;
        const n = Math.hypot(x, y, z);
        dirs.push([x / n, y / n, z / n]);
      }
    }
  }
  return dirs;
})();

/** Snap an arbitrary axis to the closest of the 26 lattice directions. */
export function snapAxis(axis: Vec3): Vec3 {
  const n = Math.hypot(...axis);
  if (!(n > 0)) throw new OutOfBoundsError('joint axis must be nonzero');
  let best = SNAP_DIRECTIONS[0];
  let bestDot = -Infinity;
  for (const d of SNAP_DIRECTIONS) {
    const dot = (d[0] * axis[0] + d[1] * axis[1] + d[2] * axis[2]) / n;
    if (dot > bestDot) {
      bestDot = dot;
      best = d;
    }
  }
  return [...best] as Vec3;
}

class JointCommand implements EditCommand {
  readonly label: string;
  private previous: JointGizmo | null = null;

  constructor(
    private id: number,
    private next: JointGizmo | null, // null removes
  ) {
    this.label = next ? `joint ${id}` : `remove joint ${id}`;
  }

  apply(doc: SketchDocument): void {
    this.previous = this.next ? doc.setJoint(this.next) : doc.removeJoint(this.id);
  }

  revert(doc: SketchDocument): void {
    if (this.previous) doc.setJoint(this.previous);
    else doc.removeJoint(this.id);
  }
}

export interface JointOptions {
  /** default true: snap the axis onto the 26 lattice directions */
  snap?: boolean;
}

export function placeJoint(
  doc: SketchDocument,
  history: History,
  gizmo: JointGizmo,
  options: JointOptions = {},
): JointGizmo {
  const [sx, sy, sz] = doc.dims.map((d) => d * doc.voxelSizeMm);
  const [px, py, pz] = gizmo.positionMm;
  if (px < 0 || py < 0 || pz < 0 || px > sx || py > sy || pz > sz) {
    throw new OutOfBoundsError(`joint at (${gizmo.positionMm}) outside body`);
  }
  const [lo, hi] = gizmo.rangeRad;
  if (!(lo < 0 && hi > 0)) {
    throw new OutOfBoundsError(`joint range must bracket zero: [${lo},${hi}]`);
  }
  const axis = options.snap === false ? normalize(gizmo.axis) : snapAxis(gizmo.axis);
  const placed: JointGizmo = { ...gizmo, axis };
  history.apply(doc, new JointCommand(gizmo.id, placed));
  return placed;
}

export function removeJoint(doc: SketchDocument, history: History, id: number): void {
  history.apply(doc, new JointCommand(id, null));
}

function normalize(v: Vec3): Vec3 {
  const n = Math.hypot(...v);
  if (!(n > 0)) throw new OutOfBoundsError('joint axis must be nonzero');
  return [v[0] / n, v[1] / n, v[2] / n];
}
