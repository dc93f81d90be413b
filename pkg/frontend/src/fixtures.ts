import { SketchDocument } from './document';
import { History } from './history';
import { paint, placeJoint } from './tools';
import { Material, Vec3 } from './types';

/**
 * Painted demo sketches. Both are built through the editing tools rather
 * than by poking voxels directly, so loading one exercises the same code
 * path as interactive strokes.
 */

export interface Sketch {
  doc: SketchDocument;
  history: History;
}

/** Torso on four corner legs; passes every pipeline stage. */
export function buildQuadruped(): Sketch {
  const doc = new SketchDocument([24, 24, 32], 4.0);
  const history = new History();
  // torso fills the grid footprint, legs hang below it
  paint(doc, history, 'box-fill', Material.Rigid, {
    min: [0, 0, 10],
    max: [23, 23, 28],
  });
  paint(doc, history, 'box-fill', Material.Soft, {
    min: [0, 0, 29],
    max: [23, 23, 31],
  });
  const feet: Array<[[number, number], [number, number]]> = [
    [[2, 5], [2, 5]],
    [[19, 22], [2, 5]],
    [[2, 5], [19, 22]],
    [[19, 22], [19, 22]],
  ];
  feet.forEach(([xr, yr], jid) => {
    paint(doc, history, 'box-fill', Material.Rigid, {
      min: [xr[0], yr[0], 0],
      max: [xr[1], yr[1], 9],
    });
    const cx = ((xr[0] + xr[1] + 1) / 2) * doc.voxelSizeMm;
    const cy = ((yr[0] + yr[1] + 1) / 2) * doc.voxelSizeMm;
    placeJoint(doc, history, {
      id: jid,
      positionMm: [cx, cy, 10 * doc.voxelSizeMm] as Vec3,
      axis: [0, 0, 1],
      rangeRad: [-0.8, 0.8],
    });
  });
  return { doc, history };
}

/** Torso too small to host the controller box; the pipeline rejects it at
 * the electronics stage. */
export function buildThinLimb(): Sketch {
  const doc = new SketchDocument([11, 11, 14], 4.0);
  const history = new History();
  paint(doc, history, 'box-fill', Material.Rigid, {
    min: [0, 0, 6],
    max: [10, 10, 13],
  });
  paint(doc, history, 'box-fill', Material.Rigid, {
    min: [4, 4, 0],
    max: [6, 6, 5],
  });
  placeJoint(doc, history, {
    id: 0,
    positionMm: [5.5 * 4.0, 5.5 * 4.0, 6 * 4.0],
    axis: [0, 0, 1],
    rangeRad: [-0.6, 0.6],
  });
  return { doc, history };
}
