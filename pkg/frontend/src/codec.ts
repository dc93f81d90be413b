import { SketchDocument } from './document';
import { Material, MorphologyDoc, Vec3 } from './types';

/**
 * Canonical JSON: object keys sorted, no whitespace. Matches the byte form
 * the pipeline service itself emits for morphology documents, so documents
 * that agree structurally agree byte for byte.
 */
export function canonicalJson(value: unknown): string {
  if (value === null) return 'null';
  switch (typeof value) {
    case 'number':
      if (!Number.isFinite(value)) {
        throw new Error(`non-finite number in document: ${value}`);
      }
      return Object.is(value, -0) ? '0' : JSON.stringify(value);
    case 'string':
    case 'boolean':
      return JSON.stringify(value);
    case 'object':
      break;
    default:
      throw new Error(`cannot serialize ${typeof value}`);
  }
  if (Array.isArray(value)) {
    return '[' + value.map(canonicalJson).join(',') + ']';
  }
  const entries = Object.keys(value as object).sort();
  const body = entries.map((key) => {
    const v = (value as Record<string, unknown>)[key];
    return JSON.stringify(key) + ':' + canonicalJson(v);
  });
  return '{' + body.join(',') + '}';
}

function encodeRle(doc: SketchDocument): Array<[number, number]> {
  const total = doc.dims[0] * doc.dims[1] * doc.dims[2];
  const runs: Array<[number, number]> = [];
  const cells = doc.cells(); // ascending linear index, x fastest
  let cursor = 0;
  const push = (count: number, label: number) => {
    if (count === 0) return;
    const last = runs[runs.length - 1];
    if (last && last[1] === label) last[0] += count;
    else runs.push([count, label]);
  };
  for (const [index, material] of cells) {
    push(index - cursor, Material.Empty);
    push(1, material);
    cursor = index + 1;
  }
  push(total - cursor, Material.Empty);
  return runs;
}

export function toMorphologyDoc(
  doc: SketchDocument,
  meta: Record<string, unknown> = {},
): MorphologyDoc {
  return {
    version: 1,
    dims: [...doc.dims] as Vec3,
    voxel_size_mm: doc.voxelSizeMm,
    labels_rle: encodeRle(doc),
    joints: doc.jointList().map((j) => ({
      id: j.id,
      position_mm: [...j.positionMm],
      axis: [...j.axis],
      range_rad: [...j.rangeRad] as [number, number],
    })),
    meta,
  };
}

/** Serialize a sketch to the canonical morphology wire form. */
export function serializeSketch(
  doc: SketchDocument,
  meta: Record<string, unknown> = {},
): string {
  return canonicalJson(toMorphologyDoc(doc, meta));
}

function fail(message: string): never {
  throw new Error(`malformed morphology document: ${message}`);
}

/** Parse a wire-form document back into an editable sketch. */
export function parseSketch(data: string): SketchDocument {
  let raw: unknown;
  try {
    raw = JSON.parse(data);
  } catch (exc) {
    fail(`not valid JSON (${exc})`);
  }
  if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
    fail('top-level value must be an object');
  }
  const doc = raw as Partial<MorphologyDoc>;
  if (doc.version !== 1) fail(`unsupported version ${doc.version}`);
  const dims = doc.dims;
  if (
    !Array.isArray(dims) ||
    dims.length !== 3 ||
    dims.some((d) => !Number.isInteger(d))
  ) {
    fail('dims must be three integers');
  }
  const voxelSize = doc.voxel_size_mm;
  if (typeof voxelSize !== 'number' || !(voxelSize > 0)) {
    fail('voxel_size_mm must be a positive number');
  }
  const sketch = new SketchDocument(dims as Vec3, voxelSize);
  const total = dims[0] * dims[1] * dims[2];
  const runs = doc.labels_rle;
  if (!Array.isArray(runs)) fail('labels_rle must be a list');
  let cursor = 0;
  for (const run of runs) {
    if (!Array.isArray(run) || run.length !== 2) {
      fail('labels_rle entries must be [count, label]');
    }
    const [count, label] = run;
    if (!Number.isInteger(count) || count < 1) fail('run counts must be >= 1');
    if (label !== 0 && label !== 1 && label !== 2) {
      fail('label codes must be 0, 1 or 2');
    }
    if (label !== Material.Empty) {
      for (let i = 0; i < count; i++) sketch.setVoxel(cursor + i, label);
    }
    cursor += count;
  }
  if (cursor !== total) {
    fail(`runs cover ${cursor} voxels, expected ${total}`);
  }
  if (!Array.isArray(doc.joints)) fail('joints must be a list');
  for (const entry of doc.joints) {
    if (typeof entry !== 'object' || entry === null) {
      fail('each joint must be an object');
    }
    const { id, position_mm, axis, range_rad } = entry;
    if (
      !Number.isInteger(id) ||
      !Array.isArray(position_mm) ||
      position_mm.length !== 3 ||
      !Array.isArray(axis) ||
      axis.length !== 3 ||
      !Array.isArray(range_rad) ||
      range_rad.length !== 2
    ) {
      fail(`joint ${id}: bad field shapes`);
    }
    sketch.setJoint({
      id,
      positionMm: position_mm as Vec3,
      axis: axis as Vec3,
      rangeRad: range_rad as [number, number],
    });
  }
  return sketch;
}
