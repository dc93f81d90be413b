// Shared types: the sketch side mirrors the morphology wire format the
// pipeline service accepts, the response side mirrors what it returns.

export type Vec3 = [number, number, number];

export enum Material {
  Empty = 0,
  Rigid = 1,
  Soft = 2,
}

export interface JointGizmo {
  id: number;
  positionMm: Vec3;
  axis: Vec3; // unit vector
  rangeRad: [number, number]; // must bracket zero
}

/** Wire format of a .vmorph document. */
export interface MorphologyDoc {
  version: number;
  dims: Vec3;
  voxel_size_mm: number;
  labels_rle: Array<[number, number]>;
  joints: Array<{
    id: number;
    position_mm: number[];
    axis: number[];
    range_rad: [number, number];
  }>;
  meta: Record<string, unknown>;
}

// --- pipeline service responses -------------------------------------------

export interface StageReport {
  stage: string;
  status: 'success' | 'failure';
  reason?: string;
  joint_id?: number | null;
  detail?: string;
  metrics?: Record<string, unknown>;
}

export interface ScorePayload {
  raw: Record<string, number>;
  normalized: Record<string, number>;
  s_mfg: number;
}

export interface MeshPayload {
  part: string;
  format: 'stl-base64';
  data: string;
}

export interface MotorPlacementPayload {
  joint_id: number;
  offset_mm: number;
  configuration: string;
  score: number;
  pose: number[][]; // 4x4 row-major, z column is the joint axis
}

export interface ElectronicsPlacementPayload {
  component: string;
  segment: number;
  box_center_mm: number[];
  rotation: number[][];
  extents_mm: number[];
  v_insert_mm3: number;
}

export interface RoutePayload {
  joint_id: number;
  length_mm: number;
  max_curvature_per_mm: number;
  touched_parts: number[];
  waypoints_mm: number[][];
}

export interface FailurePayload {
  stage: string;
  reason: string;
  joint_id: number | null;
  detail: string;
}

export interface PipelineResponse {
  design_id: string;
  status: 'success' | 'failure';
  failure: FailurePayload | null;
  reports: StageReport[];
  scores: ScorePayload;
  meshes?: MeshPayload[];
  placements?: {
    motors: MotorPlacementPayload[];
    electronics: ElectronicsPlacementPayload[];
  };
  routes?: RoutePayload[];
}

export class OutOfBoundsError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'OutOfBoundsError';
  }
}
