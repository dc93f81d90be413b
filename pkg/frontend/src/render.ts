import * as THREE from 'three';
import { decodeMeshPayload } from './stl';
import {
  ElectronicsPlacementPayload,
  MeshPayload,
  MotorPlacementPayload,
  PipelineResponse,
  RoutePayload,
} from './types';

/**
 * Scene builders for the blueprint viewport. Everything here constructs
 * plain three.js objects without touching a renderer, so the structure can
 * be asserted headlessly.
 */

const PART_COLOR = 0x8899aa;
const SKIN_COLOR = 0x55aa77;
const MOTOR_COLOR = 0xee5533;
const ELECTRONICS_COLOR = 0xffbb22;
const WIRE_COLOR = 0x3377ee;

export function buildMeshGroup(meshes: MeshPayload[]): THREE.Group {
  const group = new THREE.Group();
  group.name = 'meshes';
  for (const mesh of meshes) {
    const decoded = decodeMeshPayload(mesh.data);
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute(
      'position',
      new THREE.BufferAttribute(decoded.positions, 3),
    );
    // flat facet normals, one per triangle corner
    const normals = new Float32Array(decoded.triangleCount * 9);
    for (let t = 0; t < decoded.triangleCount; t++) {
      for (let v = 0; v < 3; v++) {
        normals.set(decoded.normals.subarray(t * 3, t * 3 + 3), t * 9 + v * 3);
      }
    }
    geometry.setAttribute('normal', new THREE.BufferAttribute(normals, 3));
    const skin = mesh.part === 'skin';
    const material = new THREE.MeshStandardMaterial({
      color: skin ? SKIN_COLOR : PART_COLOR,
      transparent: skin,
      opacity: skin ? 0.35 : 1.0,
    });
    const object = new THREE.Mesh(geometry, material);
    object.name = mesh.part;
    group.add(object);
  }
  return group;
}

/** One axis marker per motor: a segment through the pose origin along the
 * pose's z column (the joint axis), plus a small origin sphere. */
export function buildMotorOverlay(
  motors: MotorPlacementPayload[],
  lengthMm = 24,
): THREE.Group {
  const group = new THREE.Group();
  group.name = 'motors';
  for (const motor of motors) {
    const p = motor.pose;
    const origin = new THREE.Vector3(p[0][3], p[1][3], p[2][3]);
    const axis = new THREE.Vector3(p[0][2], p[1][2], p[2][2]).normalize();
    const half = axis.clone().multiplyScalar(lengthMm / 2);
    const geometry = new THREE.BufferGeometry().setFromPoints([
      origin.clone().sub(half),
      origin.clone().add(half),
    ]);
    const line = new THREE.Line(
      geometry,
      new THREE.LineBasicMaterial({ color: MOTOR_COLOR }),
    );
    line.name = `motor_${motor.joint_id}`;
    const knob = new THREE.Mesh(
      new THREE.SphereGeometry(2.0, 8, 6),
      new THREE.MeshBasicMaterial({ color: MOTOR_COLOR }),
    );
    knob.position.copy(origin);
    knob.name = `motor_${motor.joint_id}_origin`;
    group.add(line, knob);
  }
  return group;
}

/** Wireframe box per electronics placement, posed by its rotation matrix. */
export function buildElectronicsOverlay(
  placements: ElectronicsPlacementPayload[],
): THREE.Group {
  const group = new THREE.Group();
  group.name = 'electronics';
  for (const placement of placements) {
    const [ex, ey, ez] = placement.extents_mm;
    const geometry = new THREE.BoxGeometry(ex, ey, ez);
    const box = new THREE.LineSegments(
      new THREE.EdgesGeometry(geometry),
      new THREE.LineBasicMaterial({ color: ELECTRONICS_COLOR }),
    );
    const r = placement.rotation; // 3x3 row-major
    const m = new THREE.Matrix4();
    m.set(
      r[0][0], r[0][1], r[0][2], placement.box_center_mm[0],
      r[1][0], r[1][1], r[1][2], placement.box_center_mm[1],
      r[2][0], r[2][1], r[2][2], placement.box_center_mm[2],
      0, 0, 0, 1,
    );
    box.applyMatrix4(m);
    box.name = `electronics_${placement.component}`;
    group.add(box);
  }
  return group;
}

/** Polyline per cable route following its waypoints. */
export function buildWireOverlay(routes: RoutePayload[]): THREE.Group {
  const group = new THREE.Group();
  group.name = 'routes';
  for (const route of routes) {
    const points = route.waypoints_mm.map(
      ([x, y, z]) => new THREE.Vector3(x, y, z),
    );
    const line = new THREE.Line(
      new THREE.BufferGeometry().setFromPoints(points),
      new THREE.LineBasicMaterial({ color: WIRE_COLOR }),
    );
    line.name = `route_${route.joint_id}`;
    group.add(line);
  }
  return group;
}

/** The full blueprint scene for a successful pipeline response. */
export function buildViewportScene(response: PipelineResponse): THREE.Group {
  const root = new THREE.Group();
  root.name = `blueprint_${response.design_id}`;
  root.add(buildMeshGroup(response.meshes ?? []));
  root.add(buildMotorOverlay(response.placements?.motors ?? []));
  root.add(buildElectronicsOverlay(response.placements?.electronics ?? []));
  root.add(buildWireOverlay(response.routes ?? []));
  return root;
}
