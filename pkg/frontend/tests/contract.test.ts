import { ChildProcess, spawn } from 'node:child_process';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { bannerFromOutcome } from '../src/banner';
import { PipelineClient, submitSketch } from '../src/client';
import { buildQuadruped, buildThinLimb } from '../src/fixtures';
import { buildGauges } from '../src/gauges';
import { decodeMeshPayload } from '../src/stl';
import { buildViewportScene } from '../src/render';

/**
 * Contract tests against the real pipeline service: the suite boots
 * `voxfab serve` and drives it over HTTP exactly like the browser app.
 */

const PORT = 8487;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let serverLog = '';
const client = new PipelineClient(BASE);

beforeAll(async () => {
  server = spawn('voxfab', ['serve', '--bind', `127.0.0.1:${PORT}`], {
    stdio: ['ignore', 'pipe', 'pipe'],
  });
  server.stdout?.on('data', (chunk: Buffer) => (serverLog += chunk));
  server.stderr?.on('data', (chunk: Buffer) => (serverLog += chunk));
  let exited = false;
  server.on('exit', () => (exited = true));
  for (let i = 0; i < 240; i++) {
    if (exited) break;
    if (await client.health()) return;
    await new Promise((r) => setTimeout(r, 500));
  }
  throw new Error(`pipeline service did not come up:\n${serverLog}`);
}, 120_000);

afterAll(() => {
  server?.kill('SIGTERM');
});

describe('pipeline service contract', () => {
  it('serves its configuration', async () => {
    const config = await client.config();
    expect(config).toHaveProperty('shell_thickness_mm');
    expect(config).toHaveProperty('motor_solver');
    expect(config).toHaveProperty('electronics');
  });

  it('compiles the quadruped sketch end to end', async () => {
    const { doc } = buildQuadruped();
    const outcome = await submitSketch(doc, client, {
      design_id: 'quadruped-sketch',
    });
    // 200 means the serialized sketch parsed with zero violations
    expect(outcome.kind).toBe('success');
    if (outcome.kind !== 'success') return;
    const response = outcome.response;
    expect(response.design_id).toBe('quadruped-sketch');
    expect(response.status).toBe('success');
    expect(response.reports.map((r) => r.stage)).toEqual([
      'tree',
      'processors',
      'motor',
      'electronics',
      'wire',
      'scoring',
    ]);

    // torso plus four legs, plus the soft skin
    expect(response.meshes!.map((m) => m.part)).toEqual([
      'part_0',
      'part_1',
      'part_2',
      'part_3',
      'part_4',
      'skin',
    ]);
    for (const mesh of response.meshes!) {
      const decoded = decodeMeshPayload(mesh.data);
      expect(decoded.triangleCount).toBeGreaterThan(0);
      expect(decoded.positions).toHaveLength(decoded.triangleCount * 9);
    }

    // overlays: one motor per joint, both electronics boxes, one route each
    expect(response.placements!.motors.map((m) => m.joint_id)).toEqual([
      0, 1, 2, 3,
    ]);
    expect(
      response.placements!.electronics.map((p) => p.component).sort(),
    ).toEqual(['battery', 'controller']);
    expect(response.routes!.map((r) => r.joint_id)).toEqual([0, 1, 2, 3]);
    for (const route of response.routes!) {
      expect(route.waypoints_mm.length).toBeGreaterThan(1);
    }

    const scene = buildViewportScene(response);
    expect(scene.children.map((c) => c.name)).toEqual([
      'meshes',
      'motors',
      'electronics',
      'routes',
    ]);
    expect(scene.getObjectByName('meshes')!.children).toHaveLength(6);
    expect(scene.getObjectByName('motors')!.children).toHaveLength(8);
    expect(scene.getObjectByName('electronics')!.children).toHaveLength(2);
    expect(scene.getObjectByName('routes')!.children).toHaveLength(4);

    const gauges = buildGauges(response.scores);
    expect(gauges).toHaveLength(6);
    expect(response.scores.s_mfg).toBeGreaterThan(0);
    expect(response.scores.s_mfg).toBeLessThanOrEqual(5);
    expect(doc.lastResponse).toBe(response);
  }, 120_000);

  it('surfaces the thin-limb failure as a stage banner', async () => {
    const { doc } = buildThinLimb();
    const before = doc.clone();
    const outcome = await submitSketch(doc, client, {
      design_id: 'thin-limb-sketch',
    });
    expect(outcome.kind).toBe('stage-failure');
    if (outcome.kind !== 'stage-failure') return;
    expect(outcome.response.meshes).toBeUndefined();
    const banner = bannerFromOutcome(outcome)!;
    expect(banner.severity).toBe('error');
    expect(banner.stage).toBe('electronics');
    expect(banner.reason).toBe('no_segment_hosts_controller');
    // the sketch itself is untouched by the failure
    expect(doc.equals(before)).toBe(true);
  }, 120_000);

  it('rejects malformed bytes without crashing the session', async () => {
    const outcome = await client.submit('{not a morphology');
    expect(outcome.kind).toBe('invalid');
    if (outcome.kind === 'invalid') {
      expect(outcome.detail).toContain('JSON');
    }
    // service still healthy afterwards
    expect(await client.health()).toBe(true);
  });
});
