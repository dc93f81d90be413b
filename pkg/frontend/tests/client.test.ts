import { describe, expect, it } from 'vitest';
import { PipelineClient, submitSketch } from '../src/client';
import { buildThinLimb } from '../src/fixtures';
import { PipelineResponse } from '../src/types';

type Resolver = (res: { ok: boolean; status: number; json(): Promise<unknown> }) => void;

function jsonResponse(status: number, body: unknown) {
  return { ok: status < 400, status, json: async () => body };
}

const SUCCESS: PipelineResponse = {
  design_id: 'd',
  status: 'success',
  failure: null,
  reports: [{ stage: 'tree', status: 'success' }],
  scores: { raw: {}, normalized: {}, s_mfg: 2.5 },
  meshes: [],
};

describe('PipelineClient', () => {
  it('reports success and caches the response on the document', async () => {
    const client = new PipelineClient('http://x', async () =>
      jsonResponse(200, SUCCESS),
    );
    const { doc } = buildThinLimb();
    const outcome = await submitSketch(doc, client);
    expect(outcome.kind).toBe('success');
    expect(doc.lastResponse?.design_id).toBe('d');
  });

  it('maps 422 to stage-failure and 400 to invalid', async () => {
    const failure = { ...SUCCESS, status: 'failure' as const, failure: {
      stage: 'electronics', reason: 'no_segment_hosts_controller',
      joint_id: null, detail: '' } };
    let status = 422;
    const client = new PipelineClient('http://x', async () =>
      status === 422
        ? jsonResponse(422, failure)
        : jsonResponse(400, { status: 'invalid', detail: 'bad bytes' }),
    );
    const first = await client.submit('{}');
    expect(first.kind).toBe('stage-failure');
    status = 400;
    const second = await client.submit('{}');
    expect(second).toMatchObject({ kind: 'invalid', detail: 'bad bytes' });
  });

  it('network failure is non-destructive: the document is untouched', async () => {
    const client = new PipelineClient('http://x', async () => {
      throw new TypeError('fetch failed');
    });
    const { doc } = buildThinLimb();
    const before = doc.clone();
    const cachedBefore = doc.lastResponse;
    const outcome = await submitSketch(doc, client);
    expect(outcome.kind).toBe('network-error');
    expect(doc.equals(before)).toBe(true);
    expect(doc.lastResponse).toBe(cachedBefore);
    expect(client.inFlight).toBe(false);
  });

  it('discards responses that lost the race to a newer submit', async () => {
    const pending: Resolver[] = [];
    const client = new PipelineClient(
      'http://x',
      () =>
        new Promise((resolve) => {
          pending.push(resolve);
        }),
    );
    const first = client.submit('one');
    const second = client.submit('two');
    // answer out of order: the newer request resolves first
    pending[1](jsonResponse(200, { ...SUCCESS, design_id: 'two' }));
    const secondOutcome = await second;
    expect(secondOutcome.kind).toBe('success');
    pending[0](jsonResponse(200, { ...SUCCESS, design_id: 'one' }));
    const firstOutcome = await first;
    expect(firstOutcome.kind).toBe('stale');
  });

  it('tracks the in-flight request', async () => {
    let release: Resolver = () => undefined;
    const client = new PipelineClient(
      'http://x',
      () => new Promise((resolve) => (release = resolve)),
    );
    expect(client.inFlight).toBe(false);
    const submitted = client.submit('{}');
    expect(client.inFlight).toBe(true);
    release(jsonResponse(200, SUCCESS));
    await submitted;
    expect(client.inFlight).toBe(false);
  });

  it('health probes the service without throwing', async () => {
    const up = new PipelineClient('http://x', async () =>
      jsonResponse(200, { status: 'ok' }),
    );
    expect(await up.health()).toBe(true);
    const down = new PipelineClient('http://x', async () => {
      throw new Error('refused');
    });
    expect(await down.health()).toBe(false);
  });
});
