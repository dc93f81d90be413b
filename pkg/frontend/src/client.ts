import { serializeSketch } from './codec';
import { SketchDocument } from './document';
import { PipelineResponse } from './types';

export type SubmitOutcome =
  | { kind: 'success'; seq: number; response: PipelineResponse }
  | { kind: 'stage-failure'; seq: number; response: PipelineResponse }
  | { kind: 'invalid'; seq: number; detail: string }
  | { kind: 'network-error'; seq: number; detail: string }
  | { kind: 'stale'; seq: number };

type FetchLike = (
  input: string,
  init?: { method?: string; body?: string; headers?: Record<string, string> },
) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

/**
 * Thin client for the pipeline service. Every submit carries a sequence
 * number; a response that arrives after a newer submit has been issued is
 * reported as stale and must not reach the viewport.
 */
export class PipelineClient {
  private seq = 0;
  private inFlightSeq: number | null = null;

  constructor(
    readonly baseUrl: string,
    private fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  get inFlight(): boolean {
    return this.inFlightSeq !== null;
  }

  async health(): Promise<boolean> {
    try {
      const res = await this.fetchImpl(`${this.baseUrl}/v1/health`);
      if (!res.ok) return false;
      const body = (await res.json()) as { status?: string };
      return body.status === 'ok';
    } catch {
      return false;
    }
  }

  async config(): Promise<Record<string, unknown>> {
    const res = await this.fetchImpl(`${this.baseUrl}/v1/config`);
    if (!res.ok) throw new Error(`config fetch failed: ${res.status}`);
    return (await res.json()) as Record<string, unknown>;
  }

  /**
   * POST a serialized morphology. A newer submit supersedes an older one:
   * the older response resolves as stale. Network failures resolve (never
   * reject) so callers can keep editor state intact.
   */
  async submit(body: string): Promise<SubmitOutcome> {
    const seq = ++this.seq;
    this.inFlightSeq = seq;
    let outcome: SubmitOutcome;
    try {
      const res = await this.fetchImpl(`${this.baseUrl}/v1/pipeline`, {
        method: 'POST',
        body,
        headers: { 'content-type': 'application/octet-stream' },
      });
      if (seq !== this.seq) {
        return { kind: 'stale', seq };
      }
      if (res.status === 200) {
        const response = (await res.json()) as PipelineResponse;
        outcome = { kind: 'success', seq, response };
      } else if (res.status === 422) {
        const response = (await res.json()) as PipelineResponse;
        outcome = { kind: 'stage-failure', seq, response };
      } else if (res.status === 400) {
        const body = (await res.json()) as { detail?: string };
        outcome = { kind: 'invalid', seq, detail: body.detail ?? 'rejected' };
      } else {
        outcome = {
          kind: 'network-error',
          seq,
          detail: `unexpected status ${res.status}`,
        };
      }
    } catch (exc) {
      outcome =
        seq !== this.seq
          ? { kind: 'stale', seq }
          : { kind: 'network-error', seq, detail: String(exc) };
    } finally {
      if (this.inFlightSeq === seq) this.inFlightSeq = null;
    }
    return outcome;
  }
}

/**
 * Serialize the sketch, submit it, and cache accepted responses on the
 * document. Stale and failed submits leave the document exactly as it was.
 */
export async function submitSketch(
  doc: SketchDocument,
  client: PipelineClient,
  meta: Record<string, unknown> = {},
): Promise<SubmitOutcome> {
  const outcome = await client.submit(serializeSketch(doc, meta));
  if (outcome.kind === 'success' || outcome.kind === 'stage-failure') {
    doc.lastResponse = outcome.response;
  }
  return outcome;
}
