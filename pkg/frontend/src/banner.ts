import { SubmitOutcome } from './client';
import { FailurePayload } from './types';

export interface BannerModel {
  severity: 'error' | 'warning';
  /** failing pipeline stage, when the pipeline itself reported one */
  stage: string | null;
  reason: string | null;
  jointId: number | null;
  /** segment ids mentioned by the failure detail */
  segmentIds: number[];
  message: string;
}

function segmentIdsFrom(detail: string): number[] {
  const ids: number[] = [];
  for (const match of detail.matchAll(/segments?\s+(\d+)(?:\s+and\s+(\d+))?/g)) {
    for (const g of [match[1], match[2]]) {
      if (g !== undefined) ids.push(Number(g));
    }
  }
  return [...new Set(ids)].sort((a, b) => a - b);
}

export function bannerFromFailure(failure: FailurePayload): BannerModel {
  const parts = [`Pipeline failed at stage ${failure.stage}: ${failure.reason}`];
  if (failure.joint_id !== null && failure.joint_id !== undefined) {
    parts.push(`(joint ${failure.joint_id})`);
  }
  if (failure.detail) parts.push(`- ${failure.detail}`);
  return {
    severity: 'error',
    stage: failure.stage,
    reason: failure.reason,
    jointId: failure.joint_id ?? null,
    segmentIds: segmentIdsFrom(failure.detail ?? ''),
    message: parts.join(' '),
  };
}

/** Banner for anything that should interrupt the user; null when the
 * outcome needs no banner (success, or a stale response to ignore). */
export function bannerFromOutcome(outcome: SubmitOutcome): BannerModel | null {
  switch (outcome.kind) {
    case 'success':
    case 'stale':
      return null;
    case 'stage-failure': {
      const failure = outcome.response.failure;
      if (!failure) {
        return {
          severity: 'error',
          stage: null,
          reason: null,
          jointId: null,
          segmentIds: [],
          message: 'Pipeline failed without a stage report',
        };
      }
      return bannerFromFailure(failure);
    }
    case 'invalid':
      return {
        severity: 'error',
        stage: null,
        reason: 'malformed_document',
        jointId: null,
        segmentIds: [],
        message: `Sketch rejected: ${outcome.detail}`,
      };
    case 'network-error':
      return {
        severity: 'warning',
        stage: null,
        reason: 'network',
        jointId: null,
        segmentIds: [],
        message: `Could not reach the pipeline service: ${outcome.detail}. Your sketch is unchanged.`,
      };
  }
}
