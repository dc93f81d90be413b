import { describe, expect, it } from 'vitest';
import { bannerFromOutcome } from '../src/banner';
import { SubmitOutcome } from '../src/client';
import { buildGauges } from '../src/gauges';
import { PipelineResponse } from '../src/types';

const SCORES = {
  raw: { s_motor: 4000, s_elec: 10 },
  normalized: {
    s_motor: 0.4,
    s_elec: 0.33,
    s_cable: 0.8,
    s_elec_inst: 0.99,
    s_body_inst: 1.0,
  },
  s_mfg: 3.52,
};

describe('score gauges', () => {
  it('builds one gauge per normalized term plus the aggregate', () => {
    const gauges = buildGauges(SCORES);
    expect(gauges.map((g) => g.name)).toEqual([
      's_motor',
      's_elec',
      's_cable',
      's_elec_inst',
      's_body_inst',
      's_mfg',
    ]);
    const motor = gauges[0];
    expect(motor.fraction).toBeCloseTo(0.4);
    const overall = gauges[5];
    expect(overall.value).toBeCloseTo(3.52);
    expect(overall.fraction).toBeCloseTo(3.52 / 5);
  });

  it('clamps fill fractions and tolerates missing terms', () => {
    const gauges = buildGauges({ raw: {}, normalized: {}, s_mfg: 0 });
    for (const gauge of gauges) {
      expect(gauge.fraction).toBe(0);
    }
  });
});

function failureResponse(): PipelineResponse {
  return {
    design_id: 'thin',
    status: 'failure',
    failure: {
      stage: 'electronics',
      reason: 'no_segment_hosts_controller',
      joint_id: null,
      detail: 'controller box does not fit segments 0 and 1',
    },
    reports: [],
    scores: { raw: {}, normalized: {}, s_mfg: 0 },
  };
}

describe('failure banner', () => {
  it('names the failing stage and the segments involved', () => {
    const outcome: SubmitOutcome = {
      kind: 'stage-failure',
      seq: 1,
      response: failureResponse(),
    };
    const banner = bannerFromOutcome(outcome)!;
    expect(banner.severity).toBe('error');
    expect(banner.stage).toBe('electronics');
    expect(banner.reason).toBe('no_segment_hosts_controller');
    expect(banner.segmentIds).toEqual([0, 1]);
    expect(banner.message).toContain('electronics');
  });

  it('carries the offending joint id when the failure names one', () => {
    const response = failureResponse();
    response.failure = {
      stage: 'motor',
      reason: 'no_feasible_offset',
      joint_id: 2,
      detail: '',
    };
    const banner = bannerFromOutcome({
      kind: 'stage-failure',
      seq: 1,
      response,
    })!;
    expect(banner.jointId).toBe(2);
    expect(banner.message).toContain('joint 2');
  });

  it('stays quiet on success and stale outcomes', () => {
    const ok: PipelineResponse = { ...failureResponse(), status: 'success', failure: null };
    expect(bannerFromOutcome({ kind: 'success', seq: 1, response: ok })).toBeNull();
    expect(bannerFromOutcome({ kind: 'stale', seq: 1 })).toBeNull();
  });

  it('keeps network failures reassuring and non-fatal', () => {
    const banner = bannerFromOutcome({
      kind: 'network-error',
      seq: 3,
      detail: 'ECONNREFUSED',
    })!;
    expect(banner.severity).toBe('warning');
    expect(banner.stage).toBeNull();
    expect(banner.message).toContain('unchanged');
  });
});
