import { ScorePayload } from './types';

export interface GaugeModel {
  name: string;
  label: string;
  /** fill fraction in [0, 1] */
  fraction: number;
  value: number;
}

const LABELS: Record<string, string> = {
  s_motor: 'Motor',
  s_elec: 'Electronics',
  s_cable: 'Cabling',
  s_elec_inst: 'Elec. install',
  s_body_inst: 'Body install',
};

/**
 * Gauge models for the score panel: one per normalized term plus the
 * aggregate. Normalized terms are already in [0,1]; the aggregate is the
 * sum of five, shown as a fraction of its ceiling.
 */
export function buildGauges(scores: ScorePayload): GaugeModel[] {
  const gauges: GaugeModel[] = [];
  for (const [name, label] of Object.entries(LABELS)) {
    const value = scores.normalized[name] ?? 0;
    gauges.push({ name, label, fraction: clamp01(value), value });
  }
  gauges.push({
    name: 's_mfg',
    label: 'Overall',
    fraction: clamp01(scores.s_mfg / 5),
    value: scores.s_mfg,
  });
  return gauges;
}

function clamp01(v: number): number {
  return Math.min(1, Math.max(0, v));
}
