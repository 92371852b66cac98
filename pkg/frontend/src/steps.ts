// Step-wise pipeline viewer model: the full step list in pipeline order,
// which parameters each step responds to, and "skipped" placeholders for
// steps disabled by the current parameter set.

import { StepInfo } from './api.js';
import { ParamValues } from './params.js';

export const ALL_STEPS = [
  'grayscale',
  'equalized',
  'background',
  'background_subtracted',
  'smoothed',
  'background_mask',
  'inverted',
  'enforced',
  'watershed_raw',
  'final',
] as const;

export type StepName = (typeof ALL_STEPS)[number];

export const STEP_PARAMS: Record<StepName, (keyof ParamValues)[]> = {
  grayscale: [],
  equalized: ['equalization_clip_limit', 'enable_equalization'],
  background: ['background_size', 'enable_background_subtraction'],
  background_subtracted: ['background_size', 'enable_background_subtraction'],
  smoothed: ['median_size', 'gaussian_radius', 'enable_smoothing'],
  background_mask: [],
  inverted: [],
  enforced: [],
  watershed_raw: [],
  final: ['min_area', 'max_area', 'min_signal'],
};

export type StepSlot = { name: StepName; url: string | null };

export function stepSlots(returned: StepInfo[]): StepSlot[] {
  const byName = new Map(returned.map(s => [s.name, s.url]));
  return ALL_STEPS.map(name => ({ name, url: byName.get(name) ?? null }));
}
