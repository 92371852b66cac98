import { describe, expect, it } from 'vitest';

import { RegionSummary } from '../src/api.js';
import { histogramRange, thresholdToX, xToThreshold } from '../src/plots.js';
import { ALL_STEPS, stepSlots } from '../src/steps.js';
import { clickRadius, cycleTruth, nearestRegion, sweepEnabled,
         truthEntries } from '../src/truth.js';

const region = (label: number, x: number, y: number, area = 100): RegionSummary =>
    ({ label, centroid_x: x, centroid_y: y, area,
       mean_R: 0, mean_G: 0, mean_B: 0 });

describe('truth interactions', () => {
  it('cycles none -> 1 -> 2 -> none', () => {
    expect(cycleTruth(null)).toBe(1);
    expect(cycleTruth(1)).toBe(2);
    expect(cycleTruth(2)).toBeNull();
  });

  it('resolves clicks to the nearest region within its radius', () => {
    const regions = [region(1, 10, 10), region(2, 30, 10)];
    expect(nearestRegion(regions, 12, 11)?.label).toBe(1);
    expect(nearestRegion(regions, 28, 10)?.label).toBe(2);
    expect(nearestRegion(regions, 20, 40)).toBeNull();
  });

  it('click radius grows with region area', () => {
    expect(clickRadius(4)).toBe(4);  // floor for tiny regions
    expect(clickRadius(10000)).toBeCloseTo(1.5 * Math.sqrt(10000 / Math.PI));
  });

  it('sweep requires one of each state', () => {
    const truth = new Map<number, 1 | 2 | null>();
    expect(sweepEnabled(truth)).toBe(false);
    truth.set(1, 1);
    expect(sweepEnabled(truth)).toBe(false);
    truth.set(2, 2);
    expect(sweepEnabled(truth)).toBe(true);
    truth.set(2, null);
    expect(sweepEnabled(truth)).toBe(false);
  });

  it('entries are sorted and exclude cleared labels', () => {
    const truth = new Map<number, 1 | 2 | null>([[5, 2], [1, 1], [3, null]]);
    expect(truthEntries(truth)).toEqual(
        [{ label: 1, state: 1 }, { label: 5, state: 2 }]);
  });
});

describe('step slots', () => {
  it('marks missing steps as skipped, in pipeline order', () => {
    const slots = stepSlots([
      { name: 'grayscale', url: '/a' },
      { name: 'final', url: '/b' },
    ]);
    expect(slots.map(s => s.name)).toEqual([...ALL_STEPS]);
    expect(slots[0].url).toBe('/a');
    expect(slots[1].url).toBeNull();          // equalized skipped
    expect(slots[slots.length - 1].url).toBe('/b');
    expect(slots.filter(s => s.url === null).length).toBe(8);
  });
});

describe('plot coordinate mapping', () => {
  it('threshold<->x round trips', () => {
    const range = { lo: 0, hi: 2 };
    for (const t of [0, 0.3, 1.2, 2]) {
      expect(xToThreshold(thresholdToX(t, 320, range), 320, range))
          .toBeCloseTo(t, 10);
    }
  });

  it('x is clamped to the plot range', () => {
    const range = { lo: 0.5, hi: 1.5 };
    expect(xToThreshold(-50, 320, range)).toBe(0.5);
    expect(xToThreshold(9999, 320, range)).toBe(1.5);
  });

  it('histogramRange widens degenerate edges', () => {
    expect(histogramRange({ edges: [1, 1], counts: [3] }))
        .toEqual({ lo: 0.5, hi: 1.5 });
  });
});
