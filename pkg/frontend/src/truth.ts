// Ground-truth click handling: clicking a region cycles its manual state
// none -> 1 -> 2 -> none. Clicks resolve to the nearest region centroid
// within a radius derived from the region's area.

import { RegionSummary } from './api.js';

export type TruthState = 1 | 2 | null;

export function cycleTruth(current: TruthState): TruthState {
  if (current === null) return 1;
  if (current === 1) return 2;
  return null;
}

export function clickRadius(area: number): number {
  return Math.max(4, 1.5 * Math.sqrt(area / Math.PI));
}

export function nearestRegion(
    regions: RegionSummary[], x: number, y: number): RegionSummary | null {
  let best: RegionSummary | null = null;
  let bestDist = Infinity;
  for (const r of regions) {
    const d = Math.hypot(r.centroid_x - x, r.centroid_y - y);
    if (d <= clickRadius(r.area) && d < bestDist) {
      best = r;
      bestDist = d;
    }
  }
  return best;
}

// The sweep needs at least one manual call of each state.
export function sweepEnabled(truth: Map<number, TruthState>): boolean {
  let has1 = false;
  let has2 = false;
  for (const state of truth.values()) {
    if (state === 1) has1 = true;
    if (state === 2) has2 = true;
  }
  return has1 && has2;
}

export function truthEntries(
    truth: Map<number, TruthState>): { label: number; state: number }[] {
  const entries: { label: number; state: number }[] = [];
  for (const [label, state] of truth) {
    if (state !== null) entries.push({ label, state });
  }
  entries.sort((a, b) => a.label - b.label);
  return entries;
}
