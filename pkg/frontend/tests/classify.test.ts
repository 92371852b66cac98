import { describe, expect, it } from 'vitest';

import { flippedLabels, recomputeStates, stateFor } from '../src/classify.js';

describe('stateFor', () => {
  it('is strictly above-threshold for state 1', () => {
    expect(stateFor(0.51, 0.5)).toBe(1);
    expect(stateFor(0.5, 0.5)).toBe(2);  // boundary goes to state 2
    expect(stateFor(0.49, 0.5)).toBe(2);
  });
});

describe('recomputeStates', () => {
  const f = { '1': 0.2, '2': 0.8, '3': 1.4 };

  it('partitions every region into exactly one state', () => {
    const { states, counts } = recomputeStates(f, 0.5);
    expect(Object.keys(states).length).toBe(3);
    expect(counts[1] + counts[2]).toBe(3);
    expect(states).toEqual({ '1': 2, '2': 1, '3': 1 });
  });

  it('dragging across one f value flips exactly that region', () => {
    const before = recomputeStates(f, 0.75);
    const after = recomputeStates(f, 0.85);
    expect(flippedLabels(f, 0.75, 0.85)).toEqual(['2']);
    expect(before.states['2']).toBe(1);
    expect(after.states['2']).toBe(2);
    expect(before.states['1']).toBe(after.states['1']);
    expect(before.states['3']).toBe(after.states['3']);
  });

  it('dragging within a gap flips nothing', () => {
    expect(flippedLabels(f, 0.9, 1.3)).toEqual([]);
  });
});
