// Local re-classification from cached f values. The state rule is the same
// strict inequality the server applies, so dragging the threshold can
// restyle regions instantly without a round trip; the server remains the
// source of truth on the next classify call.

export function stateFor(f: number, threshold: number): 1 | 2 {
  return f > threshold ? 1 : 2;
}

export type LocalStates = {
  states: Record<string, number>;
  counts: { 1: number; 2: number };
};

export function recomputeStates(
    fValues: Record<string, number>, threshold: number): LocalStates {
  const states: Record<string, number> = {};
  const counts = { 1: 0, 2: 0 };
  for (const [label, f] of Object.entries(fValues)) {
    const s = stateFor(f, threshold);
    states[label] = s;
    counts[s] += 1;
  }
  return { states, counts };
}

// Labels whose state differs between two thresholds: exactly the regions
// whose f value lies in the half-open interval between them.
export function flippedLabels(
    fValues: Record<string, number>, before: number, after: number): string[] {
  const flipped: string[] = [];
  for (const [label, f] of Object.entries(fValues)) {
    if (stateFor(f, before) !== stateFor(f, after)) flipped.push(label);
  }
  return flipped;
}
