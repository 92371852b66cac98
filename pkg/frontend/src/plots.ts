// Canvas plotting: f-value histogram with a draggable threshold line, and
// the accuracy-vs-threshold sweep curve with its optimum marked.

export type HistogramData = { edges: number[]; counts: number[] };

export type PlotRange = { lo: number; hi: number };

export function thresholdToX(t: number, width: number, range: PlotRange): number {
  return ((t - range.lo) / (range.hi - range.lo)) * width;
}

export function xToThreshold(x: number, width: number, range: PlotRange): number {
  const frac = Math.min(Math.max(x / width, 0), 1);
  return range.lo + frac * (range.hi - range.lo);
}

export function histogramRange(hist: HistogramData): PlotRange {
  const lo = hist.edges[0];
  const hi = hist.edges[hist.edges.length - 1];
  return hi > lo ? { lo, hi } : { lo: lo - 0.5, hi: hi + 0.5 };
}

export function drawHistogram(ctx: CanvasRenderingContext2D, width: number,
                              height: number, hist: HistogramData,
                              threshold: number | null): void {
  ctx.clearRect(0, 0, width, height);
  const range = histogramRange(hist);
  const peak = Math.max(1, ...hist.counts);
  ctx.fillStyle = '#6b7f9e';
  for (let i = 0; i < hist.counts.length; i++) {
    const x0 = thresholdToX(hist.edges[i], width, range);
    const x1 = thresholdToX(hist.edges[i + 1], width, range);
    const h = (hist.counts[i] / peak) * (height - 12);
    ctx.fillRect(x0, height - h, Math.max(1, x1 - x0 - 1), h);
  }
  if (threshold !== null) {
    const x = thresholdToX(threshold, width, range);
    ctx.strokeStyle = '#d43f3f';
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, height);
    ctx.stroke();
  }
}

export function drawSweep(ctx: CanvasRenderingContext2D, width: number,
                          height: number, thresholds: number[],
                          accuracies: number[], optimum: number): void {
  ctx.clearRect(0, 0, width, height);
  if (thresholds.length === 0) return;
  const range = { lo: thresholds[0], hi: thresholds[thresholds.length - 1] };
  const pad = 6;
  const ay = (a: number) => pad + (1 - a) * (height - 2 * pad);

  ctx.strokeStyle = '#2c6e49';
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  thresholds.forEach((t, i) => {
    const x = thresholdToX(t, width, range);
    const y = ay(accuracies[i]);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();

  const ox = thresholdToX(optimum, width, range);
  ctx.strokeStyle = '#d43f3f';
  ctx.setLineDash([5, 3]);
  ctx.beginPath();
  ctx.moveTo(ox, 0);
  ctx.lineTo(ox, height);
  ctx.stroke();
  ctx.setLineDash([]);
}
