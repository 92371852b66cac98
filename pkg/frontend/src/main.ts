// DOM wiring for the tuning page. All computation lives on the server or in
// the pure modules; this file only moves values between inputs, canvases
// and the controller.

import { ApiClient, ClassifyResponse, SegmentResponse } from './api.js';
import { TuningController } from './controller.js';
import { DEFAULT_PARAMS, ParamErrors, ParamValues } from './params.js';
import { drawHistogram, drawSweep, histogramRange, xToThreshold } from './plots.js';
import { STEP_PARAMS, stepSlots } from './steps.js';
import { TruthState } from './truth.js';

const $ = <T extends HTMLElement>(id: string) =>
    document.getElementById(id) as T;

const api = new ApiClient('');
let localThreshold: number | null = null;

const NUMERIC_FIELDS: (keyof ParamValues)[] = [
  'equalization_clip_limit', 'background_size', 'median_size',
  'gaussian_radius', 'min_area', 'max_area', 'min_signal',
];
const TOGGLE_FIELDS: (keyof ParamValues)[] = [
  'enable_equalization', 'enable_background_subtraction', 'enable_smoothing',
];

function renderSegment(res: SegmentResponse, fromCache: boolean): void {
  $('region-count').textContent =
      `${res.region_count} regions${fromCache ? ' (cached)' : ''}`;
  ($('overlay') as HTMLImageElement).src = res.overlay_url;
  renderSteps(res);
  drawTruthMarkers();
}

function renderSteps(res: SegmentResponse): void {
  const strip = $('steps');
  strip.replaceChildren();
  for (const slot of stepSlots(res.steps)) {
    const cell = document.createElement('div');
    cell.className = 'step';
    const caption = document.createElement('span');
    caption.textContent = slot.name;
    if (slot.url === null) {
      cell.classList.add('skipped');
      const ph = document.createElement('div');
      ph.className = 'step-skipped';
      ph.textContent = 'skipped';
      cell.append(ph, caption);
    } else {
      const img = document.createElement('img');
      img.src = slot.url;
      img.addEventListener('click', () => {
        ($('step-full') as HTMLImageElement).src = slot.url as string;
        $('step-full-name').textContent = slot.name;
        highlightParams(STEP_PARAMS[slot.name]);
      });
      cell.append(img, caption);
    }
    strip.append(cell);
  }
}

function highlightParams(names: (keyof ParamValues)[]): void {
  for (const field of [...NUMERIC_FIELDS, ...TOGGLE_FIELDS,
                       'classifier_expr' as const, 'classifier_threshold' as const]) {
    const row = document.getElementById(`row-${field}`);
    row?.classList.toggle('highlight', names.includes(field));
  }
}

function renderParamErrors(errors: ParamErrors): void {
  for (const field of [...NUMERIC_FIELDS, ...TOGGLE_FIELDS,
                       'classifier_expr' as const, 'classifier_threshold' as const]) {
    const msg = document.getElementById(`err-${field}`);
    if (msg) msg.textContent = (errors as Record<string, string>)[field] ?? '';
  }
}

function renderClassify(res: ClassifyResponse): void {
  localThreshold = res.threshold_used;
  $('threshold-readout').textContent =
      `threshold ${res.threshold_used.toPrecision(6)} (${res.threshold_mode})`;
  renderCounts(res.state_counts['1'], res.state_counts['2']);
  ($('overlay') as HTMLImageElement).src = res.overlay_url;
  redrawHistogram();
}

function renderCounts(n1: number, n2: number): void {
  $('state-counts').textContent = `state 1: ${n1}  state 2: ${n2}`;
}

function redrawHistogram(): void {
  const res = controller.classifyResult;
  const canvas = $('hist') as HTMLCanvasElement;
  const ctx = canvas.getContext('2d');
  if (!res || !ctx) return;
  drawHistogram(ctx, canvas.width, canvas.height, res.histogram, localThreshold);
}

function drawTruthMarkers(): void {
  const canvas = $('markers') as HTMLCanvasElement;
  const ctx = canvas.getContext('2d');
  const seg = controller.segmentResult;
  if (!ctx || !seg) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const colors: Record<Exclude<TruthState, null>, string> = {
    1: '#ff00ff', 2: '#00ffff',
  };
  for (const r of seg.regions) {
    const truth = controller.truth.get(r.label);
    if (truth === undefined || truth === null) continue;
    ctx.strokeStyle = colors[truth];
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(r.centroid_x, r.centroid_y, Math.sqrt(r.area / Math.PI) + 3,
            0, 2 * Math.PI);
    ctx.stroke();
  }
}

const controller = new TuningController(api, {
  onSegment: renderSegment,
  onParamErrors: renderParamErrors,
  onClassify: renderClassify,
  onLocalStates: (local, threshold) => {
    localThreshold = threshold;
    renderCounts(local.counts[1], local.counts[2]);
    $('threshold-readout').textContent =
        `threshold ${threshold.toPrecision(6)} (dragging)`;
    redrawHistogram();
  },
  onTruth: (truth, ready) => {
    ($('sweep-btn') as HTMLButtonElement).disabled = !ready;
    $('truth-count').textContent = `${truth.size} labeled`;
    drawTruthMarkers();
  },
  onSweep: res => {
    const canvas = $('sweep-plot') as HTMLCanvasElement;
    const ctx = canvas.getContext('2d');
    if (ctx) {
      drawSweep(ctx, canvas.width, canvas.height, res.thresholds,
                res.accuracies, res.optimal_threshold);
    }
    $('sweep-readout').textContent =
        `optimum ${res.optimal_threshold.toPrecision(4)} at accuracy ` +
        res.optimal_accuracy.toPrecision(4);
  },
  onError: message => {
    $('error-bar').textContent = message;
  },
});

function wireParams(): void {
  for (const field of NUMERIC_FIELDS) {
    const input = $(`in-${field}`) as HTMLInputElement;
    input.value = String(DEFAULT_PARAMS[field]);
    input.addEventListener('input', () => {
      $('error-bar').textContent = '';
      controller.setParam(field, input.value);
    });
  }
  for (const field of TOGGLE_FIELDS) {
    const input = $(`in-${field}`) as HTMLInputElement;
    input.checked = DEFAULT_PARAMS[field] as boolean;
    input.addEventListener('change', () => {
      controller.setParam(field, input.checked);
    });
  }
}

function wireUpload(): void {
  const input = $('image-file') as HTMLInputElement;
  input.addEventListener('change', async () => {
    const file = input.files?.[0];
    if (!file) return;
    try {
      const info = await controller.startSession(file);
      $('session-info').textContent =
          `session ${info.id} (${info.width}x${info.height})`;
      const markers = $('markers') as HTMLCanvasElement;
      markers.width = info.width;
      markers.height = info.height;
      void controller.segmentNow();
    } catch (err) {
      $('error-bar').textContent = `upload failed: ${String(err)}`;
    }
  });
}

function wireClassify(): void {
  const exprInput = $('in-classifier_expr') as HTMLInputElement;
  const thresholdInput = $('in-classifier_threshold') as HTMLInputElement;
  exprInput.value = DEFAULT_PARAMS.classifier_expr;
  thresholdInput.value = String(DEFAULT_PARAMS.classifier_threshold);

  $('classify-btn').addEventListener('click', () => {
    const raw = thresholdInput.value.trim();
    const threshold = raw === 'auto' ? 'auto' as const : Number(raw);
    if (threshold !== 'auto' && !Number.isFinite(threshold)) {
      $('err-classifier_threshold').textContent = 'must be a number or "auto"';
      return;
    }
    controller.setParam('classifier_expr', exprInput.value);
    controller.setParam('classifier_threshold', raw === 'auto' ? 'auto' : raw);
    void controller.classify(exprInput.value, threshold);
  });

  const hist = $('hist') as HTMLCanvasElement;
  let dragging = false;
  const dragTo = (event: MouseEvent) => {
    const res = controller.classifyResult;
    if (!res) return;
    const rect = hist.getBoundingClientRect();
    const t = xToThreshold(event.clientX - rect.left, rect.width,
                           histogramRange(res.histogram));
    controller.dragThreshold(t);
  };
  hist.addEventListener('mousedown', e => { dragging = true; dragTo(e); });
  window.addEventListener('mousemove', e => { if (dragging) dragTo(e); });
  window.addEventListener('mouseup', () => { dragging = false; });

  $('auto-btn').addEventListener('click', () => {
    void controller.classify(exprInput.value, 'auto');
  });
}

function wireTruthAndSweep(): void {
  const markers = $('markers') as HTMLCanvasElement;
  markers.addEventListener('click', event => {
    const rect = markers.getBoundingClientRect();
    const x = (event.clientX - rect.left) * (markers.width / rect.width);
    const y = (event.clientY - rect.top) * (markers.height / rect.height);
    controller.clickAt(x, y);
  });
  ($('sweep-btn') as HTMLButtonElement).addEventListener('click', () => {
    void controller.runSweep();
  });
}

function wireExport(): void {
  $('export-btn').addEventListener('click', () => {
    const blob = new Blob([controller.exportParams()],
                          { type: 'application/json' });
    const link = document.createElement('a');
    link.href = URL.createObjectURL(blob);
    link.download = 'params.json';
    link.click();
    URL.revokeObjectURL(link.href);
  });
}

wireParams();
wireUpload();
wireClassify();
wireTruthAndSweep();
wireExport();
