// Orchestration between the parameter panel, the service client and the
// render layer. Pure of DOM concerns so the interactive contract is
// testable: invalid edits never issue requests, rapid edits coalesce into
// one debounced request, reverts are served from the local cache, and
// threshold drags restate regions locally.

import { ApiClient, ApiError, ClassifyResponse, SegmentResponse,
         SweepResponse } from './api.js';
import { LocalStates, recomputeStates } from './classify.js';
import { DEFAULT_PARAMS, ParamErrors, ParamValues, exportParamsJson,
         paramsKey, parseParamField, validateParams } from './params.js';
import { LatestRequest, debounce } from './schedule.js';
import { TruthState, cycleTruth, nearestRegion, sweepEnabled,
         truthEntries } from './truth.js';

export type ControllerHooks = {
  onSegment?(res: SegmentResponse, fromCache: boolean): void;
  onParamErrors?(errors: ParamErrors): void;
  onClassify?(res: ClassifyResponse): void;
  onLocalStates?(states: LocalStates, threshold: number): void;
  onTruth?(truth: Map<number, TruthState>, sweepReady: boolean): void;
  onSweep?(res: SweepResponse): void;
  onError?(message: string): void;
};

type Timers = {
  setTimer?: typeof setTimeout;
  clearTimer?: typeof clearTimeout;
};

export class TuningController {
  params: ParamValues = { ...DEFAULT_PARAMS };
  sessionId: string | null = null;
  segmentResult: SegmentResponse | null = null;
  classifyResult: ClassifyResponse | null = null;
  truth = new Map<number, TruthState>();

  private cache = new Map<string, SegmentResponse>();
  private inflight = new LatestRequest();
  private scheduled: ReturnType<typeof debounce<[]>>;

  constructor(private api: ApiClient, private hooks: ControllerHooks = {},
              debounceMs = 300, timers: Timers = {}) {
    this.scheduled = debounce(
        () => void this.segmentNow(), debounceMs,
        timers.setTimer ?? globalThis.setTimeout.bind(globalThis),
        timers.clearTimer ?? globalThis.clearTimeout.bind(globalThis));
  }

  async startSession(image: Blob) {
    const info = await this.api.createSession(image);
    this.sessionId = info.id;
    this.cache.clear();
    this.segmentResult = null;
    this.classifyResult = null;
    this.truth.clear();
    return info;
  }

  /** Apply one edited field; returns the current validation errors. */
  setParam(name: keyof ParamValues, raw: string | boolean): ParamErrors {
    const value = parseParamField(name, raw);
    if (value === null) {
      const errors: ParamErrors = { [name]: 'not a number' };
      this.hooks.onParamErrors?.(errors);
      this.scheduled.cancel();
      return errors;
    }
    this.params = { ...this.params, [name]: value } as ParamValues;
    const errors = validateParams(this.params);
    this.hooks.onParamErrors?.(errors);
    if (Object.keys(errors).length > 0) {
      this.scheduled.cancel();  // invalid entry: inline message, no request
      return errors;
    }
    if (this.sessionId === null) return errors;

    const cached = this.cache.get(paramsKey(this.params));
    if (cached !== undefined) {
      this.scheduled.cancel();  // revert to a known result: no recompute
      this.applySegment(cached, true);
      return errors;
    }
    this.scheduled();
    return errors;
  }

  async segmentNow(): Promise<SegmentResponse | null> {
    if (this.sessionId === null) return null;
    const sid = this.sessionId;
    const params = this.params;
    try {
      const res = await this.inflight.run(
          signal => this.api.segment(sid, params, signal));
      if (res !== null) {
        this.cache.set(paramsKey(params), res);
        this.applySegment(res, false);
      }
      return res;
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        this.hooks.onParamErrors?.(err.fieldErrors());
      } else {
        // keep the last good overlay; just surface the failure
        this.hooks.onError?.(String(err));
      }
      return null;
    }
  }

  private applySegment(res: SegmentResponse, fromCache: boolean) {
    const changed = this.segmentResult?.params_key !== res.params_key;
    this.segmentResult = res;
    if (changed) {
      // labels renumber under new params; classification and truth are stale
      this.classifyResult = null;
      this.truth.clear();
      this.hooks.onTruth?.(this.truth, false);
    }
    this.hooks.onSegment?.(res, fromCache);
  }

  async classify(expr: string, threshold: number | 'auto') {
    if (this.sessionId === null) return null;
    try {
      const res = await this.api.classify(this.sessionId, expr, threshold);
      this.classifyResult = res;
      this.hooks.onClassify?.(res);
      return res;
    } catch (err) {
      if (err instanceof ApiError) {
        const detail = err.detail as { error?: string; position?: number };
        if (detail && typeof detail.error === 'string') {
          this.hooks.onError?.(detail.error);
          return null;
        }
        this.hooks.onError?.(JSON.stringify(err.detail));
        return null;
      }
      this.hooks.onError?.(String(err));
      return null;
    }
  }

  /** Threshold drag: restyle from cached f values, no server round trip. */
  dragThreshold(threshold: number): LocalStates | null {
    if (this.classifyResult === null) return null;
    const local = recomputeStates(this.classifyResult.f_values, threshold);
    this.hooks.onLocalStates?.(local, threshold);
    return local;
  }

  /** Click on the overlay: cycle the nearest region's manual truth state. */
  clickAt(x: number, y: number): TruthState | undefined {
    if (this.segmentResult === null) return undefined;
    const region = nearestRegion(this.segmentResult.regions, x, y);
    if (region === null) return undefined;
    const next = cycleTruth(this.truth.get(region.label) ?? null);
    if (next === null) this.truth.delete(region.label);
    else this.truth.set(region.label, next);
    this.hooks.onTruth?.(this.truth, sweepEnabled(this.truth));
    return next;
  }

  async runSweep(lo = 0, hi = 2, steps = 201) {
    if (this.sessionId === null || !sweepEnabled(this.truth)) return null;
    try {
      await this.api.uploadTruth(this.sessionId, truthEntries(this.truth));
      const res = await this.api.sweep(this.sessionId, lo, hi, steps);
      this.hooks.onSweep?.(res);
      return res;
    } catch (err) {
      this.hooks.onError?.(String(err));
      return null;
    }
  }

  exportParams(): string {
    return exportParamsJson(this.params);
  }
}
