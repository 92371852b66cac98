// Typed client for the tuning service. All numeric results shown in the UI
// come from these response payloads; the client never computes image math.

import { ParamValues } from './params.js';

export type SessionInfo = { id: string; width: number; height: number };

export type RegionSummary = {
  label: number;
  centroid_x: number;
  centroid_y: number;
  area: number;
  mean_R: number;
  mean_G: number;
  mean_B: number;
};

export type StepInfo = { name: string; url: string };

export type SegmentResponse = {
  params_key: string;
  region_count: number;
  regions: RegionSummary[];
  overlay_url: string;
  steps: StepInfo[];
};

export type ClassifyResponse = {
  params_key: string;
  f_values: Record<string, number>;
  states: Record<string, number>;
  state_counts: { '1': number; '2': number };
  threshold_used: number;
  threshold_mode: 'manual' | 'otsu';
  histogram: { edges: number[]; counts: number[] };
  nonfinite_labels: number[];
  overlay_url: string;
};

export type SweepResponse = {
  thresholds: number[];
  accuracies: number[];
  optimal_threshold: number;
  optimal_accuracy: number;
  n_plateaus: number;
};

export class ApiError extends Error {
  constructor(public status: number, public detail: unknown) {
    super(`HTTP ${status}`);
  }

  fieldErrors(): Record<string, string> {
    const d = this.detail as { errors?: Record<string, string> } | undefined;
    return d && d.errors ? d.errors : {};
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(private base = '', private fetchImpl: FetchLike =
      (input, init) => fetch(input, init)) {}

  private async request<T>(path: string, init: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.base + path, init);
    let body: unknown = null;
    try {
      body = await res.json();
    } catch {
      body = null;
    }
    if (!res.ok) {
      const detail = (body as { detail?: unknown } | null)?.detail ?? body;
      throw new ApiError(res.status, detail);
    }
    return body as T;
  }

  createSession(image: Blob): Promise<SessionInfo> {
    return this.request('/api/session', { method: 'POST', body: image });
  }

  segment(sessionId: string, params: ParamValues,
          signal?: AbortSignal): Promise<SegmentResponse> {
    return this.request(`/api/session/${sessionId}/segment`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(params),
      signal,
    });
  }

  classify(sessionId: string, expr: string, threshold: number | 'auto',
           signal?: AbortSignal): Promise<ClassifyResponse> {
    return this.request(`/api/session/${sessionId}/classify`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ expr, threshold }),
      signal,
    });
  }

  uploadTruth(sessionId: string,
              states: { label: number; state: number }[]): Promise<unknown> {
    return this.request(`/api/session/${sessionId}/ground-truth`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ states }),
    });
  }

  sweep(sessionId: string, lo: number, hi: number,
        steps: number): Promise<SweepResponse> {
    return this.request(`/api/session/${sessionId}/sweep`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ lo, hi, steps }),
    });
  }
}
