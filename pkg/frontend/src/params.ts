// Pipeline parameter schema: the exact JSON field names are the wire format
// shared with the server and the CLI's --config files.

export type ParamValues = {
  equalization_clip_limit: number;
  background_size: number;
  median_size: number;
  gaussian_radius: number;
  min_area: number;
  max_area: number;
  min_signal: number;
  classifier_expr: string;
  classifier_threshold: number | 'auto';
  enable_equalization: boolean;
  enable_background_subtraction: boolean;
  enable_smoothing: boolean;
};

export const DEFAULT_PARAMS: ParamValues = {
  equalization_clip_limit: 0.01,
  background_size: 19,
  median_size: 7,
  gaussian_radius: 7,
  min_area: 35,
  max_area: 2000,
  min_signal: 0.2,
  classifier_expr: 'mean(R)',
  classifier_threshold: 9 / 255,
  enable_equalization: true,
  enable_background_subtraction: true,
  enable_smoothing: true,
};

export type ParamErrors = Partial<Record<keyof ParamValues, string>>;

const isInt = (v: number) => Number.isInteger(v);

// Client-side mirror of the server's field validation, so obviously bad
// entries are reported inline without a request.
export function validateParams(p: ParamValues): ParamErrors {
  const errors: ParamErrors = {};
  if (!(p.equalization_clip_limit >= 0 && p.equalization_clip_limit <= 1)) {
    errors.equalization_clip_limit = 'must be in [0, 1]';
  }
  if (!isInt(p.background_size) || p.background_size < 3 || p.background_size % 2 === 0) {
    errors.background_size = 'must be an odd integer >= 3';
  }
  if (!isInt(p.median_size) || p.median_size < 1 || p.median_size % 2 === 0) {
    errors.median_size = 'must be an odd integer >= 1';
  }
  if (!(p.gaussian_radius > 0)) {
    errors.gaussian_radius = 'must be positive';
  }
  if (!isInt(p.min_area) || p.min_area < 0) {
    errors.min_area = 'must be a non-negative integer';
  }
  if (!isInt(p.max_area) || p.max_area < 1) {
    errors.max_area = 'must be a positive integer';
  }
  if (!errors.min_area && !errors.max_area && p.min_area > p.max_area) {
    errors.min_area = 'must not exceed max_area';
  }
  if (!(p.min_signal >= 0 && p.min_signal <= 1)) {
    errors.min_signal = 'must be in [0, 1]';
  }
  if (p.classifier_expr.trim() === '') {
    errors.classifier_expr = 'must not be empty';
  }
  if (p.classifier_threshold !== 'auto'
      && !Number.isFinite(p.classifier_threshold)) {
    errors.classifier_threshold = 'must be a number or "auto"';
  }
  return errors;
}

// Canonical cache key: field order is fixed by the schema above, so two
// equal parameter sets always serialize identically.
export function paramsKey(p: ParamValues): string {
  return JSON.stringify(p, Object.keys(DEFAULT_PARAMS));
}

// The exported file is byte-compatible with `cellflood segment --config`.
export function exportParamsJson(p: ParamValues): string {
  return JSON.stringify(p, Object.keys(DEFAULT_PARAMS), 2) + '\n';
}

export function parseParamField(
    name: keyof ParamValues, raw: string | boolean): ParamValues[keyof ParamValues] | null {
  if (typeof raw === 'boolean') return raw;
  const text = raw.trim();
  switch (name) {
    case 'classifier_expr':
      return text;
    case 'classifier_threshold': {
      if (text === 'auto') return 'auto';
      const v = Number(text);
      return Number.isFinite(v) ? v : null;
    }
    case 'enable_equalization':
    case 'enable_background_subtraction':
    case 'enable_smoothing':
      return text === 'true';
    default: {
      if (text === '') return null;
      const v = Number(text);
      return Number.isFinite(v) ? v : null;
    }
  }
}
