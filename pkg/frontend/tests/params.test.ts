import { describe, expect, it } from 'vitest';

import { DEFAULT_PARAMS, exportParamsJson, paramsKey, parseParamField,
         validateParams } from '../src/params.js';

describe('validateParams', () => {
  it('accepts the defaults', () => {
    expect(validateParams(DEFAULT_PARAMS)).toEqual({});
  });

  it('mirrors the server odd-size rule', () => {
    const errors = validateParams({ ...DEFAULT_PARAMS, background_size: 18 });
    expect(errors.background_size).toMatch(/odd/);
  });

  it('rejects min_area above max_area', () => {
    const errors = validateParams({ ...DEFAULT_PARAMS, min_area: 99, max_area: 9 });
    expect(errors.min_area).toMatch(/max_area/);
  });

  it('rejects out-of-range clip limit and signal', () => {
    expect(validateParams({ ...DEFAULT_PARAMS, equalization_clip_limit: 1.5 })
        .equalization_clip_limit).toBeTruthy();
    expect(validateParams({ ...DEFAULT_PARAMS, min_signal: -0.1 })
        .min_signal).toBeTruthy();
  });

  it('accepts "auto" threshold and rejects other strings', () => {
    expect(validateParams({ ...DEFAULT_PARAMS, classifier_threshold: 'auto' }))
        .toEqual({});
    expect(parseParamField('classifier_threshold', 'sometimes')).toBeNull();
  });
});

describe('export', () => {
  it('serializes exactly the wire fields, in schema order', () => {
    const parsed = JSON.parse(exportParamsJson(DEFAULT_PARAMS));
    expect(Object.keys(parsed)).toEqual(Object.keys(DEFAULT_PARAMS));
    expect(parsed.background_size).toBe(19);
    expect(parsed.classifier_expr).toBe('mean(R)');
  });

  it('paramsKey is stable under key insertion order', () => {
    const reordered = { ...DEFAULT_PARAMS };
    const shuffled = Object.fromEntries(Object.entries(reordered).reverse());
    expect(paramsKey(shuffled as typeof DEFAULT_PARAMS))
        .toBe(paramsKey(DEFAULT_PARAMS));
  });
});

describe('parseParamField', () => {
  it('parses numerics and flags bad input as null', () => {
    expect(parseParamField('background_size', '21')).toBe(21);
    expect(parseParamField('background_size', 'abc')).toBeNull();
    expect(parseParamField('gaussian_radius', '3.5')).toBe(3.5);
    expect(parseParamField('classifier_threshold', 'auto')).toBe('auto');
    expect(parseParamField('enable_smoothing', false)).toBe(false);
  });
});
