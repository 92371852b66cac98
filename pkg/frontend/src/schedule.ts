// Debounced, latest-wins scheduling for segment requests: edits during the
// debounce window coalesce, and a newer request aborts the in-flight one.

export type Cancel = () => void;

export function debounce<A extends unknown[]>(
    fn: (...args: A) => void, ms: number,
    setTimer = globalThis.setTimeout.bind(globalThis),
    clearTimer = globalThis.clearTimeout.bind(globalThis)) {
  let handle: ReturnType<typeof setTimeout> | null = null;
  const wrapped = (...args: A) => {
    if (handle !== null) clearTimer(handle);
    handle = setTimer(() => {
      handle = null;
      fn(...args);
    }, ms);
  };
  wrapped.cancel = () => {
    if (handle !== null) clearTimer(handle);
    handle = null;
  };
  return wrapped;
}

// At most one request in flight; starting a new one aborts its predecessor.
export class LatestRequest {
  private controller: AbortController | null = null;

  async run<T>(fn: (signal: AbortSignal) => Promise<T>): Promise<T | null> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    try {
      return await fn(controller.signal);
    } catch (err) {
      if (controller.signal.aborted) return null;  // superseded, not an error
      throw err;
    } finally {
      if (this.controller === controller) this.controller = null;
    }
  }
}
