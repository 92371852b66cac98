"""Benchmark the compiled flooding kernels against the pure-Python fallback.

Run as ``python -m cellflood.bench``.  Both backends are timed on the same
synthetic images and their outputs are cross-checked for equality.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels_py, kernels
from .filters import run_filter_pipeline
from .synth import gaussian_blobs
from .watershed import compute_background_mask, invert_and_enforce, otsu_two_level


def _elevation(size: int, seed: int) -> np.ndarray:
    sample = gaussian_blobs(width=size, height=size, n_blobs=max(6, size // 24),
                            seed=seed)
    from .core import PipelineParams
    params = PipelineParams(background_size=31, max_area=10**6)
    filtered = run_filter_pipeline(sample.image, params).filtered
    levels = otsu_two_level(filtered)
    mask = compute_background_mask(filtered, levels)
    return invert_and_enforce(filtered, mask).data


def _time(fn, *args, repeats: int = 3) -> tuple[float, object]:
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)

    compiled = kernels._impl if kernels.BACKEND == "cython" else None
    if compiled is None:
        print("compiled kernels unavailable; timing the pure-Python backend only")

    print(f"{'size':>6} {'stage':<16} {'python':>10} {'cython':>10} {'speedup':>8}")
    for size in args.sizes:
        elev = _elevation(size, seed=size)
        t_py_min, (seeds_py, n_py) = _time(_kernels_py.regional_minima, elev,
                                           repeats=args.repeats)
        t_py_fl, out_py = _time(_kernels_py.flood, elev, seeds_py,
                                repeats=args.repeats)
        if compiled is not None:
            t_cy_min, (seeds_cy, n_cy) = _time(compiled.regional_minima, elev,
                                               repeats=args.repeats)
            t_cy_fl, out_cy = _time(compiled.flood, elev, seeds_cy,
                                    repeats=args.repeats)
            assert n_py == n_cy and np.array_equal(seeds_py, seeds_cy), \
                "backend minima disagree"
            assert np.array_equal(out_py, out_cy), "backend floods disagree"
            print(f"{size:>6} {'regional_minima':<16} {t_py_min:>9.4f}s "
                  f"{t_cy_min:>9.4f}s {t_py_min / t_cy_min:>7.1f}x")
            print(f"{size:>6} {'flood':<16} {t_py_fl:>9.4f}s "
                  f"{t_cy_fl:>9.4f}s {t_py_fl / t_cy_fl:>7.1f}x")
        else:
            print(f"{size:>6} {'regional_minima':<16} {t_py_min:>9.4f}s {'-':>10} {'-':>8}")
            print(f"{size:>6} {'flood':<16} {t_py_fl:>9.4f}s {'-':>10} {'-':>8}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
