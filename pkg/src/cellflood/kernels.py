"""Backend selection for the flooding kernels.

The compiled extension is used when importable; otherwise the pure-Python
implementation takes over.  Setting the environment variable
``CELLFLOOD_PURE_PYTHON=1`` forces the fallback (useful for benchmarking
and for verifying backend equivalence).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

__all__ = ["BACKEND", "regional_minima", "flood"]

_impl = _kernels_py
BACKEND = "python"

if not os.environ.get("CELLFLOOD_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def regional_minima(elev: np.ndarray) -> tuple[np.ndarray, int]:
    """Label 8-connected regional-minima plateaus 1..n (0 elsewhere)."""
    elev = np.ascontiguousarray(elev, dtype=np.float64)
    labels, n = _impl.regional_minima(elev)
    return labels, n


def flood(elev: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Flood ``elev`` from ``seeds``; returns int32 labels, ridges as 0."""
    elev = np.ascontiguousarray(elev, dtype=np.float64)
    seeds = np.ascontiguousarray(seeds, dtype=np.int32)
    if seeds.shape != elev.shape:
        raise ValueError("seeds and elevation must have the same shape")
    return _impl.flood(elev, seeds)
