"""Per-object statistics from a label matrix, and centroid binning for the
cell-count comparison workflow.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .core import LabelMatrix, Region, RegionTable, RgbImage

__all__ = ["extract_regions", "bin_centroids", "BinnedCounts"]


def extract_regions(lm: LabelMatrix, raw: RgbImage) -> RegionTable:
    """Build the region table: centroid, area and per-channel means per label.

    Centroids are unweighted means of pixel coordinates, x right and y down
    with the origin at the top-left pixel center.  The per-channel pixel
    lists are kept on each region for later classification.
    """
    if (raw.height, raw.width) != (lm.height, lm.width):
        raise ValueError("label matrix and image dimensions differ")
    n = lm.n_objects
    flat = lm.labels.ravel()
    order = np.argsort(flat, kind="stable")
    sorted_labels = flat[order]
    starts = np.searchsorted(sorted_labels, np.arange(1, n + 2))

    h, w = lm.height, lm.width
    xs = (np.arange(h * w) % w).astype(np.float64)
    ys = (np.arange(h * w) // w).astype(np.float64)
    channels = raw.data.reshape(-1, 3)

    regions = []
    for label in range(1, n + 1):
        idx = order[starts[label - 1]:starts[label]]
        idx.sort()
        px = channels[idx]
        regions.append(Region(
            label=label,
            centroid_x=float(xs[idx].mean()),
            centroid_y=float(ys[idx].mean()),
            area=int(idx.size),
            mean_r=float(px[:, 0].mean()),
            mean_g=float(px[:, 1].mean()),
            mean_b=float(px[:, 2].mean()),
            pixel_indices=idx,
            pixels_r=px[:, 0].copy(),
            pixels_g=px[:, 1].copy(),
            pixels_b=px[:, 2].copy(),
        ))
    return RegionTable(regions)


class BinnedCounts(NamedTuple):
    counts: np.ndarray
    dropped: int


def bin_centroids(centroids: Sequence[tuple[float, float]], axis: str,
                  n_bins: int, extent: tuple[float, float]) -> BinnedCounts:
    """Count centroids in equal-width bins along one axis.

    Bins cover [lo, hi) except the last, which also includes hi; centroids
    outside the extent are dropped and reported in the result.
    """
    if axis not in ("x", "y"):
        raise ValueError('axis must be "x" or "y"')
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    lo, hi = extent
    if not lo < hi:
        raise ValueError("extent must satisfy lo < hi")

    coords = np.array([c[0] if axis == "x" else c[1] for c in centroids],
                      dtype=np.float64)
    inside = (coords >= lo) & (coords <= hi)
    dropped = int((~inside).sum())
    kept = coords[inside]
    idx = np.minimum(((kept - lo) / (hi - lo) * n_bins).astype(np.int64), n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    return BinnedCounts(counts=counts, dropped=dropped)
