"""Background-enforced watershed segmentation.

The filtered image is split into three intensity classes with a two-level
Otsu threshold; the darkest class becomes the enforced background.  The
image is inverted so objects are basins, background pixels are dropped to
the global minimum elevation, and priority-queue flooding assigns one label
per regional minimum.  Basins touching the background and objects outside
the realistic size/brightness limits are discarded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from ._otsu import N_BINS, best_double_cut, histogram_bins
from .core import GrayImage, LabelMatrix, PipelineParams, RgbImage
from .filters import run_filter_pipeline

__all__ = [
    "OtsuLevels",
    "BackgroundMask",
    "SegmentResult",
    "otsu_two_level",
    "compute_background_mask",
    "invert_and_enforce",
    "watershed_flood",
    "discard_background_regions",
    "apply_limits",
    "segment",
]


@dataclass(frozen=True)
class OtsuLevels:
    """Pair of thresholds splitting intensities into three classes."""

    t1: float
    t2: float

    def __post_init__(self):
        if not self.t1 < self.t2:
            raise ValueError("OtsuLevels requires t1 < t2")


@dataclass(frozen=True)
class BackgroundMask:
    """Boolean mask of enforced-background pixels (the darkest Otsu class)."""

    mask: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.mask, dtype=bool))
        if arr.ndim != 2:
            raise ValueError("mask must have shape (height, width)")
        object.__setattr__(self, "mask", arr)

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def width(self) -> int:
        return self.mask.shape[1]


def otsu_two_level(img: GrayImage) -> OtsuLevels:
    """Two-level Otsu thresholds of a [0, 1] image over a 256-bin histogram.

    Exhaustively maximizes the between-class variance of the three classes;
    ties resolve to the smallest (t1, t2) lexicographically.
    """
    data = img.data
    if np.unique(data).size < 3:
        raise ValueError(
            "two-level Otsu needs at least 3 distinct intensity values; "
            "treat the image as all-background or all-foreground instead")
    counts = histogram_bins(data, 0.0, 1.0)
    k1, k2 = best_double_cut(counts)
    return OtsuLevels(t1=(k1 + 1) / N_BINS, t2=(k2 + 1) / N_BINS)


def compute_background_mask(img: GrayImage, levels: OtsuLevels) -> BackgroundMask:
    """Pixels strictly below t1 belong to the watershed background."""
    return BackgroundMask(img.data < levels.t1)


def invert_and_enforce(img: GrayImage, mask: BackgroundMask) -> GrayImage:
    """Invert so objects are dark, then drop background pixels to elevation 0."""
    if mask.mask.shape != img.data.shape:
        raise ValueError("mask and image dimensions differ")
    out = 1.0 - img.data
    out[mask.mask] = 0.0
    return GrayImage(out)


def watershed_flood(elev: GrayImage) -> LabelMatrix:
    """Flood the elevation image from its regional minima.

    One label per 8-connected regional minimum, numbered in raster order of
    each minimum's first pixel; pixels reached by two different fronts at
    once become ridge pixels and stay 0.
    """
    seeds, _ = kernels.regional_minima(elev.data)
    labels = kernels.flood(elev.data, seeds)
    return LabelMatrix(labels)


def _renumber(labels: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Zero out labels not in ``keep``; renumber survivors 1..n in raster
    order of first occurrence."""
    flat = labels.ravel()
    present, first_idx = np.unique(flat, return_index=True)
    mapping = np.zeros(int(labels.max()) + 1 if labels.size else 1, dtype=np.int32)
    survivors = [(int(i), int(v)) for v, i in zip(present, first_idx)
                 if v > 0 and keep[int(v)]]
    survivors.sort()
    for new, (_, old) in enumerate(survivors, start=1):
        mapping[old] = new
    return mapping[labels]


def discard_background_regions(lm: LabelMatrix, mask: BackgroundMask) -> LabelMatrix:
    """Remove every region that contains at least one background pixel.

    Ridge pixels stay 0; surviving labels are renumbered contiguously.
    """
    if mask.mask.shape != lm.labels.shape:
        raise ValueError("mask and label matrix dimensions differ")
    n = lm.n_objects
    keep = np.ones(n + 1, dtype=bool)
    touched = np.unique(lm.labels[mask.mask])
    keep[touched[touched > 0]] = False
    return LabelMatrix(_renumber(lm.labels, keep))


def apply_limits(lm: LabelMatrix, raw_gray: GrayImage, min_area: int,
                 max_area: int, min_signal: float) -> LabelMatrix:
    """Drop regions outside [min_area, max_area] px^2 or with mean raw-image
    intensity below min_signal; renumber survivors contiguously.

    ``raw_gray`` must be the unfiltered grayscale image: the signal limit is
    defined on the raw intensity scale, not the filtered one.
    """
    if raw_gray.data.shape != lm.labels.shape:
        raise ValueError("raw image and label matrix dimensions differ")
    n = lm.n_objects
    if n == 0:
        return lm
    flat = lm.labels.ravel()
    areas = np.bincount(flat, minlength=n + 1)
    sums = np.bincount(flat, weights=raw_gray.data.ravel(), minlength=n + 1)
    with np.errstate(invalid="ignore"):
        means = np.where(areas > 0, sums / np.maximum(areas, 1), 0.0)
    keep = (areas >= min_area) & (areas <= max_area) & (means >= min_signal)
    keep[0] = False
    return LabelMatrix(_renumber(lm.labels, keep))


@dataclass(frozen=True)
class SegmentResult:
    """Final label matrix plus every intermediate for step-wise display."""

    labels: LabelMatrix
    levels: OtsuLevels | None
    background: BackgroundMask
    raw_gray: GrayImage
    #: step name -> GrayImage or LabelMatrix, in pipeline order
    intermediates: dict


def _degenerate_background(img: GrayImage) -> BackgroundMask:
    """Background mask for images with fewer than 3 distinct values.

    A constant image is all background; with two values the darker group is
    background, mirroring a single-level threshold.
    """
    values = np.unique(img.data)
    if values.size == 1:
        return BackgroundMask(np.ones_like(img.data, dtype=bool))
    return BackgroundMask(img.data < values[-1])


def segment(img: RgbImage, p: PipelineParams) -> SegmentResult:
    """Run the full filtering + watershed pipeline on a color image."""
    filt = run_filter_pipeline(img, p)
    raw_gray = filt.steps["grayscale"]

    if np.unique(filt.filtered.data).size < 3:
        levels = None
        mask = _degenerate_background(filt.filtered)
    else:
        levels = otsu_two_level(filt.filtered)
        mask = compute_background_mask(filt.filtered, levels)
    elevation = invert_and_enforce(filt.filtered, mask)
    flooded = watershed_flood(elevation)
    kept = discard_background_regions(flooded, mask)
    final = apply_limits(kept, raw_gray, p.min_area, p.max_area, p.min_signal)

    intermediates: dict = dict(filt.steps)
    intermediates["background_mask"] = GrayImage(mask.mask.astype(np.float64))
    intermediates["inverted"] = GrayImage(1.0 - filt.filtered.data)
    intermediates["enforced"] = elevation
    intermediates["watershed_raw"] = flooded
    intermediates["final"] = final
    return SegmentResult(labels=final, levels=levels, background=mask,
                         raw_gray=raw_gray, intermediates=intermediates)
