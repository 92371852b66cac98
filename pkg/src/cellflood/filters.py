"""Filtering steps that turn a raw color image into the elevation map
used for segmentation: grayscale conversion, contrast-limited adaptive
histogram equalization, median-based background subtraction, and
median + Gaussian smoothing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import GrayImage, PipelineParams, RgbImage

__all__ = [
    "to_grayscale",
    "equalize_adaptive",
    "subtract_background",
    "median_smooth",
    "gaussian_smooth",
    "run_filter_pipeline",
    "FilterResult",
]

# ITU-R BT.601 luma weights; chosen to match the conversion used by common
# image toolboxes so parameter sets transfer between implementations.
GRAY_WEIGHTS = (0.2989, 0.5870, 0.1140)

# CLAHE geometry is fixed; only the clip limit is a user parameter.
_TILE_GRID = 8
_HIST_BINS = 256


def _clip01(arr: np.ndarray) -> np.ndarray:
    return np.clip(arr, 0.0, 1.0, out=arr)


def to_grayscale(img: RgbImage) -> GrayImage:
    """Weighted channel sum: 0.2989 R + 0.5870 G + 0.1140 B."""
    r, g, b = GRAY_WEIGHTS
    gray = img.data[:, :, 0] * r + img.data[:, :, 1] * g + img.data[:, :, 2] * b
    return GrayImage(_clip01(gray))


def _tile_edges(extent: int, n_tiles: int) -> np.ndarray:
    return np.linspace(0, extent, n_tiles + 1).round().astype(np.int64)


def _equalize_lut(values: np.ndarray, clip_limit: float) -> np.ndarray:
    """Equalization lookup table (bin index -> output level) for one tile.

    The clip count interpolates between the mean bin content (clip_limit 0,
    strongest limiting) and the tile pixel count (clip_limit 1, no
    limiting); clipped excess is redistributed uniformly in one pass.
    """
    n = values.size
    hist = np.bincount(values, minlength=_HIST_BINS).astype(np.float64)
    min_clip = math.ceil(n / _HIST_BINS)
    clip = min_clip + round(clip_limit * (n - min_clip))
    excess = np.maximum(hist - clip, 0.0).sum()
    if excess > 0:
        np.minimum(hist, clip, out=hist)
        hist += excess / _HIST_BINS
    cdf = np.cumsum(hist) / n
    return cdf


def equalize_adaptive(img: GrayImage, clip_limit: float) -> GrayImage:
    """Contrast-limited adaptive histogram equalization.

    Uses an 8x8 tile grid with 256 histogram bins; per-pixel output is the
    bilinear blend of the four surrounding tile mappings. Images too small
    to hold 2x2-pixel tiles fall back to global equalization (with a
    warning).
    """
    if not 0.0 <= clip_limit <= 1.0:
        raise ValueError("clip_limit must lie in [0, 1]")
    data = img.data
    h, w = data.shape
    bins = np.minimum((data * _HIST_BINS).astype(np.int64), _HIST_BINS - 1)

    if h < 2 * _TILE_GRID or w < 2 * _TILE_GRID:
        warnings.warn(
            f"image {w}x{h} is too small for an {_TILE_GRID}x{_TILE_GRID} tile "
            "grid; applying global equalization", stacklevel=2)
        lut = _equalize_lut(bins.ravel(), clip_limit)
        return GrayImage(_clip01(lut[bins]))

    row_edges = _tile_edges(h, _TILE_GRID)
    col_edges = _tile_edges(w, _TILE_GRID)
    luts = np.empty((_TILE_GRID, _TILE_GRID, _HIST_BINS))
    for ty in range(_TILE_GRID):
        for tx in range(_TILE_GRID):
            tile = bins[row_edges[ty]:row_edges[ty + 1],
                        col_edges[tx]:col_edges[tx + 1]]
            luts[ty, tx] = _equalize_lut(tile.ravel(), clip_limit)

    # fractional tile coordinates of every pixel relative to tile centers
    centers_y = (row_edges[:-1] + row_edges[1:] - 1) / 2.0
    centers_x = (col_edges[:-1] + col_edges[1:] - 1) / 2.0
    gy = np.interp(np.arange(h), centers_y, np.arange(_TILE_GRID))
    gx = np.interp(np.arange(w), centers_x, np.arange(_TILE_GRID))
    y0 = np.clip(np.floor(gy).astype(np.int64), 0, _TILE_GRID - 2)
    x0 = np.clip(np.floor(gx).astype(np.int64), 0, _TILE_GRID - 2)
    fy = (gy - y0)[:, None]
    fx = (gx - x0)[None, :]

    flat_luts = luts.reshape(-1, _HIST_BINS)

    def sample(ty, tx):
        idx = (ty[:, None] * _TILE_GRID + tx[None, :]) * _HIST_BINS + bins
        return flat_luts.ravel()[idx]

    out = ((1 - fy) * (1 - fx) * sample(y0, x0)
           + (1 - fy) * fx * sample(y0, x0 + 1)
           + fy * (1 - fx) * sample(y0 + 1, x0)
           + fy * fx * sample(y0 + 1, x0 + 1))
    return GrayImage(_clip01(out))


def subtract_background(img: GrayImage, background_size: int) -> GrayImage:
    """Median-filter background estimate subtracted from the image.

    ``background_size`` is the square window diameter; it should be odd and
    larger than any object of interest (not enforced). The result is clamped
    to [0, 1] so the intensity scale is preserved.
    """
    if background_size < 3 or background_size % 2 == 0:
        raise ValueError("background_size must be an odd integer >= 3")
    if background_size > img.height and background_size > img.width:
        raise ValueError(
            f"background_size {background_size} exceeds both image dimensions "
            f"({img.width}x{img.height})")
    background = ndimage.median_filter(img.data, size=background_size, mode="nearest")
    return GrayImage(_clip01(img.data - background))


def estimate_background(img: GrayImage, background_size: int) -> GrayImage:
    """The median-filter background image itself (for step-wise display)."""
    if background_size < 3 or background_size % 2 == 0:
        raise ValueError("background_size must be an odd integer >= 3")
    return GrayImage(ndimage.median_filter(img.data, size=background_size,
                                           mode="nearest"))


def median_smooth(img: GrayImage, median_size: int) -> GrayImage:
    """Square-window median with replicate padding; size 1 is the identity."""
    if median_size < 1 or median_size % 2 == 0:
        raise ValueError("median_size must be an odd integer >= 1")
    if median_size == 1:
        return img
    return GrayImage(ndimage.median_filter(img.data, size=median_size,
                                           mode="nearest"))


def _gaussian_kernel_1d(sigma: float) -> np.ndarray:
    half = math.ceil(2.0 * sigma)
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_smooth(img: GrayImage, radius: float) -> GrayImage:
    """Normalized Gaussian blur with sigma = radius / 2.

    The kernel half-width is ceil(2 sigma) and borders replicate, so a
    constant image is unchanged and total intensity is preserved away from
    the borders.
    """
    if radius <= 0:
        raise ValueError("gaussian radius must be positive")
    kernel = _gaussian_kernel_1d(radius / 2.0)
    out = ndimage.correlate1d(img.data, kernel, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="nearest")
    return GrayImage(_clip01(out))


@dataclass(frozen=True)
class FilterResult:
    """Filtered image plus each intermediate, keyed by step name."""

    filtered: GrayImage
    steps: dict[str, GrayImage]


def run_filter_pipeline(img: RgbImage, p: PipelineParams) -> FilterResult:
    """Grayscale conversion followed by the optional equalization,
    background-subtraction and smoothing steps, per the enable flags.

    ``steps`` holds, in order: "grayscale", then "equalized", then
    "background" and "background_subtracted", then "smoothed", for
    whichever steps ran.
    """
    steps: dict[str, GrayImage] = {}
    gray = to_grayscale(img)
    steps["grayscale"] = gray

    current = gray
    if p.enable_equalization:
        current = equalize_adaptive(current, p.equalization_clip_limit)
        steps["equalized"] = current
    if p.enable_background_subtraction:
        steps["background"] = estimate_background(current, p.background_size)
        current = GrayImage(_clip01(current.data - steps["background"].data))
        steps["background_subtracted"] = current
    if p.enable_smoothing:
        current = median_smooth(current, p.median_size)
        current = gaussian_smooth(current, p.gaussian_radius)
        steps["smoothed"] = current
    return FilterResult(filtered=current, steps=steps)
