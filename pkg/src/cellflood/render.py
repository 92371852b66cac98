"""PNG rendering of results: region outlines over the raw image, two-color
classification overlays, and step-image encoding for the viewer.
"""

from __future__ import annotations

import colorsys
import io

import numpy as np
from PIL import Image

from .core import GrayImage, LabelMatrix, RgbImage

__all__ = [
    "boundary_mask",
    "render_overlay",
    "render_classification_overlay",
    "render_labels",
    "encode_png",
    "step_to_png",
]

GRAY_OUTLINE = (180, 180, 180)
STATE_COLORS = {1: (255, 0, 255), 2: (0, 255, 255)}  # magenta / cyan


def boundary_mask(lm: LabelMatrix) -> np.ndarray:
    """Pixels of labeled regions bordering a different label or background."""
    lab = lm.labels
    edge = np.zeros_like(lab, dtype=bool)
    inner = lab > 0
    for axis, shift in ((0, 1), (0, -1), (1, 1), (1, -1)):
        rolled = np.roll(lab, shift, axis=axis)
        # roll wraps around; the wrapped row/column is fixed below
        diff = lab != rolled
        if axis == 0:
            if shift == 1:
                diff[0, :] = True
            else:
                diff[-1, :] = True
        else:
            if shift == 1:
                diff[:, 0] = True
            else:
                diff[:, -1] = True
        edge |= diff
    return edge & inner


def _base_rgb(img: RgbImage) -> np.ndarray:
    return np.rint(img.data * 255.0).astype(np.uint8).copy()


def render_overlay(img: RgbImage, lm: LabelMatrix) -> np.ndarray:
    """Raw image with region outlines drawn in gray; returns uint8 HxWx3."""
    out = _base_rgb(img)
    out[boundary_mask(lm)] = GRAY_OUTLINE
    return out


def render_classification_overlay(img: RgbImage, lm: LabelMatrix,
                                  states: dict[int, int]) -> np.ndarray:
    """Raw image with state-1 regions outlined magenta and state-2 cyan."""
    out = _base_rgb(img)
    edges = boundary_mask(lm)
    lab = lm.labels
    for state, color in STATE_COLORS.items():
        state_labels = {l for l, s in states.items() if s == state}
        if not state_labels:
            continue
        sel = np.isin(lab, list(state_labels)) & edges
        out[sel] = color
    return out


def render_labels(lm: LabelMatrix) -> np.ndarray:
    """Color each label with a stable golden-angle palette; background black."""
    n = lm.n_objects
    palette = np.zeros((n + 1, 3), dtype=np.uint8)
    for i in range(1, n + 1):
        hue = (i * 0.61803398875) % 1.0
        r, g, b = colorsys.hsv_to_rgb(hue, 0.75, 1.0)
        palette[i] = (int(r * 255), int(g * 255), int(b * 255))
    return palette[lm.labels]


def encode_png(array: np.ndarray) -> bytes:
    """Encode a uint8 grayscale or RGB array as PNG bytes."""
    mode = "L" if array.ndim == 2 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(array, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def step_to_png(step: GrayImage | LabelMatrix) -> bytes:
    """Render one pipeline intermediate as PNG bytes."""
    if isinstance(step, LabelMatrix):
        return encode_png(render_labels(step))
    return encode_png(np.rint(step.data * 255.0).astype(np.uint8))
