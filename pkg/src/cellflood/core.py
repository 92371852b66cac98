"""Core raster types, normalization, file I/O and the shared parameter schema.

All images are stored as float64 intensities normalized to [0, 1] regardless
of the source bit depth; the original depth is kept so results can be
reported on the familiar 0-255 display scale.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

__all__ = [
    "RgbImage",
    "GrayImage",
    "LabelMatrix",
    "PipelineParams",
    "Region",
    "RegionTable",
    "ParamError",
    "load_image",
    "decode_image",
    "save_image",
    "save_gray_image",
    "save_label_matrix",
    "load_label_matrix",
    "export_region_table",
    "read_region_table",
]

REGION_CSV_HEADER = [
    "label",
    "centroid_x",
    "centroid_y",
    "area",
    "mean_R",
    "mean_G",
    "mean_B",
    "f_value",
    "state",
]


class ParamError(ValueError):
    """Raised when a parameter set violates its constraints.

    ``errors`` maps field name to a human-readable message so callers (CLI
    usage errors, HTTP 422 bodies) can report per-field problems.
    """

    def __init__(self, errors: dict[str, str]):
        self.errors = dict(errors)
        super().__init__("; ".join(f"{k}: {v}" for k, v in sorted(errors.items())))


def _check_unit_range(data: np.ndarray, what: str) -> None:
    if data.size and (data.min() < 0.0 or data.max() > 1.0):
        raise ValueError(f"{what} intensities must lie in [0, 1]")


@dataclass(frozen=True)
class RgbImage:
    """Three-channel raster, channels ordered red, green, blue.

    ``data`` has shape (height, width, 3). Grayscale sources are represented
    with all three channels equal.
    """

    data: np.ndarray
    source_bit_depth: int = 8

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError("RgbImage data must have shape (height, width, 3)")
        _check_unit_range(arr, "RgbImage")
        if self.source_bit_depth not in (8, 16):
            raise ValueError("source_bit_depth must be 8 or 16")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def display_max(self) -> int:
        """Full-scale pixel value of the source (255 or 65535)."""
        return (1 << self.source_bit_depth) - 1


@dataclass(frozen=True)
class GrayImage:
    """Single-channel raster with intensities in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if arr.ndim != 2:
            raise ValueError("GrayImage data must have shape (height, width)")
        _check_unit_range(arr, "GrayImage")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LabelMatrix:
    """Per-pixel object identity: 0 is background, objects are 1..n_objects.

    Positive labels are contiguous and each label's pixel set is
    8-connected.
    """

    labels: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int32))
        if arr.ndim != 2:
            raise ValueError("labels must have shape (height, width)")
        if arr.size and arr.min() < 0:
            raise ValueError("labels must be non-negative")
        positive = np.unique(arr[arr > 0])
        n = int(positive.size)
        if n and (positive[0] != 1 or positive[-1] != n):
            raise ValueError("positive labels must be contiguous 1..n")
        object.__setattr__(self, "labels", arr)
        object.__setattr__(self, "_n_objects", n)

    @property
    def n_objects(self) -> int:
        return self._n_objects

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


#: JSON field names, fixed: they are the wire format for configs and the API.
_PARAM_FIELDS = (
    "equalization_clip_limit",
    "background_size",
    "median_size",
    "gaussian_radius",
    "min_area",
    "max_area",
    "min_signal",
    "classifier_expr",
    "classifier_threshold",
    "enable_equalization",
    "enable_background_subtraction",
    "enable_smoothing",
)


@dataclass(frozen=True)
class PipelineParams:
    """The nine named pipeline parameters plus step-enable flags.

    Defaults reproduce the reference configuration: clip limit 0.01,
    background 19 px, median 7 px, Gaussian radius 7 px, area limits
    35-2000 px^2, minimum signal 0.2, classifier ``mean(R)`` thresholded
    at 9/255.
    """

    equalization_clip_limit: float = 0.01
    background_size: int = 19
    median_size: int = 7
    gaussian_radius: float = 7.0
    min_area: int = 35
    max_area: int = 2000
    min_signal: float = 0.2
    classifier_expr: str = "mean(R)"
    classifier_threshold: Union[float, str] = 9 / 255
    enable_equalization: bool = True
    enable_background_subtraction: bool = True
    enable_smoothing: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """Raise ParamError listing every violated constraint."""
        errors: dict[str, str] = {}
        p = self
        if not (isinstance(p.equalization_clip_limit, (int, float))
                and 0.0 <= p.equalization_clip_limit <= 1.0):
            errors["equalization_clip_limit"] = "must be a real in [0, 1]"
        if not (isinstance(p.background_size, int) and p.background_size >= 3
                and p.background_size % 2 == 1):
            errors["background_size"] = "must be an odd integer >= 3"
        if not (isinstance(p.median_size, int) and p.median_size >= 1
                and p.median_size % 2 == 1):
            errors["median_size"] = "must be an odd integer >= 1"
        if not (isinstance(p.gaussian_radius, (int, float)) and p.gaussian_radius > 0):
            errors["gaussian_radius"] = "must be a positive real"
        if not (isinstance(p.min_area, int) and p.min_area >= 0):
            errors["min_area"] = "must be a non-negative integer"
        if not (isinstance(p.max_area, int) and p.max_area >= 1):
            errors["max_area"] = "must be a positive integer"
        if ("min_area" not in errors and "max_area" not in errors
                and p.min_area > p.max_area):
            errors["min_area"] = "must not exceed max_area"
        if not (isinstance(p.min_signal, (int, float)) and 0.0 <= p.min_signal <= 1.0):
            errors["min_signal"] = "must be a real in [0, 1]"
        if not (isinstance(p.classifier_expr, str) and p.classifier_expr.strip()):
            errors["classifier_expr"] = "must be a non-empty expression"
        t = p.classifier_threshold
        if isinstance(t, str):
            if t != "auto":
                errors["classifier_threshold"] = 'must be a real or "auto"'
        elif not (isinstance(t, (int, float)) and math.isfinite(t)):
            errors["classifier_threshold"] = 'must be a real or "auto"'
        for flag in ("enable_equalization", "enable_background_subtraction",
                     "enable_smoothing"):
            if not isinstance(getattr(p, flag), bool):
                errors[flag] = "must be a boolean"
        if errors:
            raise ParamError(errors)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in _PARAM_FIELDS}

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineParams":
        unknown = set(d) - set(_PARAM_FIELDS)
        if unknown:
            raise ParamError({k: "unknown parameter" for k in unknown})
        coerced = dict(d)
        # JSON has no int/float distinction; accept whole-valued floats for
        # the integer fields.
        for key in ("background_size", "median_size", "min_area", "max_area"):
            v = coerced.get(key)
            if isinstance(v, float) and v.is_integer():
                coerced[key] = int(v)
        for key in ("equalization_clip_limit", "gaussian_radius", "min_signal"):
            v = coerced.get(key)
            if isinstance(v, int) and not isinstance(v, bool):
                coerced[key] = float(v)
        v = coerced.get("classifier_threshold")
        if isinstance(v, int) and not isinstance(v, bool):
            coerced["classifier_threshold"] = float(v)
        return cls(**coerced)

    @classmethod
    def from_json(cls, text: str) -> "PipelineParams":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParamError({"<json>": f"invalid JSON: {exc}"}) from exc
        if not isinstance(d, dict):
            raise ParamError({"<json>": "parameter JSON must be an object"})
        return cls.from_dict(d)

    def updated(self, **changes) -> "PipelineParams":
        return replace(self, **changes)


@dataclass
class Region:
    """Per-object statistics plus the raw pixel data needed to classify it."""

    label: int
    centroid_x: float
    centroid_y: float
    area: int
    mean_r: float
    mean_g: float
    mean_b: float
    f_value: float | None = None
    state: int | None = None  # 1 or 2; None while unclassified
    # flat indices (row-major) of the region's pixels in the source image
    pixel_indices: np.ndarray | None = field(default=None, repr=False)
    pixels_r: np.ndarray | None = field(default=None, repr=False)
    pixels_g: np.ndarray | None = field(default=None, repr=False)
    pixels_b: np.ndarray | None = field(default=None, repr=False)


class RegionTable:
    """One row per positive label of a companion LabelMatrix."""

    def __init__(self, regions: list[Region]):
        self.regions = list(regions)

    def __len__(self) -> int:
        return len(self.regions)

    def __iter__(self):
        return iter(self.regions)

    def __getitem__(self, i: int) -> Region:
        return self.regions[i]

    def by_label(self) -> dict[int, Region]:
        return {r.label: r for r in self.regions}


# ---------------------------------------------------------------------------
# image file I/O

_SUPPORTED_SUFFIXES = {".png", ".tif", ".tiff"}


def _normalize_array(arr: np.ndarray, strip_alpha: bool) -> tuple[np.ndarray, int]:
    """Map a decoded integer array to ([0,1] float RGB, source bit depth)."""
    if arr.dtype == np.uint8:
        depth, scale = 8, 255.0
    elif arr.dtype == np.uint16:
        depth, scale = 16, 65535.0
    elif arr.dtype == np.int32:
        # Pillow decodes some 16-bit TIFFs to mode "I"
        if arr.size and (arr.min() < 0 or arr.max() > 65535):
            raise ValueError("unsupported bit depth (expected 8- or 16-bit data)")
        depth, scale = 16, 65535.0
    else:
        raise ValueError(f"unsupported bit depth (dtype {arr.dtype})")

    if arr.ndim == 2:
        rgb = np.repeat(arr[:, :, None], 3, axis=2)
    elif arr.ndim == 3 and arr.shape[2] == 3:
        rgb = arr
    elif arr.ndim == 3 and arr.shape[2] == 4:
        if not strip_alpha:
            raise ValueError(
                "4-channel image; pass strip_alpha=True to drop the alpha channel")
        rgb = arr[:, :, :3]
    else:
        nch = arr.shape[2] if arr.ndim == 3 else arr.ndim
        raise ValueError(f"unsupported channel count ({nch})")
    return rgb.astype(np.float64) / scale, depth


def decode_image(data: bytes, strip_alpha: bool = False) -> RgbImage:
    """Decode PNG or TIFF bytes into a normalized RgbImage."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            if im.format not in ("PNG", "TIFF"):
                raise ValueError(f"unsupported format {im.format!r} (PNG or TIFF only)")
            arr = np.asarray(im)
    except ValueError:
        raise
    except Exception as exc:
        raise ValueError(f"unreadable image: {exc}") from exc
    rgb, depth = _normalize_array(arr, strip_alpha)
    return RgbImage(rgb, source_bit_depth=depth)


def load_image(path: str | Path, strip_alpha: bool = False) -> RgbImage:
    """Load a PNG or TIFF file as a normalized RgbImage.

    8-bit values are divided by 255 and 16-bit values by 65535; single-channel
    sources are replicated into all three channels.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    return decode_image(path.read_bytes(), strip_alpha=strip_alpha)


def save_image(img: RgbImage, path: str | Path) -> None:
    """Write an RgbImage as an 8-bit RGB PNG (rounded display scale)."""
    arr = np.rint(img.data * 255.0).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(Path(path), format="PNG")


def save_gray_image(img: GrayImage, path: str | Path) -> None:
    """Write a GrayImage as an 8-bit grayscale PNG."""
    arr = np.rint(img.data * 255.0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(Path(path), format="PNG")


def save_label_matrix(lm: LabelMatrix, path: str | Path) -> None:
    """Write labels as a 16-bit single-channel PNG (bit-exact round trip)."""
    if lm.n_objects > 65535:
        raise ValueError(f"cannot store {lm.n_objects} labels in 16 bits")
    arr = lm.labels.astype(np.uint16)
    Image.fromarray(arr).save(Path(path), format="PNG")


def load_label_matrix(path: str | Path) -> LabelMatrix:
    """Read a label matrix previously written by save_label_matrix."""
    with Image.open(Path(path)) as im:
        arr = np.asarray(im)
    if arr.ndim != 2:
        raise ValueError("label PNG must be single-channel")
    return LabelMatrix(arr.astype(np.int32))


# ---------------------------------------------------------------------------
# region table CSV

def _fmt(x: float) -> str:
    return f"{x:.9g}"


def export_region_table(rt: RegionTable, path: str | Path) -> None:
    """Write the region table as CSV with a fixed column order."""
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REGION_CSV_HEADER)
        for r in rt:
            writer.writerow([
                r.label,
                _fmt(r.centroid_x),
                _fmt(r.centroid_y),
                r.area,
                _fmt(r.mean_r),
                _fmt(r.mean_g),
                _fmt(r.mean_b),
                _fmt(r.f_value) if r.f_value is not None else "",
                r.state if r.state is not None else "unclassified",
            ])


def read_region_table(path: str | Path) -> RegionTable:
    """Parse a CSV written by export_region_table (pixel lists are not stored)."""
    regions: list[Region] = []
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != REGION_CSV_HEADER:
            raise ValueError(f"unexpected region CSV header: {header}")
        for row in reader:
            if len(row) != len(REGION_CSV_HEADER):
                raise ValueError(f"malformed region CSV row: {row}")
            regions.append(Region(
                label=int(row[0]),
                centroid_x=float(row[1]),
                centroid_y=float(row[2]),
                area=int(row[3]),
                mean_r=float(row[4]),
                mean_g=float(row[5]),
                mean_b=float(row[6]),
                f_value=float(row[7]) if row[7] else None,
                state=None if row[8] == "unclassified" else int(row[8]),
            ))
    return RegionTable(regions)
