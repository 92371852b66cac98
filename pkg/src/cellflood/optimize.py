"""Parameter-optimization workflow: ground-truth ingestion, the binned
squared-difference metric for segmentation tuning, and the accuracy sweep
for picking a classification threshold.
"""

from __future__ import annotations

import csv
import itertools
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np
from scipy import ndimage

from .classify import otsu_threshold_1d
from .core import GrayImage, LabelMatrix, PipelineParams, RgbImage
from .filters import to_grayscale
from .regions import bin_centroids
from .watershed import segment, watershed_flood

__all__ = [
    "GroundTruthCentroids",
    "GroundTruthStates",
    "SweepResult",
    "ComparisonResult",
    "w_metric",
    "accuracy",
    "threshold_sweep",
    "load_ground_truth",
    "compare_segmenters",
    "sample_labels",
    "segmentation_param_sweep",
    "ParamSweepResult",
]


@dataclass(frozen=True)
class GroundTruthCentroids:
    """Manually clicked cell centers, in pixels."""

    points: tuple[tuple[float, float], ...]

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> "GroundTruthCentroids":
        return cls(tuple((float(x), float(y)) for x, y in pairs))

    def validate_bounds(self, width: int, height: int) -> None:
        for x, y in self.points:
            if not (0 <= x < width and 0 <= y < height):
                raise ValueError(f"centroid ({x}, {y}) outside image bounds "
                                 f"{width}x{height}")


@dataclass(frozen=True)
class GroundTruthStates:
    """Manually determined object states; one entry per labeled object."""

    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for label, state in self.entries:
            if state not in (1, 2):
                raise ValueError(f"state must be 1 or 2, got {state} for label {label}")
            if label in seen:
                raise ValueError(f"duplicate ground-truth label {label}")
            seen.add(label)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[int, int]]) -> "GroundTruthStates":
        return cls(tuple((int(l), int(s)) for l, s in pairs))

    def labels(self) -> tuple[int, ...]:
        return tuple(l for l, _ in self.entries)


def w_metric(manual: Sequence[float], auto: Sequence[float]) -> float:
    """Sum over bins of squared count differences; 0 iff the counts agree."""
    m = np.asarray(manual, dtype=np.float64)
    a = np.asarray(auto, dtype=np.float64)
    if m.shape != a.shape:
        raise ValueError(f"count lists differ in length: {m.size} vs {a.size}")
    d = m - a
    return float(np.dot(d, d))


def accuracy(predicted: Mapping[int, int], truth: GroundTruthStates,
             positive_state: int = 2) -> float:
    """(true positives + true negatives) / total over the ground-truth set.

    ``positive_state`` names which state counts as positive; the value of
    the accuracy itself does not depend on the choice.
    """
    if positive_state not in (1, 2):
        raise ValueError("positive_state must be 1 or 2")
    if not truth.entries:
        raise ValueError("empty ground truth")
    tp = tn = 0
    for label, true_state in truth.entries:
        if label not in predicted:
            raise ValueError(f"no prediction for ground-truth label {label}")
        pred = predicted[label]
        if pred == positive_state and true_state == positive_state:
            tp += 1
        elif pred != positive_state and true_state != positive_state:
            tn += 1
    return (tp + tn) / len(truth.entries)


@dataclass(frozen=True)
class SweepResult:
    """Accuracy evaluated over a grid of thresholds."""

    thresholds: np.ndarray
    accuracies: np.ndarray
    optimal_threshold: float
    optimal_accuracy: float
    n_plateaus: int = 1


def _states_at(f_values: Mapping[int, float], labels: Sequence[int],
               threshold: float) -> dict[int, int]:
    return {lbl: (1 if f_values[lbl] > threshold else 2) for lbl in labels}


def threshold_sweep(f_values: Mapping[int, float], truth: GroundTruthStates,
                    threshold_range: tuple[float, float] = (0.0, 2.0),
                    steps: int = 201, positive_state: int = 2) -> SweepResult:
    """Evaluate classification accuracy on an even grid of thresholds.

    The optimal threshold is the midpoint of the maximal-accuracy plateau;
    if several disjoint plateaus tie, the one at the lowest thresholds wins
    and a warning reports the multiplicity.
    """
    lo, hi = threshold_range
    if not lo < hi:
        raise ValueError("threshold range must satisfy lo < hi")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    labels = truth.labels()
    for lbl in labels:
        if lbl not in f_values:
            raise ValueError(f"no f value for ground-truth label {lbl}")

    thresholds = np.linspace(lo, hi, steps)
    accuracies = np.array([
        accuracy(_states_at(f_values, labels, t), truth, positive_state)
        for t in thresholds])

    best = accuracies.max()
    attain = np.flatnonzero(accuracies == best)
    breaks = np.flatnonzero(np.diff(attain) > 1)
    run_starts = np.concatenate(([attain[0]], attain[breaks + 1]))
    run_ends = np.concatenate((attain[breaks], [attain[-1]]))
    n_plateaus = len(run_starts)
    if n_plateaus > 1:
        warnings.warn(f"{n_plateaus} disjoint maximal-accuracy plateaus; "
                      "reporting the lowest-threshold one", stacklevel=2)

    i0, i1 = int(run_starts[0]), int(run_ends[0])
    mid = (thresholds[i0] + thresholds[i1]) / 2.0
    # the midpoint may fall between grid points; keep it only if it truly
    # attains the maximum, otherwise snap to the central grid point
    if accuracy(_states_at(f_values, labels, mid), truth, positive_state) != best:
        mid = float(thresholds[i0 + (i1 - i0) // 2])
    return SweepResult(thresholds=thresholds, accuracies=accuracies,
                       optimal_threshold=float(mid), optimal_accuracy=float(best),
                       n_plateaus=n_plateaus)


# ---------------------------------------------------------------------------
# ground-truth files

def load_ground_truth(path: str | Path) -> Union[GroundTruthCentroids, GroundTruthStates]:
    """Load a ground-truth CSV: header ``x,y`` for clicked centroids or
    ``label,state`` for manual state calls."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty ground-truth file")
        header = [h.strip() for h in header]
        rows = [row for row in reader if row]

    if header == ["x", "y"]:
        try:
            pairs = [(float(r[0]), float(r[1])) for r in rows]
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}: malformed centroid row: {exc}") from exc
        return GroundTruthCentroids.from_pairs(pairs)
    if header == ["label", "state"]:
        try:
            entries = [(int(r[0]), int(r[1])) for r in rows]
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}: malformed state row: {exc}") from exc
        return GroundTruthStates.from_pairs(entries)
    raise ValueError(f"{path}: unknown ground-truth header {header}; "
                     'expected "x,y" or "label,state"')


def sample_labels(labels: Sequence[int], k: int, seed: int) -> list[int]:
    """Seeded random subset of labels (without replacement) for manual review."""
    labels = list(labels)
    if k > len(labels):
        raise ValueError(f"cannot sample {k} of {len(labels)} labels")
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(labels), size=k, replace=False)
    return [labels[i] for i in picked]


# ---------------------------------------------------------------------------
# method comparison (thresholding vs naive watershed vs full pipeline)

@dataclass(frozen=True)
class ComparisonResult:
    otsu_cc: LabelMatrix
    naive_watershed: LabelMatrix
    custom: LabelMatrix


_CONN8 = np.ones((3, 3), dtype=bool)


def connected_components(mask: np.ndarray) -> LabelMatrix:
    """8-connected component labeling of a boolean mask."""
    labels, _ = ndimage.label(mask, structure=_CONN8)
    return LabelMatrix(labels.astype(np.int32))


def compare_segmenters(img: RgbImage, p: PipelineParams) -> ComparisonResult:
    """Segment one image three ways for side-by-side comparison:
    single-level Otsu thresholding + connected components, watershed of the
    inverted raw grayscale with no filtering or background enforcement, and
    the full pipeline.
    """
    gray = to_grayscale(img)
    values = gray.data.ravel()
    if np.unique(values).size < 2:
        otsu_cc = LabelMatrix(np.zeros_like(gray.data, dtype=np.int32))
    else:
        t = otsu_threshold_1d(values)
        otsu_cc = connected_components(gray.data > t)

    naive = watershed_flood(GrayImage(1.0 - gray.data))
    custom = segment(img, p).labels
    return ComparisonResult(otsu_cc=otsu_cc, naive_watershed=naive, custom=custom)


# ---------------------------------------------------------------------------
# segmentation parameter grid sweep

@dataclass(frozen=True)
class ParamSweepResult:
    points: tuple[tuple[dict, float], ...]
    best_overrides: dict
    best_w: float


def _label_centroids(lm: LabelMatrix) -> list[tuple[float, float]]:
    n = lm.n_objects
    if n == 0:
        return []
    flat = lm.labels.ravel()
    w = lm.width
    xs = np.arange(flat.size) % w
    ys = np.arange(flat.size) // w
    areas = np.bincount(flat, minlength=n + 1)[1:]
    cx = np.bincount(flat, weights=xs, minlength=n + 1)[1:] / areas
    cy = np.bincount(flat, weights=ys, minlength=n + 1)[1:] / areas
    return list(zip(cx.tolist(), cy.tolist()))


def segmentation_param_sweep(img: RgbImage, base: PipelineParams,
                             grid: Mapping[str, Sequence], truth: GroundTruthCentroids,
                             axis: str = "y", n_bins: int = 20,
                             extent: tuple[float, float] | None = None) -> ParamSweepResult:
    """Evaluate the w metric over a cartesian grid of parameter overrides.

    This is a plain grid evaluator, not an optimizer: it mirrors manual
    exploration of the parameter space with a deterministic scoreboard.
    """
    if extent is None:
        extent = (0.0, float(img.width if axis == "x" else img.height))
    manual = bin_centroids(truth.points, axis, n_bins, extent).counts

    keys = sorted(grid)
    points: list[tuple[dict, float]] = []
    best: tuple[dict, float] | None = None
    for combo in itertools.product(*(grid[k] for k in keys)):
        overrides = dict(zip(keys, combo))
        result = segment(img, base.updated(**overrides))
        auto = bin_centroids(_label_centroids(result.labels), axis, n_bins,
                             extent).counts
        w = w_metric(manual, auto)
        points.append((overrides, w))
        if best is None or w < best[1]:
            best = (overrides, w)
    assert best is not None, "empty parameter grid"
    return ParamSweepResult(points=tuple(points), best_overrides=best[0],
                            best_w=best[1])
