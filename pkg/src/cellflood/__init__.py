"""Watershed-based segmentation and classification of cells in fluorescence
microscopy images: filtering, background-enforced flooding, per-object
statistics, an expression-based classifier, and threshold optimization.
"""

from .classify import (ClassificationResult, ParseError, classify_regions,
                       eval_expr, expr_to_text, otsu_threshold_1d, parse_expr)
from .core import (GrayImage, LabelMatrix, ParamError, PipelineParams, Region,
                   RegionTable, RgbImage, export_region_table, load_image,
                   load_label_matrix, read_region_table, save_image,
                   save_label_matrix)
from .filters import (equalize_adaptive, gaussian_smooth, median_smooth,
                      run_filter_pipeline, subtract_background, to_grayscale)
from .kernels import BACKEND as KERNEL_BACKEND
from .optimize import (ComparisonResult, GroundTruthCentroids, GroundTruthStates,
                       SweepResult, accuracy, compare_segmenters,
                       load_ground_truth, sample_labels, threshold_sweep,
                       w_metric)
from .regions import bin_centroids, extract_regions
from .watershed import (BackgroundMask, OtsuLevels, SegmentResult, apply_limits,
                        compute_background_mask, discard_background_regions,
                        invert_and_enforce, otsu_two_level, segment,
                        watershed_flood)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    # core types and I/O
    "RgbImage", "GrayImage", "LabelMatrix", "PipelineParams", "Region",
    "RegionTable", "ParamError", "load_image", "save_image",
    "save_label_matrix", "load_label_matrix", "export_region_table",
    "read_region_table",
    # filters
    "to_grayscale", "equalize_adaptive", "subtract_background",
    "median_smooth", "gaussian_smooth", "run_filter_pipeline",
    # watershed
    "OtsuLevels", "BackgroundMask", "SegmentResult", "otsu_two_level",
    "compute_background_mask", "invert_and_enforce", "watershed_flood",
    "discard_background_regions", "apply_limits", "segment",
    # regions
    "extract_regions", "bin_centroids",
    # classification
    "ParseError", "parse_expr", "expr_to_text", "eval_expr",
    "otsu_threshold_1d", "classify_regions", "ClassificationResult",
    # optimization
    "GroundTruthCentroids", "GroundTruthStates", "SweepResult",
    "ComparisonResult", "w_metric", "accuracy", "threshold_sweep",
    "load_ground_truth", "sample_labels", "compare_segmenters",
]
