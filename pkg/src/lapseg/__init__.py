"""Interactive image segmentation by two-stage label propagation.

Scribble or trimap seeds are spread through a k-nearest-neighbor feature
digraph on a downscaled copy of the image, then refined on the full-size
8-neighborhood grid. The package also ships the network-analysis and
benchmark tooling used to characterize the method (small-world metrics,
error rates, parameter sweeps, seed erosion).
"""

from importlib import resources

from .bench import (
    BenchRow,
    OPTIMIZED_K_GRID,
    erode_seeds,
    error_rate,
    parameter_sweep,
    run_grabcut,
    run_scribble_set,
    seed_sensitivity,
)
from .errors import (
    DecodeError,
    DimensionError,
    ImageTooSmallError,
    InsufficientDataError,
    LapsegError,
    MissingSeedsError,
    ParameterError,
    TooManyClassesError,
    TrimapFormatError,
    UndefinedMetricError,
    UnsupportedFormatError,
)
from .features import (
    LAMBDA_LOCATION,
    LAMBDA_PRESETS,
    LAMBDA_UNIFORM,
    extract_raw_features,
    normalize_and_scale,
    resolve_lambda,
)
from .graphs import (
    KdTree,
    SparseDigraph,
    build_grid_digraph,
    build_kdtree,
    build_knn_digraph,
    gaussian_weight,
)
from .netmetrics import (
    NetworkStats,
    clustering_coefficient,
    efficiency,
    random_equivalent,
    small_world_ness,
)
from .pipeline import (
    SegConfig,
    SegmentContext,
    SegmentationResult,
    parse_scribbles,
    parse_trimap,
    segment,
)
from .propagation import (
    ConvergenceState,
    DominationMatrix,
    argmax_label,
    avg_max_domination,
    init_domination,
    propagation_step,
    run_stage,
    threshold_label,
)
from .resample import (
    CLASS_PALETTE,
    LabelMap,
    RgbImage,
    class_color,
    decode_image,
    decode_labelmap,
    downscale_bicubic,
    downscale_nearest,
    encode_labelmap,
    upscale_bilinear,
)

__version__ = "0.1.0"


def sample_image_path():
    """Path to the bundled natural test image."""
    return resources.files("lapseg").joinpath("data/meadow.png")
