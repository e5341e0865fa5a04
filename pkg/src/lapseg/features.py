"""Per-pixel feature extraction, normalization, and weight presets.

Each pixel contributes a 9-component row, in this fixed column order:

    0 row   1 col   2 R   3 G   4 B   5 V   6 ExR   7 ExG   8 ExB

V is the value channel of an RGB->HSV transform, i.e. max(R, G, B). The
excess color indexes measure how much one channel exceeds the other two:
ExR = 2R - (G + B), ExG = 2G - (R + B), ExB = 2B - (G + R).

Columns are z-scored (population statistics) over the pixels of the image
being processed, then multiplied by a 9-vector of weights. Two presets are
exposed: "uniform" weighs everything equally and "location" halves the
seven color columns so the two coordinates dominate.
"""

from __future__ import annotations

import numpy as np

from .errors import InsufficientDataError, ParameterError
from .resample import RgbImage

FEATURE_COUNT = 9
FEATURE_NAMES = ("row", "col", "R", "G", "B", "V", "ExR", "ExG", "ExB")

LAMBDA_UNIFORM = np.ones(FEATURE_COUNT)
LAMBDA_LOCATION = np.array([1.0, 1.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5])

LAMBDA_PRESETS = {
    "uniform": LAMBDA_UNIFORM,
    "location": LAMBDA_LOCATION,
}


def resolve_lambda(spec) -> np.ndarray:
    """Turn a preset name or 9-sequence into a validated weight vector."""
    if isinstance(spec, str):
        try:
            weights = LAMBDA_PRESETS[spec]
        except KeyError:
            raise ParameterError(
                f"unknown lambda preset {spec!r}; choose from {sorted(LAMBDA_PRESETS)}"
            ) from None
    else:
        weights = np.asarray(spec, dtype=np.float64)
    weights = np.array(weights, dtype=np.float64)
    if weights.shape != (FEATURE_COUNT,):
        raise ParameterError(f"lambda weights must have {FEATURE_COUNT} entries")
    if np.any(weights < 0) or not np.any(weights > 0):
        raise ParameterError("lambda weights must be >= 0 with at least one > 0")
    return weights


def extract_raw_features(img: RgbImage) -> np.ndarray:
    """Build the (n, 9) raw feature matrix in row-major pixel order."""
    h, w = img.height, img.width
    n = h * w
    rgb = img.pixels.reshape(n, 3)
    r, g, b = rgb[:, 0], rgb[:, 1], rgb[:, 2]
    feats = np.empty((n, FEATURE_COUNT), dtype=np.float64)
    feats[:, 0] = np.repeat(np.arange(h, dtype=np.float64), w)
    feats[:, 1] = np.tile(np.arange(w, dtype=np.float64), h)
    feats[:, 2] = r
    feats[:, 3] = g
    feats[:, 4] = b
    feats[:, 5] = rgb.max(axis=1)
    feats[:, 6] = 2.0 * r - (g + b)
    feats[:, 7] = 2.0 * g - (r + b)
    feats[:, 8] = 2.0 * b - (g + r)
    return feats


def normalize_and_scale(feats: np.ndarray, lambda_weights=LAMBDA_UNIFORM) -> np.ndarray:
    """Z-score each column (population std) and apply the weight vector.

    Constant columns become all zeros instead of dividing by zero; flat
    synthetic images must not abort the pipeline.
    """
    feats = np.asarray(feats, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != FEATURE_COUNT:
        raise ParameterError(f"feature matrix must be (n, {FEATURE_COUNT}), got {feats.shape}")
    if feats.shape[0] < 2:
        raise InsufficientDataError("need at least 2 rows to compute column statistics")
    weights = resolve_lambda(lambda_weights)
    mean = feats.mean(axis=0)
    std = feats.std(axis=0)
    safe = np.where(std == 0.0, 1.0, std)
    out = (feats - mean) / safe
    out[:, std == 0.0] = 0.0
    out *= weights
    return out
