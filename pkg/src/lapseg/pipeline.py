"""End-to-end two-stage segmentation and seed-input parsing.

The run proceeds exactly in this order: bicubic-downscale the image and
nearest-downscale the seeds; extract, normalize, and weight features on the
small image; build the k-NN digraph; propagate to convergence; bilinearly
enlarge the membership rows back to full resolution; label every pixel
whose confidence reaches tau; then build the 8-neighborhood grid digraph
over the survivors using full-image features, propagate again (memberships
are not reset), and assign the rest by argmax.

SegmentContext caches everything that does not depend on k/sigma/omega/tau
(decoded rasters, raw features, per-lambda normalized features and k-d
trees) so parameter sweeps over one image avoid redundant work.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, MissingSeedsError, ParameterError, TooManyClassesError, TrimapFormatError
from .features import LAMBDA_UNIFORM, extract_raw_features, normalize_and_scale, resolve_lambda
from .graphs import build_grid_digraph, build_knn_digraph, KdTree
from .propagation import (
    ConvergenceState,
    DominationMatrix,
    argmax_label,
    init_domination,
    run_stage,
    threshold_label,
)
from .resample import LabelMap, RgbImage, downscale_bicubic, downscale_nearest, upscale_bilinear

TRIMAP_BACKGROUND = 0
TRIMAP_BACKGROUND_SEED = 64
TRIMAP_UNLABELED = 128
TRIMAP_FOREGROUND_SEED = 255


@dataclass
class SegConfig:
    """All tunables of a segmentation run."""

    k: int = 10
    sigma: float = 0.5
    omega: float = 1e-4
    lambda_weights: np.ndarray = field(default_factory=lambda: LAMBDA_UNIFORM.copy())
    tau: float = 0.999
    check_interval: int = 10
    max_iterations: int = 100000

    def __post_init__(self):
        self.lambda_weights = resolve_lambda(self.lambda_weights)
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.sigma <= 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if self.omega <= 0:
            raise ParameterError(f"omega must be positive, got {self.omega}")
        if not 0.0 < self.tau <= 1.0:
            raise ParameterError(f"tau must lie in (0, 1], got {self.tau}")
        if self.check_interval < 1:
            raise ParameterError("check_interval must be >= 1")
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be >= 1")

    def replace(self, **overrides) -> "SegConfig":
        data = {
            "k": self.k,
            "sigma": self.sigma,
            "omega": self.omega,
            "lambda_weights": self.lambda_weights.copy(),
            "tau": self.tau,
            "check_interval": self.check_interval,
            "max_iterations": self.max_iterations,
        }
        data.update(overrides)
        return SegConfig(**data)


@dataclass
class SegmentationResult:
    """Full labeling plus the telemetry the benchmark tables report."""

    labels: LabelMap
    stage1_iterations: int
    stage2_iterations: int
    stage1_converged: bool
    stage2_converged: bool
    seed_pixels: int
    stage1_pixels: int
    stage2_pixels: int
    timing: dict

    @property
    def total_pixels(self) -> int:
        return self.labels.width * self.labels.height

    @property
    def seed_fraction(self) -> float:
        return self.seed_pixels / self.total_pixels

    @property
    def stage1_labeled_fraction(self) -> float:
        return self.stage1_pixels / self.total_pixels

    @property
    def stage2_labeled_fraction(self) -> float:
        return self.stage2_pixels / self.total_pixels

    def class_pixel_counts(self) -> dict:
        counts = np.bincount(self.labels.flat(), minlength=self.labels.num_classes + 1)
        return {c: int(counts[c]) for c in range(1, self.labels.num_classes + 1)}

    def to_json_dict(self) -> dict:
        return {
            "width": self.labels.width,
            "height": self.labels.height,
            "num_classes": self.labels.num_classes,
            "stage1_iterations": self.stage1_iterations,
            "stage2_iterations": self.stage2_iterations,
            "converged": {"stage1": self.stage1_converged, "stage2": self.stage2_converged},
            "seed_fraction": self.seed_fraction,
            "stage1_labeled_fraction": self.stage1_labeled_fraction,
            "stage2_labeled_fraction": self.stage2_labeled_fraction,
            "class_pixel_counts": {str(c): v for c, v in self.class_pixel_counts().items()},
            "timing": dict(self.timing),
        }


class SegmentContext:
    """Reusable per-image state for running one seed set under many configs."""

    def __init__(self, img: RgbImage, seeds: LabelMap):
        if (img.width, img.height) != (seeds.width, seeds.height):
            raise DimensionError(
                f"seeds {seeds.width}x{seeds.height} do not match image "
                f"{img.width}x{img.height}"
            )
        if not (seeds.flat() > 0).any():
            raise MissingSeedsError("segmentation needs at least one seed pixel")
        self.img = img
        self.seeds = seeds
        self.small = downscale_bicubic(img)
        self.small_seeds = downscale_nearest(seeds, self.small.width, self.small.height)
        # Shared across replace_seeds clones: everything here depends only on
        # the image (and lambda), never on the seed map.
        self._cache: dict = {"raw_small": extract_raw_features(self.small)}

    def replace_seeds(self, seeds: LabelMap) -> "SegmentContext":
        """New context for the same image; feature and tree caches are shared."""
        if (self.img.width, self.img.height) != (seeds.width, seeds.height):
            raise DimensionError("replacement seeds do not match the image dimensions")
        if not (seeds.flat() > 0).any():
            raise MissingSeedsError("segmentation needs at least one seed pixel")
        clone = object.__new__(SegmentContext)
        clone.img = self.img
        clone.seeds = seeds
        clone.small = self.small
        clone.small_seeds = downscale_nearest(seeds, self.small.width, self.small.height)
        clone._cache = self._cache
        return clone

    def _lambda_key(self, weights: np.ndarray) -> bytes:
        return np.asarray(weights, dtype=np.float64).tobytes()

    def _small_features(self, weights: np.ndarray) -> np.ndarray:
        key = ("small", self._lambda_key(weights))
        if key not in self._cache:
            self._cache[key] = normalize_and_scale(self._cache["raw_small"], weights)
        return self._cache[key]

    def _tree(self, weights: np.ndarray) -> KdTree:
        key = ("tree", self._lambda_key(weights))
        if key not in self._cache:
            self._cache[key] = KdTree(self._small_features(weights))
        return self._cache[key]

    def _full_features(self, weights: np.ndarray) -> np.ndarray:
        if "raw_full" not in self._cache:
            self._cache["raw_full"] = extract_raw_features(self.img)
        key = ("full", self._lambda_key(weights))
        if key not in self._cache:
            self._cache[key] = normalize_and_scale(self._cache["raw_full"], weights)
        return self._cache[key]

    def run(self, cfg: SegConfig) -> SegmentationResult:
        timing: dict = {}
        w, h = self.img.width, self.img.height
        sw, sh = self.small.width, self.small.height
        num_classes = self.seeds.num_classes

        t0 = time.perf_counter()
        feats_small = self._small_features(cfg.lambda_weights)
        tree = self._tree(cfg.lambda_weights)
        timing["stage1_features"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        small_labels = self.small_seeds.flat()
        graph1 = build_knn_digraph(feats_small, small_labels, cfg.k, cfg.sigma, tree=tree)
        timing["stage1_graph"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        dom = init_domination(small_labels, num_classes)
        conv1 = ConvergenceState(cfg.check_interval, cfg.omega, cfg.max_iterations)
        stage1 = run_stage(graph1, dom, conv1)
        timing["stage1_propagation"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        upscaled = upscale_bilinear(stage1.dom.rows, sw, sh, w, h)
        dom_full = DominationMatrix(upscaled, self.seeds.flat() > 0)
        labels1 = threshold_label(dom_full, self.seeds, cfg.tau)
        timing["upscale_threshold"] = time.perf_counter() - t0

        flat1 = labels1.flat()
        seed_pixels = int((self.seeds.flat() > 0).sum())
        stage1_pixels = int((flat1 > 0).sum()) - seed_pixels
        unlabeled_mask = flat1 == 0

        if unlabeled_mask.any():
            t0 = time.perf_counter()
            feats_full = self._full_features(cfg.lambda_weights)
            timing["stage2_features"] = time.perf_counter() - t0

            t0 = time.perf_counter()
            graph2 = build_grid_digraph(feats_full, unlabeled_mask, w, h, cfg.sigma)
            timing["stage2_graph"] = time.perf_counter() - t0

            t0 = time.perf_counter()
            # Memberships carry over from stage 1; pixels labeled so far are
            # clamped one-hot (a labeled node is fully dominated by its class).
            rows = dom_full.rows
            labeled = ~unlabeled_mask
            rows[labeled] = 0.0
            rows[labeled, flat1[labeled] - 1] = 1.0
            dom2 = DominationMatrix(rows, labeled)
            conv2 = ConvergenceState(cfg.check_interval, cfg.omega, cfg.max_iterations)
            stage2 = run_stage(graph2, dom2, conv2)
            final = argmax_label(stage2.dom, labels1)
            timing["stage2_propagation"] = time.perf_counter() - t0
            stage2_iterations, stage2_converged = stage2.iterations, stage2.converged
        else:
            timing["stage2_features"] = 0.0
            timing["stage2_graph"] = 0.0
            timing["stage2_propagation"] = 0.0
            final = labels1
            stage2_iterations, stage2_converged = 0, True

        stage2_pixels = int(unlabeled_mask.sum())
        timing["total"] = sum(timing.values())
        return SegmentationResult(
            labels=final,
            stage1_iterations=stage1.iterations,
            stage2_iterations=stage2_iterations,
            stage1_converged=stage1.converged,
            stage2_converged=stage2_converged,
            seed_pixels=seed_pixels,
            stage1_pixels=stage1_pixels,
            stage2_pixels=stage2_pixels,
            timing=timing,
        )


def segment(img: RgbImage, seeds: LabelMap, cfg: SegConfig | None = None) -> SegmentationResult:
    """Run the full two-stage pipeline on one image with one seed map."""
    return SegmentContext(img, seeds).run(cfg if cfg is not None else SegConfig())


def parse_scribbles(scrib: RgbImage, background_color=(255, 255, 255)) -> LabelMap:
    """Turn a color scribble overlay into a LabelMap.

    Pixels matching the background color are unlabeled; every other
    distinct color becomes a class, numbered 1..C in ascending (R, G, B)
    lexicographic order of the colors.
    """
    u8 = scrib.to_uint8()
    bg = np.asarray(background_color, dtype=np.uint8)
    if bg.shape != (3,):
        raise ParameterError("background_color must be an (R, G, B) triple")
    packed = (
        u8[:, :, 0].astype(np.uint32) << 16
        | u8[:, :, 1].astype(np.uint32) << 8
        | u8[:, :, 2].astype(np.uint32)
    )
    bg_packed = np.uint32(int(bg[0]) << 16 | int(bg[1]) << 8 | int(bg[2]))
    colors = np.unique(packed[packed != bg_packed])
    if colors.size > 255:
        raise TooManyClassesError(f"{colors.size} scribble colors exceed the 255-class limit")
    labels = np.zeros(packed.shape, dtype=np.int32)
    if colors.size:
        idx = np.searchsorted(colors, packed)
        idx = np.clip(idx, 0, colors.size - 1)
        hit = (colors[idx] == packed) & (packed != bg_packed)
        labels[hit] = idx[hit] + 1
    return LabelMap(labels, max(1, int(colors.size)))


def parse_trimap(tri: RgbImage):
    """Split a {0, 64, 128, 255} trimap into seeds and the evaluation mask.

    0 and 64 seed the background class (1), 255 seeds the foreground class
    (2), and 128 marks the unlabeled region where the error rate is
    measured. 0 is seeded but, like 64, excluded from evaluation.
    """
    u8 = tri.to_uint8()
    if not (u8[:, :, 0] == u8[:, :, 1]).all() or not (u8[:, :, 1] == u8[:, :, 2]).all():
        bad = np.argwhere(
            (u8[:, :, 0] != u8[:, :, 1]) | (u8[:, :, 1] != u8[:, :, 2])
        )[0]
        raise TrimapFormatError(
            f"trimap is not grayscale at (row {bad[0]}, col {bad[1]})"
        )
    gray = u8[:, :, 0]
    allowed = np.isin(gray, (TRIMAP_BACKGROUND, TRIMAP_BACKGROUND_SEED,
                             TRIMAP_UNLABELED, TRIMAP_FOREGROUND_SEED))
    if not allowed.all():
        bad = np.argwhere(~allowed)[0]
        raise TrimapFormatError(
            f"unexpected trimap value {gray[bad[0], bad[1]]} at (row {bad[0]}, col {bad[1]}); "
            "expected one of 0, 64, 128, 255"
        )
    labels = np.zeros(gray.shape, dtype=np.int32)
    labels[(gray == TRIMAP_BACKGROUND) | (gray == TRIMAP_BACKGROUND_SEED)] = 1
    labels[gray == TRIMAP_FOREGROUND_SEED] = 2
    eval_mask = gray == TRIMAP_UNLABELED
    return LabelMap(labels, 2), eval_mask
