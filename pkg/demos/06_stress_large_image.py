"""Stress run: how the pipeline scales on a synthetically enlarged photo.

Enlarges the bundled sample to a target megapixel count (bilinear, plus
sensor-like noise so the result is not a mosaic of flat tiles), scribbles
it programmatically, and reports per-phase timings and iteration counts.
Invoke with --megapixels to push further; the default finishes in well
under a minute on a laptop-class machine.

    python3 demos/06_stress_large_image.py --megapixels 2
"""

import argparse
import time

import numpy as np

import lapseg as ls


def enlarge(image: ls.RgbImage, target_pixels: int) -> ls.RgbImage:
    scale = np.sqrt(target_pixels / (image.width * image.height))
    dst_w, dst_h = int(image.width * scale), int(image.height * scale)
    rows = image.pixels.reshape(-1, 3)
    big = ls.upscale_bilinear(rows, image.width, image.height, dst_w, dst_h)
    big = big.reshape(dst_h, dst_w, 3)
    rng = np.random.default_rng(99)
    big = np.clip(big + rng.normal(0.0, 0.01, big.shape), 0.0, 1.0)
    return ls.RgbImage(big)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--megapixels", type=float, default=1.0)
    parser.add_argument("--k", type=int, default=10)
    args = parser.parse_args()

    base = ls.decode_image(ls.sample_image_path().read_bytes())
    t0 = time.perf_counter()
    image = enlarge(base, int(args.megapixels * 1e6))
    h, w = image.height, image.width
    print(f"enlarged sample to {w}x{h} ({w * h / 1e6:.2f} MP) "
          f"in {time.perf_counter() - t0:.1f}s")

    # Thick multi-stroke scribbles per region: label spreading needs
    # representative seeds, so mark each region the way a user would.
    labels = np.zeros((h, w), dtype=np.int32)

    def stroke(cls, y_frac, x0_frac, x1_frac, thickness=4):
        y = int(h * y_frac)
        labels[y : y + thickness, int(w * x0_frac) : int(w * x1_frac)] = cls

    stroke(1, 0.05, 0.05, 0.95)
    stroke(1, 0.15, 0.10, 0.60)
    stroke(1, 0.30, 0.40, 0.90)
    stroke(2, 0.56, 0.05, 0.45)
    stroke(2, 0.60, 0.55, 0.95)
    stroke(2, 0.66, 0.20, 0.80)
    stroke(3, 0.78, 0.05, 0.90)
    stroke(3, 0.88, 0.10, 0.95)
    stroke(3, 0.96, 0.05, 0.60)
    seeds = ls.LabelMap(labels, 3)
    print(f"scribbles cover {(labels > 0).mean():.1%} of the pixels")

    result = ls.segment(image, seeds, ls.SegConfig(k=args.k))
    print(f"stage 1: {result.stage1_iterations} iterations "
          f"(converged={result.stage1_converged})")
    print(f"stage 2: {result.stage2_iterations} iterations "
          f"(converged={result.stage2_converged})")
    for phase, seconds in result.timing.items():
        print(f"  {phase:>20}: {seconds:7.2f}s")
    print(f"labeled in stage 1: {result.stage1_labeled_fraction:.1%}, "
          f"stage 2: {result.stage2_labeled_fraction:.1%}")


if __name__ == "__main__":
    main()
