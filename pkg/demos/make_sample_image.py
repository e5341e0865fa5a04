"""Regenerate the bundled sample photo (src/lapseg/data/meadow.png).

A deterministic synthetic landscape: graded sky with a sun glow, two hill
ridges, and a textured meadow with scattered flowers. Texture comes from
smoothed white noise so the k-NN feature graph behaves like it does on
photographs (tight local clusters, a few long-range similarities).
"""

from pathlib import Path

import numpy as np
from PIL import Image

WIDTH, HEIGHT = 120, 90
SEED = 20240607


def smooth_noise(rng, shape, passes):
    field = rng.standard_normal(shape)
    for _ in range(passes):
        field = (
            field
            + np.roll(field, 1, 0) + np.roll(field, -1, 0)
            + np.roll(field, 1, 1) + np.roll(field, -1, 1)
        ) / 5.0
    field -= field.min()
    return field / field.max()


def build_image():
    rng = np.random.default_rng(SEED)
    h, w = HEIGHT, WIDTH
    yy, xx = np.meshgrid(np.linspace(0.0, 1.0, h), np.linspace(0.0, 1.0, w), indexing="ij")
    img = np.zeros((h, w, 3))

    # Sky: blue gradient with a warm glow around the sun.
    img[:, :, 0] = 0.45 + 0.25 * yy
    img[:, :, 1] = 0.65 + 0.20 * yy
    img[:, :, 2] = 0.95 - 0.15 * yy
    sun = np.exp(-(((xx - 0.75) ** 2) + ((yy - 0.18) ** 2) * 4.0) / 0.012)
    img += sun[:, :, None] * np.array([0.50, 0.42, 0.05])

    # Two hill ridges, the nearer one darker.
    ridge1 = 0.52 + 0.06 * np.sin(xx * 9.0) + 0.03 * np.sin(xx * 23.0 + 1.7)
    ridge2 = 0.62 + 0.05 * np.sin(xx * 5.0 + 0.8) + 0.02 * np.sin(xx * 31.0)
    img[yy > ridge1] = [0.36, 0.44, 0.22]
    img[yy > ridge2] = [0.25, 0.38, 0.16]

    # Meadow texture and a sprinkle of flowers.
    grass = smooth_noise(rng, (h, w), 3)
    meadow = yy > 0.70
    textured = np.stack([
        0.18 + 0.16 * grass,
        0.42 + 0.22 * grass,
        0.10 + 0.10 * grass,
    ], axis=2)
    img = np.where(meadow[:, :, None], textured, img)
    flowers = (rng.random((h, w)) > 0.995) & (yy > 0.72)
    img[flowers] = [0.92, 0.85, 0.25]

    # Sensor-like fine noise everywhere.
    img += rng.normal(0.0, 0.015, img.shape)
    return np.clip(img, 0.0, 1.0)


def main():
    out_path = Path(__file__).resolve().parents[1] / "src" / "lapseg" / "data" / "meadow.png"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    arr = (np.rint(build_image() * 255)).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(out_path)
    print(f"wrote {out_path} ({WIDTH}x{HEIGHT})")


if __name__ == "__main__":
    main()
