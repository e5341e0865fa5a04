/** Compositing helpers: label ids -> RGBA overlays and per-class counts.
 *  Overlays never touch the underlying image; they render to their own
 *  layer with the supplied alpha. */

import { classColor } from "./palette.js";

export function classPixelCounts(
  labels: ArrayLike<number>, numClasses: number,
): Record<string, number> {
  const counts: Record<string, number> = {};
  for (let c = 1; c <= numClasses; c++) counts[String(c)] = 0;
  for (let i = 0; i < labels.length; i++) {
    const v = labels[i];
    if (v >= 1 && v <= numClasses) counts[String(v)] += 1;
  }
  return counts;
}

/**
 * RGBA overlay of the label map. `alpha` in [0, 1]; when `isolate` is a
 * class id, only that class is tinted (everything else is transparent).
 */
export function buildOverlayRgba(
  labels: ArrayLike<number>, width: number, height: number,
  alpha: number, isolate: number | null = null,
): Uint8ClampedArray {
  const out = new Uint8ClampedArray(width * height * 4);
  const a = Math.round(Math.max(0, Math.min(1, alpha)) * 255);
  for (let i = 0; i < width * height; i++) {
    const v = labels[i];
    if (v < 1 || (isolate !== null && v !== isolate)) continue;
    const [r, g, b] = classColor(v);
    const o = i * 4;
    out[o] = r;
    out[o + 1] = g;
    out[o + 2] = b;
    out[o + 3] = a;
  }
  return out;
}

/** Map palette RGB triples (from a canvas-decoded label PNG) back to ids. */
export function labelsFromRgb(
  rgba: Uint8ClampedArray, numClasses: number,
): Int32Array {
  const lookup = new Map<number, number>();
  lookup.set(0, 0); // black = unlabeled
  for (let c = 1; c <= numClasses; c++) {
    const [r, g, b] = classColor(c);
    lookup.set((r << 16) | (g << 8) | b, c);
  }
  const n = rgba.length / 4;
  const labels = new Int32Array(n);
  for (let i = 0; i < n; i++) {
    const key = (rgba[i * 4] << 16) | (rgba[i * 4 + 1] << 8) | rgba[i * 4 + 2];
    const id = lookup.get(key);
    if (id === undefined) {
      throw new Error(`pixel ${i} has color ${key.toString(16)} outside the class palette`);
    }
    labels[i] = id;
  }
  return labels;
}
