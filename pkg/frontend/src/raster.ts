/** Disk-brush rasterization of strokes into the RLE scribble payload.
 *
 * Strokes rasterize in draw order, later strokes overwriting earlier ones,
 * so the result is deterministic. Each path point stamps a disk of pixels
 * with dx^2 + dy^2 <= radius^2 (radius 1 = the 5-pixel cross), and
 * consecutive points are joined by stamping along the segment at unit
 * steps. Out-of-bounds points are clamped to the image rectangle.
 */

import { encodeRuns } from "./rle.js";
import type { ScribblePayload, Stroke } from "./types.js";

export function rasterizeToLabels(strokes: Stroke[], width: number, height: number): Int32Array {
  const labels = new Int32Array(width * height);
  for (const stroke of strokes) {
    if (stroke.classId < 1) {
      throw new Error(`stroke class must be >= 1, got ${stroke.classId}`);
    }
    const radius = Math.max(0, stroke.radius);
    const pts = stroke.points.map((p) => ({
      x: clamp(Math.round(p.x), 0, width - 1),
      y: clamp(Math.round(p.y), 0, height - 1),
    }));
    if (pts.length === 0) continue;
    stampDisk(labels, width, height, pts[0].x, pts[0].y, radius, stroke.classId);
    for (let i = 1; i < pts.length; i++) {
      stampSegment(labels, width, height, pts[i - 1], pts[i], radius, stroke.classId);
    }
  }
  return labels;
}

export function rasterizeStrokes(strokes: Stroke[], width: number, height: number): ScribblePayload {
  const labels = rasterizeToLabels(strokes, width, height);
  let numClasses = 0;
  for (const stroke of strokes) numClasses = Math.max(numClasses, stroke.classId);
  return { num_classes: Math.max(1, numClasses), runs: encodeRuns(labels) };
}

function clamp(v: number, lo: number, hi: number): number {
  return v < lo ? lo : v > hi ? hi : v;
}

function stampDisk(
  labels: Int32Array, width: number, height: number,
  cx: number, cy: number, radius: number, classId: number,
): void {
  const r = Math.ceil(radius);
  const r2 = radius * radius;
  for (let dy = -r; dy <= r; dy++) {
    const y = cy + dy;
    if (y < 0 || y >= height) continue;
    for (let dx = -r; dx <= r; dx++) {
      const x = cx + dx;
      if (x < 0 || x >= width) continue;
      if (dx * dx + dy * dy <= r2) labels[y * width + x] = classId;
    }
  }
}

function stampSegment(
  labels: Int32Array, width: number, height: number,
  a: { x: number; y: number }, b: { x: number; y: number },
  radius: number, classId: number,
): void {
  const steps = Math.max(Math.abs(b.x - a.x), Math.abs(b.y - a.y));
  for (let s = 1; s <= steps; s++) {
    const t = s / steps;
    const x = Math.round(a.x + (b.x - a.x) * t);
    const y = Math.round(a.y + (b.y - a.y) * t);
    stampDisk(labels, width, height, x, y, radius, classId);
  }
}
