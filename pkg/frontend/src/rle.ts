/** Run-length coding of label buffers, matching the service wire format. */

import type { Run } from "./types.js";

/** Encode the nonzero entries of a row-major label buffer as runs. */
export function encodeRuns(labels: Int32Array): Run[] {
  const runs: Run[] = [];
  let start = -1;
  let current = 0;
  for (let i = 0; i <= labels.length; i++) {
    const value = i < labels.length ? labels[i] : 0;
    if (start >= 0 && value !== current) {
      runs.push([current, start, i - start]);
      start = -1;
    }
    if (start < 0 && value !== 0) {
      start = i;
      current = value;
    }
  }
  return runs;
}

/** Expand runs back to a label buffer; later runs overwrite earlier ones. */
export function decodeRuns(runs: Run[], total: number): Int32Array {
  const labels = new Int32Array(total);
  for (const [classId, start, length] of runs) {
    if (classId < 1 || start < 0 || length < 1 || start + length > total) {
      throw new Error(`invalid run [${classId}, ${start}, ${length}] for ${total} pixels`);
    }
    labels.fill(classId, start, start + length);
  }
  return labels;
}
