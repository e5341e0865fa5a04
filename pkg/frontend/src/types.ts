/** Shared types for the scribble client. */

export interface Point {
  x: number;
  y: number;
}

/** One brush stroke: a class, a disk radius, and the pointer path. */
export interface Stroke {
  classId: number;
  radius: number;
  points: Point[];
}

/** Run-length triple over row-major pixel order: [classId, start, length]. */
export type Run = [number, number, number];

/** Wire format of the service's scribble payload. */
export interface ScribblePayload {
  num_classes: number;
  runs: Run[];
}

export interface ConfigOverrides {
  k?: number;
  sigma?: number;
  omega?: number;
  tau?: number;
  lambda?: string | number[];
}

export interface SessionInfo {
  session_id: string;
  width: number;
  height: number;
}

export interface SegmentResponse {
  session_id: string;
  width: number;
  height: number;
  num_classes: number;
  stage1_iterations: number;
  stage2_iterations: number;
  converged: { stage1: boolean; stage2: boolean };
  seed_fraction: number;
  stage1_labeled_fraction: number;
  stage2_labeled_fraction: number;
  class_pixel_counts: Record<string, number>;
  timing: Record<string, number>;
  label_png_base64: string;
  palette: [number, number, number][];
}
