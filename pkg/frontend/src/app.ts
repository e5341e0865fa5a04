/** Scribble-canvas client: draw per-class strokes, run the service, inspect
 *  the overlay, refine, rerun. The image layer is never mutated; strokes and
 *  results render on their own stacked canvases. */

import { ApiError, LapsegClient } from "./api.js";
import { buildOverlayRgba, classPixelCounts, labelsFromRgb } from "./overlay.js";
import { classCss } from "./palette.js";
import { rasterizeStrokes, rasterizeToLabels } from "./raster.js";
import type { SegmentResponse, Stroke } from "./types.js";

const client = new LapsegClient("");

interface AppState {
  sessionId: string | null;
  width: number;
  height: number;
  strokes: Stroke[];
  activeClass: number;
  numClasses: number;
  brushRadius: number;
  pending: boolean;
  result: SegmentResponse | null;
  labels: Int32Array | null;
  overlayAlpha: number;
  isolate: number | null;
}

const state: AppState = {
  sessionId: null,
  width: 0,
  height: 0,
  strokes: [],
  activeClass: 1,
  numClasses: 2,
  brushRadius: 3,
  pending: false,
  result: null,
  labels: null,
  overlayAlpha: 0.5,
  isolate: null,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const imageCanvas = el<HTMLCanvasElement>("image-canvas");
const strokeCanvas = el<HTMLCanvasElement>("stroke-canvas");
const overlayCanvas = el<HTMLCanvasElement>("overlay-canvas");
const statusLine = el<HTMLDivElement>("status");
const readout = el<HTMLDivElement>("readout");
const classBar = el<HTMLDivElement>("class-bar");
const isolateSelect = el<HTMLSelectElement>("isolate");
const segmentButton = el<HTMLButtonElement>("segment");

function setStatus(text: string, isError = false): void {
  statusLine.textContent = text;
  statusLine.classList.toggle("error", isError);
}

// ---------------------------------------------------------------------------
// image upload
// ---------------------------------------------------------------------------

el<HTMLInputElement>("file").addEventListener("change", async (event) => {
  const input = event.target as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) return;
  try {
    const bytes = await file.arrayBuffer();
    const info = await client.createSession(bytes);
    state.sessionId = info.session_id;
    state.width = info.width;
    state.height = info.height;
    state.strokes = [];
    state.result = null;
    state.labels = null;

    const bitmap = await createImageBitmap(new Blob([bytes]));
    for (const canvas of [imageCanvas, strokeCanvas, overlayCanvas]) {
      canvas.width = info.width;
      canvas.height = info.height;
    }
    imageCanvas.getContext("2d")!.drawImage(bitmap, 0, 0);
    redrawStrokes();
    redrawOverlay();
    setStatus(`session ${info.session_id.slice(0, 8)} — ${info.width}x${info.height}`);
  } catch (err) {
    setStatus(`upload failed: ${describe(err)}`, true);
  }
});

// ---------------------------------------------------------------------------
// stroke capture
// ---------------------------------------------------------------------------

let liveStroke: Stroke | null = null;

function canvasPoint(event: PointerEvent): { x: number; y: number } {
  const rect = strokeCanvas.getBoundingClientRect();
  return {
    x: ((event.clientX - rect.left) / rect.width) * state.width,
    y: ((event.clientY - rect.top) / rect.height) * state.height,
  };
}

strokeCanvas.addEventListener("pointerdown", (event) => {
  if (!state.sessionId) return;
  strokeCanvas.setPointerCapture(event.pointerId);
  liveStroke = {
    classId: state.activeClass,
    radius: state.brushRadius,
    points: [canvasPoint(event)],
  };
  state.strokes.push(liveStroke);
  redrawStrokes();
});

strokeCanvas.addEventListener("pointermove", (event) => {
  if (!liveStroke) return;
  liveStroke.points.push(canvasPoint(event));
  redrawStrokes();
});

strokeCanvas.addEventListener("pointerup", () => {
  liveStroke = null;
});

el<HTMLButtonElement>("undo").addEventListener("click", () => {
  state.strokes.pop();
  redrawStrokes();
});

el<HTMLButtonElement>("clear").addEventListener("click", () => {
  state.strokes = [];
  redrawStrokes();
});

function redrawStrokes(): void {
  const ctx = strokeCanvas.getContext("2d")!;
  ctx.clearRect(0, 0, strokeCanvas.width, strokeCanvas.height);
  if (!state.width) return;
  // render from the same rasterization the service will receive, so what
  // you see is exactly what gets segmented
  const labels = rasterizeToLabels(state.strokes, state.width, state.height);
  const rgba = buildOverlayRgba(labels, state.width, state.height, 0.9);
  const image = ctx.createImageData(state.width, state.height);
  image.data.set(rgba);
  ctx.putImageData(image, 0, 0);
}

// ---------------------------------------------------------------------------
// class palette
// ---------------------------------------------------------------------------

function renderClassBar(): void {
  classBar.innerHTML = "";
  for (let c = 1; c <= state.numClasses; c++) {
    const button = document.createElement("button");
    button.className = "class-chip" + (c === state.activeClass ? " active" : "");
    button.style.background = classCss(c);
    button.title = `class ${c}`;
    button.textContent = String(c);
    button.addEventListener("click", () => {
      state.activeClass = c;
      renderClassBar();
    });
    classBar.appendChild(button);
  }
  const add = document.createElement("button");
  add.className = "class-chip add";
  add.textContent = "+";
  add.title = "add class";
  add.addEventListener("click", () => {
    state.numClasses += 1;
    state.activeClass = state.numClasses;
    renderClassBar();
    renderIsolateOptions();
  });
  classBar.appendChild(add);
}

function renderIsolateOptions(): void {
  const current = isolateSelect.value;
  isolateSelect.innerHTML = "";
  const all = document.createElement("option");
  all.value = "";
  all.textContent = "all classes";
  isolateSelect.appendChild(all);
  for (let c = 1; c <= state.numClasses; c++) {
    const option = document.createElement("option");
    option.value = String(c);
    option.textContent = `class ${c} only`;
    isolateSelect.appendChild(option);
  }
  isolateSelect.value = current;
}

// ---------------------------------------------------------------------------
// segmentation
// ---------------------------------------------------------------------------

segmentButton.addEventListener("click", () => {
  void runSegmentation();
});

async function runSegmentation(): Promise<void> {
  if (state.pending) return; // one in-flight request per session
  if (!state.sessionId) {
    setStatus("upload an image first", true);
    return;
  }
  if (state.strokes.length === 0) {
    setStatus("draw at least one stroke before segmenting", true);
    return;
  }
  const payload = rasterizeStrokes(state.strokes, state.width, state.height);
  const config = {
    k: Number(el<HTMLInputElement>("param-k").value),
    sigma: Number(el<HTMLInputElement>("param-sigma").value),
    tau: Number(el<HTMLInputElement>("param-tau").value),
    lambda: el<HTMLSelectElement>("param-lambda").value,
  };
  state.pending = true;
  segmentButton.disabled = true;
  setStatus("segmenting…");
  try {
    const result = await client.segment(state.sessionId, payload, config);
    state.result = result;
    state.labels = await decodeLabelPng(result);
    verifyCounts(result);
    redrawOverlay();
    renderReadout(result);
    setStatus("done");
  } catch (err) {
    setStatus(`segmentation failed: ${describe(err)}`, true);
  } finally {
    state.pending = false;
    segmentButton.disabled = false;
  }
}

async function decodeLabelPng(result: SegmentResponse): Promise<Int32Array> {
  const raw = atob(result.label_png_base64);
  const bytes = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i++) bytes[i] = raw.charCodeAt(i);
  const bitmap = await createImageBitmap(new Blob([bytes], { type: "image/png" }));
  const scratch = document.createElement("canvas");
  scratch.width = result.width;
  scratch.height = result.height;
  const ctx = scratch.getContext("2d", { willReadFrequently: true })!;
  ctx.drawImage(bitmap, 0, 0);
  const rgba = ctx.getImageData(0, 0, result.width, result.height).data;
  return labelsFromRgb(rgba, result.num_classes);
}

function verifyCounts(result: SegmentResponse): void {
  if (!state.labels) return;
  const local = classPixelCounts(state.labels, result.num_classes);
  for (const [classId, count] of Object.entries(result.class_pixel_counts)) {
    if (local[classId] !== count) {
      console.warn(`class ${classId}: overlay has ${local[classId]} px, service says ${count}`);
    }
  }
}

function redrawOverlay(): void {
  const ctx = overlayCanvas.getContext("2d")!;
  ctx.clearRect(0, 0, overlayCanvas.width, overlayCanvas.height);
  if (!state.labels || !state.width) return;
  const rgba = buildOverlayRgba(
    state.labels, state.width, state.height, state.overlayAlpha, state.isolate,
  );
  const image = ctx.createImageData(state.width, state.height);
  image.data.set(rgba);
  ctx.putImageData(image, 0, 0);
}

function renderReadout(result: SegmentResponse): void {
  const total = result.timing.total ?? 0;
  const counts = Object.entries(result.class_pixel_counts)
    .map(([c, n]) => `class ${c}: ${n}px`)
    .join(", ");
  readout.innerHTML = [
    `stage 1: ${result.stage1_iterations} iterations`,
    `stage 2: ${result.stage2_iterations} iterations`,
    `time: ${total.toFixed(2)}s`,
    counts,
  ].join(" · ");
}

// ---------------------------------------------------------------------------
// controls
// ---------------------------------------------------------------------------

el<HTMLInputElement>("brush").addEventListener("input", (event) => {
  state.brushRadius = Number((event.target as HTMLInputElement).value);
  el<HTMLSpanElement>("brush-value").textContent = String(state.brushRadius);
});

el<HTMLInputElement>("alpha").addEventListener("input", (event) => {
  state.overlayAlpha = Number((event.target as HTMLInputElement).value) / 100;
  redrawOverlay();
});

isolateSelect.addEventListener("change", () => {
  state.isolate = isolateSelect.value ? Number(isolateSelect.value) : null;
  redrawOverlay();
});

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.status}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

renderClassBar();
renderIsolateOptions();
setStatus("upload an image to start");
