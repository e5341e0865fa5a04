"""Local HTTP service wrapping the segmentation pipeline.

Endpoints (JSON unless noted):

    POST /api/sessions                   image upload (raw body or multipart
                                         field "file") -> 201 {"session_id"}
    POST /api/sessions/{id}/segment      RLE scribbles + config overrides ->
                                         segmentation payload
    GET  /api/sessions/{id}/result       latest payload, or 204 if none yet
    GET  /api/health                     liveness probe

Scribbles travel as run-length triples [class_id, start, length] over
row-major pixel order. Responses carry the label map as a base64 indexed
PNG (same palette as encode_labelmap), per-class pixel counts, iteration
counts, and timings. Sessions live in memory, expire after an idle
timeout, and allow one segmentation at a time (a concurrent second request
gets 409).
"""

from __future__ import annotations

import base64
import threading
import time
import uuid
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from pydantic import BaseModel, Field

from .errors import LapsegError, MissingSeedsError, ParameterError
from .pipeline import SegConfig, SegmentContext, SegmentationResult
from .resample import LabelMap, RgbImage, class_color, decode_image, encode_labelmap

DEFAULT_SESSION_TTL = 30 * 60.0


class ScribblePayload(BaseModel):
    num_classes: int = Field(ge=1, le=255)
    runs: list[tuple[int, int, int]]


class ConfigOverrides(BaseModel):
    k: Optional[int] = None
    sigma: Optional[float] = None
    omega: Optional[float] = None
    tau: Optional[float] = None
    lambda_weights: Optional[str | list[float]] = Field(default=None, alias="lambda")

    model_config = {"populate_by_name": True}


class SegmentRequest(BaseModel):
    scribbles: ScribblePayload
    config: Optional[ConfigOverrides] = None


class SessionRecord:
    def __init__(self, image: RgbImage):
        self.id = uuid.uuid4().hex
        self.image = image
        self.context: Optional[SegmentContext] = None
        self.latest_payload: Optional[dict] = None
        self.last_access = time.monotonic()
        self.lock = threading.Lock()

    def touch(self):
        self.last_access = time.monotonic()


def rasterize_rle(payload: ScribblePayload, width: int, height: int) -> LabelMap:
    """Expand run-length scribbles into a label map."""
    total = width * height
    flat = np.zeros(total, dtype=np.int32)
    for class_id, start, length in payload.runs:
        if not 1 <= class_id <= payload.num_classes:
            raise ParameterError(f"run class {class_id} outside 1..{payload.num_classes}")
        if length < 1 or start < 0 or start + length > total:
            raise ParameterError(
                f"run ({class_id}, {start}, {length}) exceeds the {total}-pixel image"
            )
        flat[start : start + length] = class_id
    return LabelMap(flat.reshape(height, width), payload.num_classes)


def _overrides_to_config(overrides: Optional[ConfigOverrides]) -> SegConfig:
    cfg = SegConfig()
    if overrides is None:
        return cfg
    updates = {}
    if overrides.k is not None:
        updates["k"] = overrides.k
    if overrides.sigma is not None:
        updates["sigma"] = overrides.sigma
    if overrides.omega is not None:
        updates["omega"] = overrides.omega
    if overrides.tau is not None:
        updates["tau"] = overrides.tau
    if overrides.lambda_weights is not None:
        updates["lambda_weights"] = overrides.lambda_weights
    return cfg.replace(**updates)


def _result_payload(session_id: str, result: SegmentationResult) -> dict:
    payload = result.to_json_dict()
    payload["session_id"] = session_id
    payload["label_png_base64"] = base64.b64encode(
        encode_labelmap(result.labels)
    ).decode("ascii")
    payload["palette"] = [
        list(class_color(c)) for c in range(1, result.labels.num_classes + 1)
    ]
    return payload


def default_ui_dir() -> Optional[str]:
    """Bundled frontend build, when the repo checkout ships one."""
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return str(candidate) if candidate.is_dir() else None


def create_app(ui_dir: Optional[str] = None,
               session_ttl: float = DEFAULT_SESSION_TTL) -> FastAPI:
    app = FastAPI(title="lapseg", docs_url=None, redoc_url=None)
    sessions: dict[str, SessionRecord] = {}
    registry_lock = threading.Lock()
    app.state.sessions = sessions

    def purge_expired():
        now = time.monotonic()
        with registry_lock:
            dead = [sid for sid, rec in sessions.items()
                    if now - rec.last_access > session_ttl]
            for sid in dead:
                del sessions[sid]

    def get_session(session_id: str) -> SessionRecord:
        purge_expired()
        with registry_lock:
            record = sessions.get(session_id)
        if record is None:
            raise HTTPException(404, f"unknown session {session_id!r}")
        record.touch()
        return record

    @app.get("/api/health")
    def health():
        return {"status": "ok", "sessions": len(sessions)}

    @app.post("/api/sessions", status_code=201)
    async def create_session(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = form.get("file")
            if upload is None:
                raise HTTPException(400, "multipart upload needs a 'file' field")
            data = await upload.read()
        else:
            data = await request.body()
        if not data:
            raise HTTPException(400, "empty request body")
        try:
            image = decode_image(data)
        except LapsegError as exc:
            raise HTTPException(400, f"undecodable image: {exc}") from exc
        record = SessionRecord(image)
        purge_expired()
        with registry_lock:
            sessions[record.id] = record
        return {"session_id": record.id, "width": image.width, "height": image.height}

    @app.post("/api/sessions/{session_id}/segment")
    def run_segmentation(session_id: str, body: SegmentRequest):
        record = get_session(session_id)
        if not body.scribbles.runs:
            raise HTTPException(422, "scribble payload contains no runs")
        try:
            cfg = _overrides_to_config(body.config)
            seeds = rasterize_rle(body.scribbles, record.image.width, record.image.height)
        except LapsegError as exc:
            raise HTTPException(422, str(exc)) from exc
        if not record.lock.acquire(blocking=False):
            raise HTTPException(409, "a segmentation is already running for this session")
        try:
            if record.context is None:
                record.context = SegmentContext(record.image, seeds)
            else:
                record.context = record.context.replace_seeds(seeds)
            result = record.context.run(cfg)
        except MissingSeedsError as exc:
            raise HTTPException(422, str(exc)) from exc
        except LapsegError as exc:
            raise HTTPException(422, str(exc)) from exc
        finally:
            record.lock.release()
        payload = _result_payload(session_id, result)
        record.latest_payload = payload
        record.touch()
        return payload

    @app.get("/api/sessions/{session_id}/result")
    def get_result(session_id: str):
        record = get_session(session_id)
        if record.latest_payload is None:
            return Response(status_code=204)
        return record.latest_payload

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
