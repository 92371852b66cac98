"""HTTP service backing the interactive tuning UI.

Sessions hold one uploaded image plus a cache of segmentation results keyed
by a content hash of (image, params); all computation is pure, so repeated
requests replay byte-identical responses.  Requests within a session are
serialized; distinct sessions run concurrently.
"""

from __future__ import annotations

import hashlib
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse

from .classify import ParseError, classify_regions, parse_expr
from .core import ParamError, PipelineParams, RgbImage, decode_image
from .optimize import GroundTruthStates, threshold_sweep
from .regions import extract_regions
from .render import encode_png, render_classification_overlay, render_overlay, \
    step_to_png
from .watershed import segment

__all__ = ["ServerConfig", "create_app"]


@dataclass(frozen=True)
class ServerConfig:
    max_upload_bytes: int = 64 * 1024 * 1024
    session_ttl_seconds: float = 3600.0
    ui_dir: Path | None = None


@dataclass
class Session:
    id: str
    image_bytes: bytes
    image: RgbImage
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_access: float = field(default_factory=time.monotonic)
    # params-hash of the segmentation the session currently points at
    current_key: str | None = None
    # key -> dict of cached state (labels, table, response, artifacts...)
    seg_cache: dict = field(default_factory=dict)
    classification: dict | None = None
    truth: GroundTruthStates | None = None
    artifacts: dict = field(default_factory=dict)


class SessionStore:
    def __init__(self, ttl: float):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._ttl = ttl

    def _evict_expired(self, now: float) -> None:
        dead = [sid for sid, s in self._sessions.items()
                if now - s.last_access > self._ttl]
        for sid in dead:
            del self._sessions[sid]

    def create(self, image_bytes: bytes, image: RgbImage) -> Session:
        with self._lock:
            now = time.monotonic()
            self._evict_expired(now)
            sid = secrets.token_hex(12)
            session = Session(id=sid, image_bytes=image_bytes, image=image)
            self._sessions[sid] = session
            return session

    def get(self, sid: str) -> Session:
        with self._lock:
            now = time.monotonic()
            self._evict_expired(now)
            session = self._sessions.get(sid)
            if session is None:
                raise HTTPException(status_code=404, detail="unknown session")
            session.last_access = now
            return session


def _params_from_body(body) -> PipelineParams:
    if not isinstance(body, dict):
        raise HTTPException(status_code=422,
                            detail={"errors": {"<body>": "expected a JSON object"}})
    try:
        return PipelineParams.from_dict(body)
    except ParamError as exc:
        raise HTTPException(status_code=422, detail={"errors": exc.errors})
    except TypeError as exc:
        raise HTTPException(status_code=422, detail={"errors": {"<body>": str(exc)}})


def _segment_key(image_bytes: bytes, params: PipelineParams) -> str:
    digest = hashlib.sha256()
    digest.update(image_bytes)
    digest.update(params.to_json(indent=None).encode())
    return digest.hexdigest()[:16]


def create_app(config: ServerConfig | None = None) -> FastAPI:
    config = config or ServerConfig()
    app = FastAPI(title="cellflood", version="0.1.0")
    store = SessionStore(config.session_ttl_seconds)

    @app.post("/api/session", status_code=201)
    async def create_session(request: Request):
        length = request.headers.get("content-length")
        if length is not None and int(length) > config.max_upload_bytes:
            raise HTTPException(status_code=413, detail="upload too large")
        body = await request.body()
        if len(body) > config.max_upload_bytes:
            raise HTTPException(status_code=413, detail="upload too large")
        try:
            image = decode_image(body, strip_alpha=True)
        except ValueError as exc:
            raise HTTPException(status_code=415, detail=str(exc))
        session = store.create(body, image)
        return {"id": session.id, "width": image.width, "height": image.height}

    @app.post("/api/session/{sid}/segment")
    def segment_session(sid: str, body: dict):
        session = store.get(sid)
        params = _params_from_body(body)
        with session.lock:
            key = _segment_key(session.image_bytes, params)
            cached = session.seg_cache.get(key)
            if cached is None:
                result = segment(session.image, params)
                table = extract_regions(result.labels, session.image)
                session.artifacts[f"{key}/overlay"] = encode_png(
                    render_overlay(session.image, result.labels))
                steps = []
                for name, step in result.intermediates.items():
                    session.artifacts[f"{key}/step_{name}"] = step_to_png(step)
                    steps.append({
                        "name": name,
                        "url": f"/api/session/{sid}/artifact/{key}/step_{name}",
                    })
                response = {
                    "params_key": key,
                    "region_count": result.labels.n_objects,
                    "regions": [{
                        "label": r.label,
                        "centroid_x": r.centroid_x,
                        "centroid_y": r.centroid_y,
                        "area": r.area,
                        "mean_R": r.mean_r,
                        "mean_G": r.mean_g,
                        "mean_B": r.mean_b,
                    } for r in table],
                    "overlay_url": f"/api/session/{sid}/artifact/{key}/overlay",
                    "steps": steps,
                }
                session.seg_cache[key] = {
                    "labels": result.labels,
                    "table": table,
                    "response": response,
                }
                cached = session.seg_cache[key]
            if session.current_key != key:
                # params changed: labels renumber, so the classification and
                # any label-keyed ground truth are stale
                session.current_key = key
                session.classification = None
                session.truth = None
            return JSONResponse(cached["response"])

    @app.post("/api/session/{sid}/classify")
    def classify_session(sid: str, body: dict):
        session = store.get(sid)
        expr = body.get("expr")
        threshold = body.get("threshold")
        display_scale = bool(body.get("display_scale", False))
        if not isinstance(expr, str):
            raise HTTPException(status_code=422,
                                detail={"errors": {"expr": "required string"}})
        if not (threshold == "auto" or isinstance(threshold, (int, float))):
            raise HTTPException(status_code=422, detail={
                "errors": {"threshold": 'must be a number or "auto"'}})
        with session.lock:
            if session.current_key is None:
                raise HTTPException(status_code=409,
                                    detail="no segmentation for this session yet")
            cached = session.seg_cache[session.current_key]
            try:
                ast = parse_expr(expr)
            except ParseError as exc:
                raise HTTPException(status_code=422, detail={
                    "error": str(exc), "position": exc.position})
            if cached["labels"].n_objects == 0:
                raise HTTPException(status_code=409, detail="no regions to classify")
            try:
                result = classify_regions(cached["table"], ast, threshold,
                                          display_scale=display_scale)
            except ValueError as exc:
                raise HTTPException(status_code=422,
                                    detail={"errors": {"threshold": str(exc)}})
            key = session.current_key
            states = result.states
            overlay_key = f"{key}/overlay_classified"
            session.artifacts[overlay_key] = encode_png(
                render_classification_overlay(session.image, cached["labels"],
                                              states))
            counts = result.state_counts()
            response = {
                "params_key": key,
                "f_values": {str(l): v for l, v in result.f_values.items()},
                "states": {str(l): s for l, s in states.items()},
                "state_counts": {"1": counts[1], "2": counts[2]},
                "threshold_used": result.threshold_used,
                "threshold_mode": result.threshold_mode,
                "histogram": {
                    "edges": [float(e) for e in result.hist_edges],
                    "counts": [int(c) for c in result.hist_counts],
                },
                "nonfinite_labels": list(result.nonfinite_labels),
                "overlay_url": f"/api/session/{sid}/artifact/{overlay_key}",
            }
            session.classification = {"f_values": result.f_values,
                                      "response": response}
            return JSONResponse(response)

    @app.post("/api/session/{sid}/ground-truth")
    def upload_truth(sid: str, body: dict):
        session = store.get(sid)
        states = body.get("states")
        if not isinstance(states, list):
            raise HTTPException(status_code=422, detail={
                "errors": {"states": "expected a list of {label, state}"}})
        with session.lock:
            if session.current_key is None:
                raise HTTPException(status_code=409,
                                    detail="no segmentation for this session yet")
            labels = session.seg_cache[session.current_key]["labels"]
            try:
                truth = GroundTruthStates.from_pairs(
                    [(e["label"], e["state"]) for e in states])
            except (KeyError, TypeError, ValueError) as exc:
                raise HTTPException(status_code=422,
                                    detail={"errors": {"states": str(exc)}})
            unknown = [l for l in truth.labels() if not 1 <= l <= labels.n_objects]
            if unknown:
                raise HTTPException(status_code=422, detail={
                    "errors": {"states": f"unknown labels: {unknown}"}})
            session.truth = truth
            return {"accepted": len(truth.entries)}

    @app.post("/api/session/{sid}/sweep")
    def sweep_session(sid: str, body: dict):
        session = store.get(sid)
        lo = body.get("lo", 0.0)
        hi = body.get("hi", 2.0)
        steps = body.get("steps", 201)
        if not (isinstance(lo, (int, float)) and isinstance(hi, (int, float))
                and lo < hi):
            raise HTTPException(status_code=422,
                                detail={"errors": {"lo": "need lo < hi"}})
        if not (isinstance(steps, int) and steps >= 2):
            raise HTTPException(status_code=422,
                                detail={"errors": {"steps": "must be an int >= 2"}})
        with session.lock:
            if session.truth is None:
                raise HTTPException(status_code=409, detail="no ground truth uploaded")
            if session.classification is None:
                raise HTTPException(status_code=409,
                                    detail="no classification for this session yet")
            try:
                result = threshold_sweep(session.classification["f_values"],
                                         session.truth, (float(lo), float(hi)),
                                         steps)
            except ValueError as exc:
                raise HTTPException(status_code=422,
                                    detail={"errors": {"sweep": str(exc)}})
            return JSONResponse({
                "thresholds": [float(t) for t in result.thresholds],
                "accuracies": [float(a) for a in result.accuracies],
                "optimal_threshold": result.optimal_threshold,
                "optimal_accuracy": result.optimal_accuracy,
                "n_plateaus": result.n_plateaus,
            })

    @app.get("/api/session/{sid}/artifact/{key:path}")
    def get_artifact(sid: str, key: str):
        session = store.get(sid)
        with session.lock:
            data = session.artifacts.get(key)
            if data is None:
                raise HTTPException(status_code=404, detail="unknown artifact")
            return Response(content=data, media_type="image/png")

    if config.ui_dir is not None and Path(config.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(config.ui_dir), html=True),
                  name="ui")

    return app
