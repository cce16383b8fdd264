"""HTTP session layer for interactive scribble-and-refine segmentation.

Sessions are in-memory with TTL eviction. Per-image statistics and
clustering are computed eagerly on upload and cached: scribbles only
affect the unary model, so refinement rounds skip the expensive stages.
Requests on one session are serialized; distinct sessions run
concurrently. Clique sampling is pinned to the session seed; a segment
request may override the seed or ask for a fresh draw (resample).
"""

import base64
import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, Form, Request, Response, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .energy import MissingSeedsError
from .field import BACKGROUND, FOREGROUND, UNMARKED, ImageGrid, ScribbleMask
from .imageio import image_from_bytes, mask_png_bytes
from .pipeline import (ConfigError, PrecomputedState, RunConfig,
                       config_from_mapping, precompute, segment)

DEFAULT_MAX_PIXELS = 2_000_000
DEFAULT_TTL_SECONDS = 30 * 60

_STROKE_CLASSES = {"fg": FOREGROUND, "bg": BACKGROUND, "erase": UNMARKED}


def rasterize_strokes(scribbles: ScribbleMask, strokes: list) -> ScribbleMask:
    """Stamp brush disks along each polyline; later strokes win per pixel."""
    h, w = scribbles.height, scribbles.width
    labels = scribbles.labels.copy()
    for stroke in strokes:
        cls = _STROKE_CLASSES[stroke["class"]]
        radius = float(stroke.get("radius", 1.0))
        pts = np.asarray(stroke["points"], dtype=np.float64).reshape(-1, 2)
        centers = []
        for a, b in zip(pts[:-1], pts[1:]):
            seg_len = float(np.hypot(*(b - a)))
            steps = max(int(np.ceil(seg_len / max(radius / 2.0, 0.5))), 1)
            for k in range(steps):
                centers.append(a + (b - a) * (k / steps))
        centers.append(pts[-1])
        r_int = int(np.ceil(radius))
        dy, dx = np.mgrid[-r_int:r_int + 1, -r_int:r_int + 1]
        disk = (dy * dy + dx * dx) <= radius * radius
        off_y, off_x = dy[disk], dx[disk]
        for cx, cy in centers:
            ys = np.round(cy).astype(int) + off_y
            xs = np.round(cx).astype(int) + off_x
            ok = (ys >= 0) & (ys < h) & (xs >= 0) & (xs < w)
            labels[ys[ok], xs[ok]] = cls
    return ScribbleMask(w, h, labels)


def _validate_strokes(strokes) -> list:
    if not isinstance(strokes, list):
        raise ValueError("strokes must be a list")
    for s in strokes:
        if not isinstance(s, dict):
            raise ValueError("stroke must be an object")
        if s.get("class") not in _STROKE_CLASSES:
            raise ValueError(f"stroke class must be one of {sorted(_STROKE_CLASSES)}")
        pts = s.get("points")
        if (not isinstance(pts, list) or not pts
                or any(not isinstance(p, (list, tuple)) or len(p) != 2
                       for p in pts)):
            raise ValueError("stroke points must be a non-empty list of [x, y]")
        if "radius" in s and (not isinstance(s["radius"], (int, float))
                              or s["radius"] < 0):
            raise ValueError("stroke radius must be a non-negative number")
    return strokes


@dataclass
class Session:
    id: str
    image: ImageGrid
    config: RunConfig
    scribbles: ScribbleMask
    pre_cache: dict = field(default_factory=dict)
    last_mask_png: bytes | None = None
    created: float = field(default_factory=time.monotonic)
    updated: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def precomputed(self, cfg: RunConfig) -> PrecomputedState:
        key = (cfg.window, cfg.bins, cfg.effective_stats_kind,
               min(cfg.q, self.image.n_nodes), cfg.seed, cfg.degree > 0)
        if key not in self.pre_cache:
            self.pre_cache[key] = precompute(self.image, cfg)
        return self.pre_cache[key]


class SessionStore:
    def __init__(self, ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._ttl = ttl_seconds

    def _purge(self) -> None:
        now = time.monotonic()
        for sid in [sid for sid, s in self._sessions.items()
                    if now - s.updated > self._ttl]:
            del self._sessions[sid]

    def add(self, session: Session) -> None:
        with self._lock:
            self._purge()
            self._sessions[session.id] = session

    def get(self, sid: str) -> Session | None:
        with self._lock:
            self._purge()
            s = self._sessions.get(sid)
            if s is not None:
                s.updated = time.monotonic()
            return s

    def remove(self, sid: str) -> bool:
        with self._lock:
            self._purge()
            return self._sessions.pop(sid, None) is not None

    def count(self) -> int:
        with self._lock:
            self._purge()
            return len(self._sessions)


def create_app(static_dir=None, max_pixels: int = DEFAULT_MAX_PIXELS,
               ttl_seconds: float = DEFAULT_TTL_SECONDS) -> FastAPI:
    app = FastAPI(title="sparsecrf session service")
    store = SessionStore(ttl_seconds)
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    def _not_found():
        return JSONResponse(status_code=404, content={"detail": "unknown session"})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": store.count()}

    @app.post("/sessions", status_code=201)
    async def create_session(image: UploadFile, config: str = Form("")):
        data = await image.read()
        try:
            grid = image_from_bytes(data)
        except Exception:
            return JSONResponse(status_code=400,
                                content={"detail": "undecodable image"})
        if grid.n_nodes > max_pixels:
            return JSONResponse(
                status_code=413,
                content={"detail": f"image exceeds {max_pixels} pixels"})
        cfg = RunConfig()
        if config:
            import json as _json
            try:
                cfg = config_from_mapping(_json.loads(config), cfg)
            except (ValueError, ConfigError) as exc:
                return JSONResponse(status_code=400,
                                    content={"detail": f"bad config: {exc}"})
        session = Session(
            id=uuid.uuid4().hex,
            image=grid,
            config=cfg,
            scribbles=ScribbleMask.empty(grid.width, grid.height),
        )
        session.precomputed(cfg)  # eager: first segment call stays fast
        store.add(session)
        return {"id": session.id, "width": grid.width, "height": grid.height,
                "cluster_objective": (
                    session.pre_cache[next(iter(session.pre_cache))].model.objective
                    if cfg.degree > 0 else None)}

    @app.put("/sessions/{sid}/scribbles", status_code=204)
    async def update_scribbles(sid: str, payload: dict):
        session = store.get(sid)
        if session is None:
            return _not_found()
        try:
            strokes = _validate_strokes(payload.get("strokes", []))
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        with session.lock:
            session.scribbles = rasterize_strokes(session.scribbles, strokes)
        return Response(status_code=204)

    @app.post("/sessions/{sid}/segment")
    def segment_session(sid: str, payload: dict | None = None):
        session = store.get(sid)
        if session is None:
            return _not_found()
        payload = payload or {}
        resample = bool(payload.pop("resample", False))
        try:
            cfg = config_from_mapping(payload, session.config)
        except ConfigError as exc:
            return JSONResponse(status_code=400,
                                content={"detail": f"bad override: {exc}"})
        with session.lock:
            sample_seed = None
            if resample:
                sample_seed = int(np.random.default_rng().integers(2 ** 31))
            pre = session.precomputed(cfg)
            try:
                mask, report = segment(session.image, session.scribbles, cfg,
                                       pre=pre, sample_seed=sample_seed)
            except MissingSeedsError as exc:
                return JSONResponse(status_code=409,
                                    content={"detail": str(exc)})
            png = mask_png_bytes(mask)
            session.last_mask_png = png
        d = report.to_dict()
        return {
            "mask_png_base64": base64.b64encode(png).decode("ascii"),
            "energy": d["energy"],
            "degree_mean": d["degree"]["mean_degree"],
            "edges": d["edges"],
            "gamma": d["gamma"],
            "seed": d["seed"],
            "bounds": {k: d["degree"][k]
                       for k in ("p_lower", "p_upper", "implied_p",
                                 "lower_ok", "upper_ok", "epsilon")},
            "timings": d["timings_ms"],
            "config": d["config"],
        }

    @app.get("/sessions/{sid}/mask")
    def get_mask(sid: str):
        session = store.get(sid)
        if session is None or session.last_mask_png is None:
            return _not_found()
        return Response(content=session.last_mask_png, media_type="image/png")

    @app.delete("/sessions/{sid}", status_code=204)
    def delete_session(sid: str):
        if not store.remove(sid):
            return _not_found()
        return Response(status_code=204)

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")
    return app


def main():  # pragma: no cover - manual entry point
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="sparsecrf session service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--static", default=None,
                        help="directory of UI assets to serve at /")
    args = parser.parse_args()
    uvicorn.run(create_app(static_dir=args.static), host=args.host,
                port=args.port)


if __name__ == "__main__":  # pragma: no cover
    main()
