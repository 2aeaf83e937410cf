"""Read-only HTTP/JSON API over one dataset directory.

Every endpoint delegates to a module operation and returns deterministic
payloads; errors use the envelope {"error": {"code", "message", "detail"}}.
Ingestion never happens here (single-writer model: use the CLI).
"""
from __future__ import annotations

import os
import time
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse, Response
from pydantic import BaseModel, Field

from . import analytics
from .core import SpatialConditions, Trip
from .errors import (
    AdmGeoError,
    InputValidationError,
    NotFoundError,
    OperationCancelled,
)
from .geomatch import BBox
from .index import QueryEngine, parse_query, resolve_selection
from .ingest import IngestConfig, config_for_dataset
from .store import DatasetStore, frame_to_obj

DEFAULT_BIND = "127.0.0.1:8000"
REQUEST_DEADLINE_S = 30.0

MAX_PAGE_SIZE = 1000


class QueryBody(BaseModel):
    expr: dict
    page: int = Field(default=0, ge=0)
    page_size: int = Field(default=100, ge=1, le=MAX_PAGE_SIZE)


class TripSelectBody(BaseModel):
    models: list[str]
    metric: str
    op: str
    threshold: float


class AggregateBody(BaseModel):
    selection: dict | None = None
    key: str
    models: list[str] | None = None


class CombinationsBody(BaseModel):
    selection: dict | None = None
    models: list[str] | None = None


class HistogramBody(BaseModel):
    selection: dict | None = None
    dimension: str
    model: str | None = None
    items: str = "trips"  # trips | frames


class DensityBody(BaseModel):
    selection: dict | None = None
    bbox: dict
    width: int = Field(ge=1, le=1024)
    height: int = Field(ge=1, le=1024)
    bandwidth_m: float | None = None


class ThumbnailsBody(BaseModel):
    selection: dict | None = None
    k: int = Field(default=24, ge=1)


def _error_response(status: int, code: str, message: str, detail: Any = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error": {"code": code, "message": message, "detail": detail}},
    )


def _frame_key_obj(key: tuple[str, int]) -> dict:
    return {"trip_id": key[0], "frame_idx": key[1]}


class ServiceState:
    """Immutable dataset snapshot shared by all requests."""

    def __init__(self, dataset_dir: str | Path, config: IngestConfig | None = None):
        self.dataset_dir = Path(dataset_dir)
        self.store = DatasetStore.load(self.dataset_dir)
        self.config = config or config_for_dataset(self.dataset_dir)
        self.engine = QueryEngine(
            self.store.trips,
            self.store.segments,
            self.store.regions,
            cell_size=self.config.grid_cell_deg,
            match_radius_m=self.config.match_radius_m,
        )
        self.conditions: dict[str, SpatialConditions] = {
            t.trip_id: t.conditions for t in self.store.trips
        }
        self.models = list(self.store.manifest.models) if self.store.manifest else []

    def frames_for(self, selection: dict | None):
        keys = resolve_selection(self.engine, selection)
        return keys, [self.engine.frames[k] for k in keys]

    def trips_for(self, selection: dict | None) -> list[Trip]:
        keys = resolve_selection(self.engine, selection)
        trip_ids = sorted({k[0] for k in keys})
        return [self.engine.trips[t] for t in trip_ids]

    def check_models(self, models: list[str] | None) -> list[str]:
        if models is None:
            return self.models
        for m in models:
            if m not in self.models:
                raise InputValidationError(f"unknown model {m!r}")
        return models


def create_app(dataset_dir: str | Path, config: IngestConfig | None = None) -> FastAPI:
    state = ServiceState(dataset_dir, config)
    app = FastAPI(title="admgeo", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[os.environ.get("ADMGEO_UI_ORIGIN", "*")],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(AdmGeoError)
    async def _admgeo_error(request: Request, exc: AdmGeoError):
        if isinstance(exc, NotFoundError):
            return _error_response(404, "not_found", str(exc))
        if isinstance(exc, OperationCancelled):
            return _error_response(503, "cancelled", "request exceeded its deadline")
        if isinstance(exc, InputValidationError):
            return _error_response(400, "validation", str(exc))
        return _error_response(500, "internal", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _body_error(request: Request, exc: RequestValidationError):
        return _error_response(400, "validation", "invalid request body", exc.errors())

    def deadline_cancel():
        t0 = time.monotonic()
        return lambda: time.monotonic() - t0 > REQUEST_DEADLINE_S

    @app.get("/health")
    def health():
        return {"status": "ok", "frames": len(state.engine.frames)}

    @app.get("/manifest")
    def manifest():
        if state.store.manifest is None:
            raise NotFoundError("dataset has no manifest")
        return state.store.manifest.to_obj()

    @app.post("/query")
    def query(body: QueryBody):
        keys = state.engine.query_frames(parse_query(body.expr))
        start = body.page * body.page_size
        page_keys = keys[start : start + body.page_size]
        return {
            "total": len(keys),
            "page": body.page,
            "page_size": body.page_size,
            "ids": [_frame_key_obj(k) for k in page_keys],
            "docs": [frame_to_obj(state.engine.frames[k]) for k in page_keys],
        }

    @app.post("/trips/select")
    def trips_select(body: TripSelectBody):
        trip_ids = state.engine.query_trips_by_metric(
            body.models, body.metric, body.op, body.threshold
        )
        return {
            "trip_ids": trip_ids,
            "aggregates": {t: state.engine.trips[t].agg for t in trip_ids},
        }

    @app.post("/aggregate")
    def aggregate(body: AggregateBody):
        models = state.check_models(body.models)
        _, frames = state.frames_for(body.selection)
        reports = analytics.aggregate_by(frames, body.key, models, state.conditions)
        return {"key": body.key, "reports": [r.to_obj() for r in reports]}

    @app.post("/combinations")
    def combinations(body: CombinationsBody):
        models = state.check_models(body.models)
        _, frames = state.frames_for(body.selection)
        return analytics.combination_table(frames, models).to_obj()

    @app.post("/histogram")
    def histogram(body: HistogramBody):
        if body.items not in ("trips", "frames"):
            raise InputValidationError(f"items must be 'trips' or 'frames', got {body.items!r}")
        if body.model is not None:
            state.check_models([body.model])
        items: Any
        if body.items == "trips":
            items = state.trips_for(body.selection)
        else:
            _, items = state.frames_for(body.selection)
        rows = analytics.histogram(items, body.dimension, body.model, state.conditions)
        return {"dimension": body.dimension, "items": body.items,
                "rows": [{"label": lb, "count": c} for lb, c in rows]}

    @app.post("/density")
    def density(body: DensityBody):
        try:
            bbox = BBox(
                float(body.bbox["min_lat"]),
                float(body.bbox["min_lon"]),
                float(body.bbox["max_lat"]),
                float(body.bbox["max_lon"]),
            )
        except (KeyError, TypeError, ValueError):
            raise InputValidationError(
                "bbox must carry numeric min_lat/min_lon/max_lat/max_lon"
            ) from None
        _, frames = state.frames_for(body.selection)
        raster = analytics.kde_raster(
            [f.location for f in frames],
            bbox,
            body.width,
            body.height,
            body.bandwidth_m if body.bandwidth_m is not None else state.config.kde_bandwidth_m,
            cancel=deadline_cancel(),
        )
        return raster.to_obj()

    @app.post("/thumbnails")
    def thumbnails(body: ThumbnailsBody):
        keys, frames = state.frames_for(body.selection)
        cancel = deadline_cancel()
        items = []
        for key, frame in zip(keys, frames):
            if cancel():
                raise OperationCancelled("thumbnail preparation exceeded the deadline")
            path = state.store.frame_image_path(*key)
            img = None
            if path.is_file():
                img = analytics.GrayImage.from_file(path).thumbnail()
            items.append((key, img))
        result = analytics.select_representatives(
            items, body.k, cap=state.config.thumbnail_cap, cancel=cancel
        )
        return {
            "frames": [_frame_key_obj(k) for k in result.keys],
            "image_urls": [f"/frames/{k[0]}/{k[1]}/image" for k in result.keys],
            "docs": [frame_to_obj(state.engine.frames[k]) for k in result.keys],
            "skipped_missing": result.skipped_missing,
        }

    @app.get("/trips/{trip_id}/timeline")
    def timeline(trip_id: str):
        trip = state.store.get_trip(trip_id)
        return analytics.trip_timeline(trip)

    @app.get("/frames/{trip_id}/{frame_idx}/image")
    def frame_image(trip_id: str, frame_idx: int):
        if (trip_id, frame_idx) not in state.engine.frames:
            raise NotFoundError(f"frame {trip_id}/{frame_idx} not found")
        path = state.store.frame_image_path(trip_id, frame_idx)
        if not path.is_file():
            raise NotFoundError(f"no image for frame {trip_id}/{frame_idx}")
        return FileResponse(path, media_type="image/png")

    @app.get("/geometry/streets")
    def geometry_streets():
        path = state.dataset_dir / "segments.geojson"
        if not path.is_file():
            raise NotFoundError("dataset has no streets file")
        return Response(path.read_bytes(), media_type="application/geo+json")

    @app.get("/geometry/regions")
    def geometry_regions():
        path = state.dataset_dir / "regions.geojson"
        if not path.is_file():
            raise NotFoundError("dataset has no regions file")
        return Response(path.read_bytes(), media_type="application/geo+json")

    return app


def serve(dataset_dir: str | Path, bind_addr: str = DEFAULT_BIND) -> None:
    """Load the dataset and serve until interrupted."""
    import uvicorn

    host, _, port = bind_addr.partition(":")
    if not host or not port.isdigit():
        raise InputValidationError(f"bind address must be host:port, got {bind_addr!r}")
    app = create_app(dataset_dir)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
