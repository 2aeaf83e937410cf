"""File-backed document store for trips, geometry, and the dataset manifest.

Layout of a dataset directory:

    manifest.json       dataset summary (models, counts, schema version)
    trips.jsonl         one Trip document per line, derived fields included
    segments.geojson    street network (geomatch GeoJSON profile)
    regions.geojson     zipcode regions
    config.json         ingest configuration used to derive the documents
    frames/<trip>/<idx>.png   optional frame images

trips.jsonl is append-only for put_trip; all floats are quantized to
9 significant digits before encoding so writes are reproducible.
Single writer, many readers; the HTTP service opens read-only.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

from .core import ActionId, FrameDoc, SpatialConditions, Trip, validate_scores
from .errors import ConflictError, DatasetLoadError, InputValidationError, NotFoundError
from .geomatch import (
    LatLon,
    Region,
    StreetSegment,
    regions_from_geojson,
    regions_to_geojson,
    streets_from_geojson,
    streets_to_geojson,
)

SCHEMA_VERSION = 1

MANIFEST_FILE = "manifest.json"
TRIPS_FILE = "trips.jsonl"
SEGMENTS_FILE = "segments.geojson"
REGIONS_FILE = "regions.geojson"


def q9(x: float) -> float:
    """Quantize a float to 9 significant digits (~1 cm for GPS degrees)."""
    return float(f"{float(x):.9g}")


@dataclass
class DatasetManifest:
    models: list[str]
    counts: dict[str, int]
    created_at: str
    schema_version: int = SCHEMA_VERSION

    def to_obj(self) -> dict:
        return {
            "models": list(self.models),
            "counts": dict(self.counts),
            "created_at": self.created_at,
            "schema_version": self.schema_version,
        }

    @staticmethod
    def from_obj(obj: dict) -> "DatasetManifest":
        return DatasetManifest(
            models=list(obj["models"]),
            counts={k: int(v) for k, v in obj["counts"].items()},
            created_at=str(obj["created_at"]),
            schema_version=int(obj["schema_version"]),
        )


# --- document (de)serialization ------------------------------------------------

def frame_to_obj(f: FrameDoc) -> dict:
    return {
        "trip_id": f.trip_id,
        "frame_idx": f.frame_idx,
        "timestamp": f.timestamp,
        "location": {"lat": q9(f.location.lat), "lon": q9(f.location.lon)},
        "speed": q9(f.speed),
        "actual": f.actual.label,
        "scores": {m: [q9(v) for v in f.scores[m]] for m in sorted(f.scores)},
        "predicted": {m: f.predicted[m].label for m in sorted(f.predicted)},
        "correct": {m: f.correct[m] for m in sorted(f.correct)},
        "perplexity": {m: q9(f.perplexity[m]) for m in sorted(f.perplexity)},
        "segment_id": f.segment_id,
        "region_id": f.region_id,
    }


def frame_from_obj(obj: dict) -> FrameDoc:
    loc = obj["location"]
    return FrameDoc(
        trip_id=str(obj["trip_id"]),
        frame_idx=int(obj["frame_idx"]),
        timestamp=int(obj["timestamp"]),
        location=LatLon(float(loc["lat"]), float(loc["lon"])),
        speed=float(obj["speed"]),
        actual=ActionId.from_label(obj["actual"]),
        scores={m: validate_scores(v) for m, v in obj["scores"].items()},
        predicted={m: ActionId.from_label(v) for m, v in obj.get("predicted", {}).items()},
        correct={m: bool(v) for m, v in obj.get("correct", {}).items()},
        perplexity={m: float(v) for m, v in obj.get("perplexity", {}).items()},
        segment_id=obj.get("segment_id"),
        region_id=obj.get("region_id"),
    )


def trip_to_obj(t: Trip) -> dict:
    return {
        "trip_id": t.trip_id,
        "conditions": {
            "time_of_day": t.conditions.time_of_day.value,
            "weather": t.conditions.weather.value,
            "street_scene": t.conditions.street_scene.value,
        },
        "agg": {
            m: {
                "accuracy": q9(t.agg[m]["accuracy"]),
                "mean_perplexity": q9(t.agg[m]["mean_perplexity"]),
            }
            for m in sorted(t.agg)
        },
        "frames": [frame_to_obj(f) for f in t.frames],
    }


def trip_from_obj(obj: dict) -> Trip:
    cond = obj.get("conditions", {})
    trip = Trip(
        trip_id=str(obj["trip_id"]),
        conditions=SpatialConditions.parse(
            cond.get("time_of_day"), cond.get("weather"), cond.get("street_scene")
        ),
        frames=[frame_from_obj(fo) for fo in obj["frames"]],
        agg={
            m: {"accuracy": float(v["accuracy"]), "mean_perplexity": float(v["mean_perplexity"])}
            for m, v in obj.get("agg", {}).items()
        },
    )
    trip.validate()
    return trip


def _dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


class DatasetStore:
    """Read/write access to one dataset directory."""

    def __init__(self, root: str | Path, create: bool = False):
        self.root = Path(root)
        self._trips: dict[str, Trip] = {}
        self._segments: list[StreetSegment] = []
        self._regions: list[Region] = []
        self.manifest: DatasetManifest | None = None
        if create:
            self.root.mkdir(parents=True, exist_ok=True)
            (self.root / TRIPS_FILE).touch()
        elif not self.root.is_dir():
            raise DatasetLoadError("dataset directory does not exist", path=str(self.root))

    # -- trips -----------------------------------------------------------------

    def put_trip(self, trip: Trip) -> None:
        trip.validate()
        if trip.trip_id in self._trips:
            raise ConflictError(f"trip {trip.trip_id!r} already stored")
        line = _dumps(trip_to_obj(trip))
        with open(self.root / TRIPS_FILE, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
        self._trips[trip.trip_id] = trip

    def get_trip(self, trip_id: str) -> Trip:
        try:
            return self._trips[trip_id]
        except KeyError:
            raise NotFoundError(f"trip {trip_id!r} not found") from None

    def iter_frames(self, trip_id: str | None = None) -> Iterator[FrameDoc]:
        """Frames in (trip_id, frame_idx) order, optionally for one trip."""
        if trip_id is not None:
            yield from self.get_trip(trip_id).frames
            return
        for tid in sorted(self._trips):
            yield from self._trips[tid].frames

    @property
    def trips(self) -> list[Trip]:
        return [self._trips[tid] for tid in sorted(self._trips)]

    # -- geometry ----------------------------------------------------------------

    def put_geometry(self, segments: Iterable[StreetSegment], regions: Iterable[Region]) -> None:
        self._segments = list(segments)
        self._regions = list(regions)
        ids = [s.segment_id for s in self._segments]
        if len(ids) != len(set(ids)):
            raise InputValidationError("duplicate segment ids")
        rids = [r.region_id for r in self._regions]
        if len(rids) != len(set(rids)):
            raise InputValidationError("duplicate region ids")
        (self.root / SEGMENTS_FILE).write_text(
            _dumps(streets_to_geojson(self._segments)), encoding="utf-8"
        )
        (self.root / REGIONS_FILE).write_text(
            _dumps(regions_to_geojson(self._regions)), encoding="utf-8"
        )

    @property
    def segments(self) -> list[StreetSegment]:
        return self._segments

    @property
    def regions(self) -> list[Region]:
        return self._regions

    # -- manifest ----------------------------------------------------------------

    def write_manifest(self, models: Iterable[str]) -> DatasetManifest:
        self.manifest = DatasetManifest(
            models=sorted(models),
            counts={
                "trips": len(self._trips),
                "frames": sum(len(t.frames) for t in self._trips.values()),
                "segments": len(self._segments),
                "regions": len(self._regions),
            },
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        (self.root / MANIFEST_FILE).write_text(
            json.dumps(self.manifest.to_obj(), indent=2), encoding="utf-8"
        )
        return self.manifest

    # -- loading -----------------------------------------------------------------

    @classmethod
    def load(cls, root: str | Path) -> "DatasetStore":
        store = cls(root)
        manifest_path = store.root / MANIFEST_FILE
        if not manifest_path.is_file():
            raise DatasetLoadError("manifest.json missing", path=str(manifest_path))
        try:
            store.manifest = DatasetManifest.from_obj(json.loads(manifest_path.read_text()))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise DatasetLoadError(f"corrupt manifest: {e}", path=str(manifest_path)) from None

        trips_path = store.root / TRIPS_FILE
        if trips_path.is_file():
            with open(trips_path, encoding="utf-8") as fh:
                for line_no, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        trip = trip_from_obj(json.loads(line))
                    except (json.JSONDecodeError, KeyError, TypeError, ValueError,
                            InputValidationError) as e:
                        raise DatasetLoadError(
                            f"corrupt trip record: {e}", path=str(trips_path), line=line_no
                        ) from None
                    if trip.trip_id in store._trips:
                        raise DatasetLoadError(
                            f"duplicate trip {trip.trip_id!r}", path=str(trips_path), line=line_no
                        )
                    store._trips[trip.trip_id] = trip

        for fname, loader, target in (
            (SEGMENTS_FILE, streets_from_geojson, "_segments"),
            (REGIONS_FILE, regions_from_geojson, "_regions"),
        ):
            path = store.root / fname
            if path.is_file():
                try:
                    obj = json.loads(path.read_text())
                except json.JSONDecodeError as e:
                    raise DatasetLoadError(
                        f"corrupt GeoJSON: {e.msg}", path=str(path), line=e.lineno
                    ) from None
                setattr(store, target, loader(obj, path=str(path)))
        return store

    def load_all(self) -> tuple[DatasetManifest | None, list[Trip], list[StreetSegment], list[Region]]:
        return self.manifest, self.trips, self._segments, self._regions

    def frame_image_path(self, trip_id: str, frame_idx: int) -> Path:
        return self.root / "frames" / trip_id / f"{frame_idx}.png"

    def rewrite_trips(self, trips: Iterable[Trip]) -> None:
        """Replace all trip records (used by recompute; not append-only)."""
        tmp = self.root / (TRIPS_FILE + ".tmp")
        new: dict[str, Trip] = {}
        with open(tmp, "w", encoding="utf-8") as fh:
            for trip in trips:
                trip.validate()
                if trip.trip_id in new:
                    raise ConflictError(f"duplicate trip {trip.trip_id!r}")
                fh.write(_dumps(trip_to_obj(trip)) + "\n")
                new[trip.trip_id] = trip
        tmp.replace(self.root / TRIPS_FILE)
        self._trips = new
