"""Raw-trip ingestion, derivation of per-frame fields, synthetic data generation.

Raw trip line schema (JSON Lines):

    {"trip_id": str, "weather": str, "time_of_day": str, "street_scene": str,
     "frames": [{"t": int_ms, "lat": f, "lon": f, "speed_mps": f,
                 "actual": str, "scores": {"<model>": [f, f, f, f]}}]}

All floats are quantized to 9 significant digits on entry so that
derivation, storage, and recomputation agree bit-for-bit.
"""
from __future__ import annotations

import json
import math
import random
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .core import (
    ActionId,
    DEFAULT_PERPLEXITY_WINDOW,
    FrameDoc,
    PROB_FLOOR,
    SpatialConditions,
    StreetScene,
    TimeOfDay,
    Trip,
    Weather,
    frame_accuracy,
    normalize_scores,
    predict_action,
    trip_aggregate,
    validate_scores,
)
from .errors import ConflictError, DatasetLoadError, InputValidationError
from .geomatch import (
    DEFAULT_CELL_DEG,
    DEFAULT_MATCH_RADIUS_M,
    LatLon,
    Region,
    SegmentGrid,
    StreetSegment,
    assign_regions,
    local_unproject,
    regions_from_geojson,
    streets_from_geojson,
)
from .store import DatasetStore, q9

CONFIG_FILE = "config.json"


@dataclass(frozen=True)
class IngestConfig:
    """Tunables shared by ingest, recompute, and the service."""

    match_radius_m: float = DEFAULT_MATCH_RADIUS_M
    grid_cell_deg: float = DEFAULT_CELL_DEG
    kde_bandwidth_m: float = 150.0
    thumbnail_cap: int = 300
    perplexity_window: int = DEFAULT_PERPLEXITY_WINDOW

    def to_obj(self) -> dict:
        return {
            "match_radius_m": self.match_radius_m,
            "grid_cell_deg": self.grid_cell_deg,
            "kde_bandwidth_m": self.kde_bandwidth_m,
            "thumbnail_cap": self.thumbnail_cap,
            "perplexity_window": self.perplexity_window,
        }

    @staticmethod
    def from_obj(obj: dict) -> "IngestConfig":
        cfg = IngestConfig(
            match_radius_m=float(obj.get("match_radius_m", DEFAULT_MATCH_RADIUS_M)),
            grid_cell_deg=float(obj.get("grid_cell_deg", DEFAULT_CELL_DEG)),
            kde_bandwidth_m=float(obj.get("kde_bandwidth_m", 150.0)),
            thumbnail_cap=int(obj.get("thumbnail_cap", 300)),
            perplexity_window=int(obj.get("perplexity_window", DEFAULT_PERPLEXITY_WINDOW)),
        )
        if cfg.match_radius_m <= 0 or cfg.grid_cell_deg <= 0 or cfg.kde_bandwidth_m <= 0:
            raise InputValidationError("config distances must be positive")
        if cfg.thumbnail_cap < 1 or cfg.perplexity_window < 1:
            raise InputValidationError("config counts must be >= 1")
        return cfg


def load_config(path: str | Path | None) -> IngestConfig:
    if path is None:
        return IngestConfig()
    p = Path(path)
    try:
        return IngestConfig.from_obj(json.loads(p.read_text()))
    except FileNotFoundError:
        raise DatasetLoadError("config file not found", path=str(p)) from None
    except json.JSONDecodeError as e:
        raise DatasetLoadError(f"corrupt config: {e.msg}", path=str(p), line=e.lineno) from None


def config_for_dataset(dataset_dir: str | Path) -> IngestConfig:
    """Config stored alongside a dataset, or defaults when absent."""
    p = Path(dataset_dir) / CONFIG_FILE
    return load_config(p) if p.is_file() else IngestConfig()


# --- raw parsing ---------------------------------------------------------------

def parse_raw_trip(obj: dict) -> Trip:
    """Build an underived Trip from one raw record; floats are quantized."""
    if not isinstance(obj, dict):
        raise InputValidationError("raw trip record must be an object")
    trip_id = obj.get("trip_id")
    if not isinstance(trip_id, str) or not trip_id:
        raise InputValidationError("raw trip missing trip_id")
    conditions = SpatialConditions.parse(
        obj.get("time_of_day"), obj.get("weather"), obj.get("street_scene")
    )
    raw_frames = obj.get("frames")
    if not isinstance(raw_frames, list) or not raw_frames:
        raise InputValidationError(f"trip {trip_id}: frames must be a non-empty list")
    frames: list[FrameDoc] = []
    for i, rf in enumerate(raw_frames):
        try:
            scores = {
                str(m): validate_scores([q9(v) for v in vec])
                for m, vec in rf["scores"].items()
            }
            if not scores:
                raise InputValidationError("no model scores")
            speed = q9(rf["speed_mps"])
            if not math.isfinite(speed) or speed < 0:
                raise InputValidationError(f"bad speed {rf['speed_mps']}")
            frames.append(
                FrameDoc(
                    trip_id=trip_id,
                    frame_idx=i,
                    timestamp=int(rf["t"]),
                    location=LatLon(q9(rf["lat"]), q9(rf["lon"])),
                    speed=speed,
                    actual=ActionId.from_label(str(rf["actual"])),
                    scores=scores,
                )
            )
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise InputValidationError(f"trip {trip_id}: frame {i}: {e}") from None
        except InputValidationError as e:
            raise InputValidationError(f"trip {trip_id}: frame {i}: {e}") from None
    trip = Trip(trip_id=trip_id, conditions=conditions, frames=frames)
    trip.validate()
    return trip


# --- derivation ------------------------------------------------------------------

def derive_trip(
    trip: Trip,
    models: Sequence[str],
    matcher: SegmentGrid | None,
    regions: Sequence[Region],
    config: IngestConfig,
) -> int:
    """Fill predicted/correct/perplexity/segment/region on every frame.

    Returns the number of frames left without a street match. Perplexity
    values and aggregates are quantized so they survive storage unchanged.
    """
    frame_models = set(trip.frames[0].scores.keys())
    if frame_models != set(models):
        raise InputValidationError(
            f"trip {trip.trip_id}: model set {sorted(frame_models)} does not match "
            f"dataset models {sorted(models)}"
        )
    for f in trip.frames:
        if set(f.scores.keys()) != frame_models:
            raise InputValidationError(
                f"trip {trip.trip_id}: frame {f.frame_idx}: inconsistent model set"
            )

    # log(argmax probability) per frame per model, summed over the trailing
    # window in frame order: identical arithmetic to core.perplexity_window.
    log_p: dict[str, list[float]] = {m: [] for m in models}
    for f in trip.frames:
        for m in models:
            probs = normalize_scores(f.scores[m])
            log_p[m].append(math.log(max(max(probs), PROB_FLOOR)))
            pred = predict_action(f.scores[m])
            f.predicted[m] = pred
            f.correct[m] = bool(frame_accuracy(pred, f.actual))
    for i, f in enumerate(trip.frames):
        n = min(config.perplexity_window, i + 1)
        for m in models:
            total = 0.0
            for k in range(i - n + 1, i + 1):
                total += log_p[m][k]
            f.perplexity[m] = q9(math.exp(-total / n))

    unmatched = 0
    for f in trip.frames:
        hit = matcher.match(f.location, config.match_radius_m) if matcher else None
        if hit is None:
            f.segment_id = None
            unmatched += 1
        else:
            f.segment_id = hit[0]
    for sl in assign_regions(trip, regions):
        for i in range(sl.start, sl.end):
            trip.frames[i].region_id = sl.region_id

    trip.agg = {}
    for m in models:
        agg = trip_aggregate(trip, m)
        trip.agg[m] = {
            "accuracy": q9(agg["accuracy"]),
            "mean_perplexity": q9(agg["mean_perplexity"]),
        }
    return unmatched


@dataclass
class IngestReport:
    trips: int = 0
    frames: int = 0
    unmatched_frames: int = 0
    errors: list[dict] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "trips": self.trips,
            "frames": self.frames,
            "unmatched_frames": self.unmatched_frames,
            "errors": self.errors,
        }


def _raw_files(raw_path: Path) -> list[Path]:
    if raw_path.is_file():
        return [raw_path]
    if raw_path.is_dir():
        files = sorted(raw_path.glob("*.jsonl"))
        if not files:
            raise DatasetLoadError("no .jsonl files in raw directory", path=str(raw_path))
        return files
    raise DatasetLoadError("raw path does not exist", path=str(raw_path))


def ingest_trips(
    raw_path: str | Path,
    segments: Sequence[StreetSegment],
    regions: Sequence[Region],
    out_dir: str | Path,
    config: IngestConfig | None = None,
) -> IngestReport:
    """Parse raw records, derive every per-frame field, and populate a dataset.

    Trips with any invalid frame are rejected whole and listed in the
    report's errors; valid trips are stored with derived fields included.
    """
    config = config or IngestConfig()
    raw_path = Path(raw_path)
    store = DatasetStore(out_dir, create=True)
    store.put_geometry(segments, regions)
    matcher = SegmentGrid(segments, config.grid_cell_deg) if segments else None
    regions_sorted = sorted(regions, key=lambda r: r.region_id)

    report = IngestReport()
    models: list[str] | None = None
    for path in _raw_files(raw_path):
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                trip_id = None
                try:
                    obj = json.loads(line)
                    trip_id = obj.get("trip_id") if isinstance(obj, dict) else None
                    trip = parse_raw_trip(obj)
                    if models is None:
                        models = sorted(trip.frames[0].scores.keys())
                    unmatched = derive_trip(trip, models, matcher, regions_sorted, config)
                    store.put_trip(trip)
                except json.JSONDecodeError as e:
                    report.errors.append(
                        {"trip_id": trip_id, "file": str(path), "line": line_no,
                         "error": f"malformed JSON: {e.msg}"}
                    )
                    continue
                except (InputValidationError, ConflictError) as e:
                    report.errors.append(
                        {"trip_id": trip_id, "file": str(path), "line": line_no,
                         "error": str(e)}
                    )
                    continue
                report.trips += 1
                report.frames += len(trip.frames)
                report.unmatched_frames += unmatched

    store.write_manifest(models or [])
    (store.root / CONFIG_FILE).write_text(
        json.dumps(config.to_obj(), indent=2), encoding="utf-8"
    )
    frames_src = (raw_path if raw_path.is_dir() else raw_path.parent) / "frames"
    if frames_src.is_dir():
        frames_dst = store.root / "frames"
        if frames_dst.exists():
            shutil.rmtree(frames_dst)
        shutil.copytree(frames_src, frames_dst)
    return report


# --- recompute ---------------------------------------------------------------------

@dataclass
class RecomputeReport:
    trips: int = 0
    frames: int = 0
    trips_changed: int = 0
    frames_changed: int = 0
    segment_changes: int = 0
    region_changes: int = 0
    metric_changes: int = 0

    def to_obj(self) -> dict:
        return self.__dict__.copy()


def recompute_derived(dataset_dir: str | Path, config: IngestConfig) -> RecomputeReport:
    """Re-derive every stored document under a (possibly new) config.

    Idempotent: a second run under the same config changes nothing.
    """
    store = DatasetStore.load(dataset_dir)
    matcher = SegmentGrid(store.segments, config.grid_cell_deg) if store.segments else None
    regions_sorted = sorted(store.regions, key=lambda r: r.region_id)
    models = store.manifest.models if store.manifest else []

    report = RecomputeReport()
    changed_any = False
    for trip in store.trips:
        report.trips += 1
        report.frames += len(trip.frames)
        before = [
            (f.segment_id, f.region_id, dict(f.predicted), dict(f.correct), dict(f.perplexity))
            for f in trip.frames
        ]
        derive_trip(trip, models, matcher, regions_sorted, config)
        trip_changed = False
        for f, (seg, reg, pred, corr, perp) in zip(trip.frames, before):
            frame_changed = False
            if f.segment_id != seg:
                report.segment_changes += 1
                frame_changed = True
            if f.region_id != reg:
                report.region_changes += 1
                frame_changed = True
            if f.predicted != pred or f.correct != corr or f.perplexity != perp:
                report.metric_changes += 1
                frame_changed = True
            if frame_changed:
                report.frames_changed += 1
                trip_changed = True
        if trip_changed:
            report.trips_changed += 1
            changed_any = True
    if changed_any:
        store.rewrite_trips(store.trips)
    (Path(dataset_dir) / CONFIG_FILE).write_text(
        json.dumps(config.to_obj(), indent=2), encoding="utf-8"
    )
    return report


# --- synthetic data -------------------------------------------------------------------

@dataclass(frozen=True)
class GenSpec:
    """Parameters for the synthetic generator; every field has a default."""

    n_trips: int = 100
    frames_per_trip: int = 120
    models: tuple[str, ...] = ("tcnn1", "cnn_lstm", "fcn_lstm")
    accuracy: dict = field(default_factory=dict)          # model -> base accuracy
    weather_accuracy: dict = field(default_factory=dict)  # model -> {weather: accuracy}
    weathers: tuple[str, ...] = ("clear", "snowy", "rainy", "overcast")
    times_of_day: tuple[str, ...] = ("day", "night", "dawn_dusk")
    street_scenes: tuple[str, ...] = ("city_street", "highway", "residential")
    origin: tuple[float, float] = (40.72, -73.99)
    grid_rows: int = 6
    grid_cols: int = 6
    block_m: float = 400.0
    region_rows: int = 2
    region_cols: int = 2
    frame_interval_ms: int = 333
    images: str = "sparse"  # none | sparse | all
    image_stride: int = 10

    @staticmethod
    def from_obj(obj: dict) -> "GenSpec":
        spec = GenSpec(
            n_trips=int(obj.get("n_trips", 100)),
            frames_per_trip=int(obj.get("frames_per_trip", 120)),
            models=tuple(obj.get("models", ("tcnn1", "cnn_lstm", "fcn_lstm"))),
            accuracy=dict(obj.get("accuracy", {})),
            weather_accuracy={
                m: dict(v) for m, v in obj.get("weather_accuracy", {}).items()
            },
            weathers=tuple(obj.get("weathers", ("clear", "snowy", "rainy", "overcast"))),
            times_of_day=tuple(obj.get("times_of_day", ("day", "night", "dawn_dusk"))),
            street_scenes=tuple(obj.get("street_scenes", ("city_street", "highway", "residential"))),
            origin=tuple(obj.get("origin", (40.72, -73.99))),
            grid_rows=int(obj.get("grid_rows", 6)),
            grid_cols=int(obj.get("grid_cols", 6)),
            block_m=float(obj.get("block_m", 400.0)),
            region_rows=int(obj.get("region_rows", 2)),
            region_cols=int(obj.get("region_cols", 2)),
            frame_interval_ms=int(obj.get("frame_interval_ms", 333)),
            images=str(obj.get("images", "sparse")),
            image_stride=int(obj.get("image_stride", 10)),
        )
        spec.check()
        return spec

    def check(self) -> None:
        if self.n_trips < 1 or self.frames_per_trip < 1:
            raise InputValidationError("n_trips and frames_per_trip must be >= 1")
        if not self.models:
            raise InputValidationError("at least one model required")
        if self.images not in ("none", "sparse", "all"):
            raise InputValidationError(f"unknown images mode {self.images!r}")
        for m, acc in self.accuracy.items():
            if not 0.0 <= float(acc) <= 1.0:
                raise InputValidationError(f"planted accuracy for {m} outside [0, 1]")
        for m, per_weather in self.weather_accuracy.items():
            for w, acc in per_weather.items():
                Weather(w)
                if not 0.0 <= float(acc) <= 1.0:
                    raise InputValidationError(
                        f"planted accuracy for {m}/{w} outside [0, 1]"
                    )
        for w in self.weathers:
            Weather(w)
        for t in self.times_of_day:
            TimeOfDay(t)
        for s in self.street_scenes:
            StreetScene(s)

    def planted_accuracy(self, model: str, weather: str) -> float:
        per_weather = self.weather_accuracy.get(model, {})
        if weather in per_weather:
            return float(per_weather[weather])
        return float(self.accuracy.get(model, 0.7))


@dataclass
class GenReport:
    trips: int
    frames: int
    segments: int
    regions: int
    images: int

    def to_obj(self) -> dict:
        return self.__dict__.copy()


_DIRECTIONS = ((0, 1), (1, 0), (0, -1), (-1, 0))  # (drow, dcol): east, north, west, south


def _grid_geometry(spec: GenSpec):
    """Street grid + zipcode tiles centered on the origin, in lat/lon."""
    origin = LatLon(*spec.origin)
    w = spec.grid_cols * spec.block_m
    h = spec.grid_rows * spec.block_m

    def node_latlon(r: int, c: int) -> LatLon:
        return local_unproject(origin, c * spec.block_m - w / 2, r * spec.block_m - h / 2)

    nodes = [
        [node_latlon(r, c) for c in range(spec.grid_cols + 1)]
        for r in range(spec.grid_rows + 1)
    ]
    # Quantize so generated files and re-read geometry agree exactly.
    nodes = [[LatLon(q9(p.lat), q9(p.lon)) for p in row] for row in nodes]

    segments: list[StreetSegment] = []
    scene_values = [s for s in spec.street_scenes]
    k = 0
    for r in range(spec.grid_rows + 1):
        for c in range(spec.grid_cols):
            segments.append(
                StreetSegment(
                    f"h{r:02d}c{c:02d}", [nodes[r][c], nodes[r][c + 1]],
                    scene_values[k % len(scene_values)],
                )
            )
            k += 1
    for r in range(spec.grid_rows):
        for c in range(spec.grid_cols + 1):
            segments.append(
                StreetSegment(
                    f"v{r:02d}c{c:02d}", [nodes[r][c], nodes[r + 1][c]],
                    scene_values[k % len(scene_values)],
                )
            )
            k += 1

    margin = spec.block_m / 2
    regions: list[Region] = []
    tile_w = (w + 2 * margin) / spec.region_cols
    tile_h = (h + 2 * margin) / spec.region_rows
    idx = 0
    for rr in range(spec.region_rows):
        for rc in range(spec.region_cols):
            x0 = -w / 2 - margin + rc * tile_w
            y0 = -h / 2 - margin + rr * tile_h
            corners = [
                local_unproject(origin, x, y)
                for x, y in ((x0, y0), (x0 + tile_w, y0), (x0 + tile_w, y0 + tile_h), (x0, y0 + tile_h))
            ]
            ring = [LatLon(q9(p.lat), q9(p.lon)) for p in corners]
            ring.append(ring[0])
            regions.append(Region(f"10{idx:03d}", [ring]))
            idx += 1
    return origin, nodes, segments, regions, (w, h)


def _walk_positions(spec: GenSpec, rng: random.Random, speed: float) -> list[tuple[float, float]]:
    """Random walk along grid edges; local (x, y) meters, one per frame."""
    w = spec.grid_cols * spec.block_m
    h = spec.grid_rows * spec.block_m
    r = rng.randrange(spec.grid_rows + 1)
    c = rng.randrange(spec.grid_cols + 1)
    legal = [
        (dr, dc)
        for dr, dc in _DIRECTIONS
        if 0 <= r + dr <= spec.grid_rows and 0 <= c + dc <= spec.grid_cols
    ]
    dr, dc = rng.choice(legal)
    pos = 0.0  # meters advanced along the current edge
    dt = spec.frame_interval_ms / 1000.0
    out: list[tuple[float, float]] = []
    for _ in range(spec.frames_per_trip):
        x = (c + dc * pos / spec.block_m) * spec.block_m - w / 2
        y = (r + dr * pos / spec.block_m) * spec.block_m - h / 2
        jx = rng.uniform(-2.0, 2.0)
        jy = rng.uniform(-2.0, 2.0)
        out.append((x + jx, y + jy))
        pos += speed * dt
        while pos >= spec.block_m:
            pos -= spec.block_m
            r += dr
            c += dc
            options = [
                (ndr, ndc)
                for ndr, ndc in _DIRECTIONS
                if (ndr, ndc) != (-dr, -dc)
                and 0 <= r + ndr <= spec.grid_rows
                and 0 <= c + ndc <= spec.grid_cols
            ]
            if not options:
                options = [
                    (ndr, ndc)
                    for ndr, ndc in _DIRECTIONS
                    if 0 <= r + ndr <= spec.grid_rows and 0 <= c + ndc <= spec.grid_cols
                ]
            straight = (dr, dc)
            if straight in options and rng.random() < 0.6:
                dr, dc = straight
            else:
                dr, dc = rng.choice(options)
    return out


_ACTION_WEIGHTS = (
    (ActionId.GO_STRAIGHT, 0.55),
    (ActionId.SLOW_STOP, 0.25),
    (ActionId.TURN_LEFT, 0.10),
    (ActionId.TURN_RIGHT, 0.10),
)


def _pick_action(rng: random.Random) -> ActionId:
    x = rng.random()
    acc = 0.0
    for action, weight in _ACTION_WEIGHTS:
        acc += weight
        if x < acc:
            return action
    return ActionId.TURN_RIGHT


def _make_scores(rng: random.Random, predicted: ActionId) -> list[float]:
    """Raw score vector whose argmax is the chosen action (scale may exceed 1)."""
    conf = rng.uniform(0.55, 0.95)
    weights = [rng.uniform(0.05, 1.0) for _ in range(3)]
    wsum = sum(weights)
    rest = iter((1.0 - conf) * wi / wsum for wi in weights)
    scale = rng.uniform(0.8, 2.5)
    return [
        q9(scale * (conf if ActionId(code) == predicted else next(rest)))
        for code in range(1, 5)
    ]


def _frame_image(trip_idx: int, frame_idx: int, action: ActionId, size: int = 32):
    import numpy as np

    yy, xx = np.mgrid[0:size, 0:size]
    phase = (trip_idx % 17) * 0.37 + (frame_idx // 10) * 0.11
    fx = 1 + int(action)
    fy = 1 + (trip_idx + frame_idx // 20) % 3
    val = (
        128.0
        + 55.0 * np.sin(2 * math.pi * fx * xx / size + phase)
        + 45.0 * np.cos(2 * math.pi * fy * yy / size + 0.5 * phase)
    )
    return np.clip(val, 0, 255).astype("uint8")


def generate_synthetic(seed: int, spec: GenSpec, out_dir: str | Path) -> GenReport:
    """Write a raw trip file plus geometry (and optional frame images).

    Deterministic for a fixed seed: running twice produces byte-identical
    output. Trajectories follow the generated street grid so every frame
    matches a street by construction; per-frame correctness is sampled at
    the planted per-weather accuracy.
    """
    spec.check()
    rng = random.Random(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    origin, _, segments, regions, _ = _grid_geometry(spec)

    from .geomatch import regions_to_geojson, streets_to_geojson

    (out / "streets.geojson").write_text(
        json.dumps(streets_to_geojson(segments), separators=(",", ":")), encoding="utf-8"
    )
    (out / "regions.geojson").write_text(
        json.dumps(regions_to_geojson(regions), separators=(",", ":")), encoding="utf-8"
    )

    n_images = 0
    n_frames = 0
    base_t = 1_600_000_000_000
    with open(out / "trips.jsonl", "w", encoding="utf-8") as fh:
        for ti in range(spec.n_trips):
            trip_id = f"trip{ti:05d}"
            weather = rng.choice(spec.weathers)
            time_of_day = rng.choice(spec.times_of_day)
            scene = rng.choice(spec.street_scenes)
            speed = rng.uniform(5.0, 12.0)
            positions = _walk_positions(spec, rng, speed)
            frames = []
            for fi, (x, y) in enumerate(positions):
                p = local_unproject(origin, x, y)
                actual = _pick_action(rng)
                scores = {}
                for m in spec.models:
                    correct = rng.random() < spec.planted_accuracy(m, weather)
                    if correct:
                        predicted = actual
                    else:
                        predicted = rng.choice([a for a in ActionId if a != actual])
                    scores[m] = _make_scores(rng, predicted)
                frames.append(
                    {
                        "t": base_t + ti * 3_600_000 + fi * spec.frame_interval_ms,
                        "lat": q9(p.lat),
                        "lon": q9(p.lon),
                        "speed_mps": q9(max(0.0, speed + rng.uniform(-0.5, 0.5))),
                        "actual": actual.label,
                        "scores": scores,
                    }
                )
                n_frames += 1
                write_image = spec.images == "all" or (
                    spec.images == "sparse" and fi % spec.image_stride == 0
                )
                if write_image:
                    from PIL import Image

                    img_dir = out / "frames" / trip_id
                    img_dir.mkdir(parents=True, exist_ok=True)
                    Image.fromarray(_frame_image(ti, fi, actual), mode="L").save(
                        img_dir / f"{fi}.png"
                    )
                    n_images += 1
            record = {
                "trip_id": trip_id,
                "weather": weather,
                "time_of_day": time_of_day,
                "street_scene": scene,
                "frames": frames,
            }
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")
    return GenReport(spec.n_trips, n_frames, len(segments), len(regions), n_images)


def ingest_from_files(
    raw_path: str | Path,
    streets_path: str | Path,
    regions_path: str | Path,
    out_dir: str | Path,
    config: IngestConfig | None = None,
) -> IngestReport:
    """Convenience wrapper: load geometry files, then ingest."""
    streets_path = Path(streets_path)
    regions_path = Path(regions_path)
    try:
        segments = streets_from_geojson(
            json.loads(streets_path.read_text()), path=str(streets_path)
        )
    except FileNotFoundError:
        raise DatasetLoadError("streets file not found", path=str(streets_path)) from None
    except json.JSONDecodeError as e:
        raise DatasetLoadError(
            f"corrupt streets GeoJSON: {e.msg}", path=str(streets_path), line=e.lineno
        ) from None
    try:
        regions = regions_from_geojson(
            json.loads(regions_path.read_text()), path=str(regions_path)
        )
    except FileNotFoundError:
        raise DatasetLoadError("regions file not found", path=str(regions_path)) from None
    except json.JSONDecodeError as e:
        raise DatasetLoadError(
            f"corrupt regions GeoJSON: {e.msg}", path=str(regions_path), line=e.lineno
        ) from None
    return ingest_trips(raw_path, segments, regions, out_dir, config)
