"""Aggregation reports, combination tables, histograms, KDE rasters, and
SSIM-driven representative-frame selection.

All operations are pure over immutable snapshots. Long-running raster and
selection loops accept an optional ``cancel`` callable checked between
outer-loop iterations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .core import (
    BIN_LABELS,
    FrameDoc,
    SpatialConditions,
    StreetScene,
    TimeOfDay,
    Trip,
    Weather,
    metric_bin,
)
from .errors import InputValidationError, MetricDomainError, NotFoundError, OperationCancelled
from .geomatch import BBox, EARTH_RADIUS_M, LatLon, local_project

FrameKey = tuple[str, int]
CancelFn = Callable[[], bool]

UNMATCHED_GROUP = "unmatched"

AGGREGATE_KEYS = ("region", "street", "weather", "time_of_day", "street_type", "actual_action")

_CONDITION_DOMAINS = {
    "weather": tuple(v.value for v in Weather),
    "time_of_day": tuple(v.value for v in TimeOfDay),
    "street_type": tuple(v.value for v in StreetScene),
}


def _check_cancel(cancel: CancelFn | None) -> None:
    if cancel is not None and cancel():
        raise OperationCancelled("operation cancelled")


@dataclass
class GroupStats:
    count: int = 0
    n_correct: int = 0
    perp_sum: float = 0.0

    @property
    def accuracy(self) -> float | None:
        return self.n_correct / self.count if self.count else None

    @property
    def mean_perplexity(self) -> float | None:
        return self.perp_sum / self.count if self.count else None

    def to_obj(self) -> dict:
        return {
            "count": self.count,
            "accuracy": self.accuracy,
            "mean_perplexity": self.mean_perplexity,
        }


@dataclass
class AggregateReport:
    """Per-model and pooled statistics for one group key value."""

    group_key: str
    per_model: dict[str, GroupStats]
    combined: GroupStats

    def to_obj(self) -> dict:
        return {
            "group_key": self.group_key,
            "per_model": {m: self.per_model[m].to_obj() for m in sorted(self.per_model)},
            "combined": self.combined.to_obj(),
        }


def _frame_group(
    frame: FrameDoc, key: str, trip_conditions: Mapping[str, SpatialConditions] | None
) -> str:
    if key == "region":
        return frame.region_id if frame.region_id is not None else UNMATCHED_GROUP
    if key == "street":
        return frame.segment_id if frame.segment_id is not None else UNMATCHED_GROUP
    if key == "actual_action":
        return frame.actual.label
    if key in _CONDITION_DOMAINS:
        if trip_conditions is None:
            raise InputValidationError(f"aggregating by {key} requires trip conditions")
        cond = trip_conditions[frame.trip_id]
        return {
            "weather": cond.weather.value,
            "time_of_day": cond.time_of_day.value,
            "street_type": cond.street_scene.value,
        }[key]
    raise InputValidationError(f"unknown aggregation key {key!r}")


def aggregate_by(
    frames: Iterable[FrameDoc],
    key: str,
    models: Sequence[str],
    trip_conditions: Mapping[str, SpatialConditions] | None = None,
) -> list[AggregateReport]:
    """One report per distinct key value present, sorted by group key.

    Frames lacking a region/segment fall into the "unmatched" group so
    pooled totals stay consistent with the ungrouped population.
    """
    if not models:
        raise InputValidationError("at least one model required")
    groups: dict[str, dict[str, GroupStats]] = {}
    for f in frames:
        g = _frame_group(f, key, trip_conditions)
        per_model = groups.setdefault(g, {m: GroupStats() for m in models})
        for m in models:
            st = per_model[m]
            st.count += 1
            st.n_correct += 1 if f.correct[m] else 0
            st.perp_sum += f.perplexity[m]
    reports = []
    for g in sorted(groups):
        per_model = groups[g]
        combined = GroupStats(
            count=sum(s.count for s in per_model.values()),
            n_correct=sum(s.n_correct for s in per_model.values()),
            perp_sum=sum(s.perp_sum for s in per_model.values()),
        )
        reports.append(AggregateReport(g, per_model, combined))
    return reports


@dataclass
class CombinationTable:
    """Counts of frames per boolean correctness pattern over the model list."""

    models: list[str]
    rows: list[tuple[tuple[bool, ...], int]]
    total: int

    def to_obj(self) -> dict:
        return {
            "models": list(self.models),
            "rows": [
                {"pattern": dict(zip(self.models, pattern)), "count": count}
                for pattern, count in self.rows
            ],
            "total": self.total,
        }


def combination_table(frames: Iterable[FrameDoc], models: Sequence[str]) -> CombinationTable:
    """All 2^M patterns in canonical order (all-false first, all-true last)."""
    models = list(models)
    if len(models) > 8:
        raise InputValidationError(f"combination table limited to 8 models, got {len(models)}")
    counts: dict[tuple[bool, ...], int] = {
        pattern: 0 for pattern in product((False, True), repeat=len(models))
    }
    total = 0
    for f in frames:
        pattern = tuple(bool(f.correct[m]) for m in models)
        counts[pattern] += 1
        total += 1
    return CombinationTable(models, sorted(counts.items()), total)


HISTOGRAM_DIMENSIONS = ("accuracy_bin", "perplexity_bin", "weather", "time_of_day", "street_type")


def histogram(
    items: Sequence[Trip] | Sequence[FrameDoc],
    dimension: str,
    model: str | None = None,
    trip_conditions: Mapping[str, SpatialConditions] | None = None,
) -> list[tuple[str, int]]:
    """Counts per label over a fixed domain; zero-count labels are included.

    Trips bin their aggregate metrics; frames bin their own perplexity and
    0/1 accuracy. Condition dimensions read the (trip-level) conditions.
    """
    if dimension in ("accuracy_bin", "perplexity_bin"):
        labels: tuple[str, ...] = BIN_LABELS
        if model is None:
            raise InputValidationError(f"dimension {dimension!r} requires a model")
    elif dimension in _CONDITION_DOMAINS:
        labels = _CONDITION_DOMAINS[dimension]
    else:
        raise InputValidationError(f"unknown histogram dimension {dimension!r}")

    counts = {label: 0 for label in labels}
    for item in items:
        if dimension == "accuracy_bin":
            if isinstance(item, Trip):
                label = metric_bin(item.agg[model]["accuracy"], "accuracy")
            else:
                label = metric_bin(1.0 if item.correct[model] else 0.0, "accuracy")
        elif dimension == "perplexity_bin":
            if isinstance(item, Trip):
                label = metric_bin(item.agg[model]["mean_perplexity"], "perplexity")
            else:
                label = metric_bin(item.perplexity[model], "perplexity")
        else:
            if isinstance(item, Trip):
                cond = item.conditions
            else:
                if trip_conditions is None:
                    raise InputValidationError(
                        f"frame histogram by {dimension} requires trip conditions"
                    )
                cond = trip_conditions[item.trip_id]
            label = {
                "weather": cond.weather.value,
                "time_of_day": cond.time_of_day.value,
                "street_type": cond.street_scene.value,
            }[dimension]
        counts[label] += 1
    return [(label, counts[label]) for label in labels]


# --- kernel density raster ------------------------------------------------------

@dataclass
class DensityRaster:
    """Gaussian KDE over a lat/lon window; row 0 is the northern edge."""

    bbox: BBox
    width: int
    height: int
    bandwidth_m: float
    values: np.ndarray  # shape (height, width), points per square meter

    @property
    def cell_area_m2(self) -> float:
        c = self.bbox.center
        dlat = (self.bbox.max_lat - self.bbox.min_lat) / self.height
        dlon = (self.bbox.max_lon - self.bbox.min_lon) / self.width
        rad = math.pi / 180.0
        return (EARTH_RADIUS_M * dlat * rad) * (EARTH_RADIUS_M * dlon * rad * math.cos(c.lat * rad))

    def to_obj(self) -> dict:
        from .store import q9

        return {
            "bbox": {
                "min_lat": self.bbox.min_lat,
                "min_lon": self.bbox.min_lon,
                "max_lat": self.bbox.max_lat,
                "max_lon": self.bbox.max_lon,
            },
            "width": self.width,
            "height": self.height,
            "bandwidth_m": self.bandwidth_m,
            "values": [q9(v) for v in self.values.ravel().tolist()],
        }


def kde_raster(
    points: Sequence[LatLon],
    bbox: BBox,
    width: int,
    height: int,
    bandwidth_m: float,
    cancel: CancelFn | None = None,
) -> DensityRaster:
    """Sum of Gaussian kernels evaluated at cell centers, in points/m^2.

    Distances are planar (equirectangular plane at the bbox center).
    Points beyond the projection window contribute nothing measurable at
    city-scale bandwidths and are skipped.
    """
    if width <= 0 or height <= 0:
        raise InputValidationError(f"raster dimensions must be positive, got {width}x{height}")
    if bandwidth_m <= 0:
        raise InputValidationError(f"bandwidth must be > 0, got {bandwidth_m}")
    if not (bbox.min_lat < bbox.max_lat and bbox.min_lon < bbox.max_lon):
        raise InputValidationError("bbox is degenerate")

    origin = bbox.center
    rad = math.pi / 180.0
    cos0 = math.cos(origin.lat * rad)
    dlat = (bbox.max_lat - bbox.min_lat) / height
    dlon = (bbox.max_lon - bbox.min_lon) / width
    # Cell-center coordinates in the local plane; row 0 at the north edge.
    lats = bbox.max_lat - (np.arange(height) + 0.5) * dlat
    lons = bbox.min_lon + (np.arange(width) + 0.5) * dlon
    ys = EARTH_RADIUS_M * (lats - origin.lat) * rad
    xs = EARTH_RADIUS_M * (lons - origin.lon) * rad * cos0

    values = np.zeros((height, width), dtype=np.float64)
    inv_2h2 = 1.0 / (2.0 * bandwidth_m * bandwidth_m)
    for p in points:
        _check_cancel(cancel)
        if abs(p.lat - origin.lat) >= 1.0 or abs(p.lon - origin.lon) >= 1.0:
            continue
        px, py = local_project(origin, p)
        d2 = (xs[None, :] - px) ** 2 + (ys[:, None] - py) ** 2
        values += np.exp(-d2 * inv_2h2)
    values *= 1.0 / (2.0 * math.pi * bandwidth_m * bandwidth_m)
    return DensityRaster(bbox, width, height, bandwidth_m, values)


# --- SSIM and representative selection ---------------------------------------------

SSIM_C1 = (0.01 * 255.0) ** 2
SSIM_C2 = (0.03 * 255.0) ** 2

THUMBNAIL_SIZE = 32
DEFAULT_THUMBNAIL_CAP = 300


@dataclass
class GrayImage:
    """8-bit-range grayscale image; pixels are row-major floats in [0, 255]."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64).reshape(self.height, self.width)

    @staticmethod
    def from_file(path) -> "GrayImage":
        from PIL import Image

        with Image.open(path) as im:
            gray = im.convert("L")
            arr = np.asarray(gray, dtype=np.float64)
        return GrayImage(arr.shape[1], arr.shape[0], arr)

    def thumbnail(self, size: int = THUMBNAIL_SIZE) -> "GrayImage":
        from PIL import Image

        im = Image.fromarray(self.pixels.astype(np.uint8), mode="L")
        small = im.resize((size, size), Image.BILINEAR)
        return GrayImage(size, size, np.asarray(small, dtype=np.float64))


def ssim(a: GrayImage, b: GrayImage) -> float:
    """Global single-window SSIM with population variance, in [-1, 1]."""
    if (a.width, a.height) != (b.width, b.height):
        raise MetricDomainError(
            f"SSIM dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    x = a.pixels.ravel()
    y = b.pixels.ravel()
    mx, my = x.mean(), y.mean()
    vx = np.mean(x * x) - mx * mx
    vy = np.mean(y * y) - my * my
    cov = np.mean(x * y) - mx * my
    return float(
        ((2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2))
        / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2))
    )


def _ssim_one_vs_many(vec: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """SSIM of one flattened image against each row of a flattened stack."""
    mx = vec.mean()
    vx = np.mean(vec * vec) - mx * mx
    my = mat.mean(axis=1)
    vy = np.mean(mat * mat, axis=1) - my * my
    cov = mat @ vec / vec.size - my * mx
    return ((2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2)) / (
        (mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2)
    )


@dataclass
class RepresentativeSelection:
    keys: list[FrameKey]
    skipped_missing: int


def select_representatives(
    items: Sequence[tuple[FrameKey, GrayImage | None]],
    k: int,
    cap: int = DEFAULT_THUMBNAIL_CAP,
    cancel: CancelFn | None = None,
) -> RepresentativeSelection:
    """Greedy farthest-point selection under the 1 - SSIM dissimilarity.

    Seeds with the earliest frame, then repeatedly adds the frame whose
    minimum dissimilarity to the selected set is largest; float ties break
    to the smallest (trip_id, frame_idx). Frames without an image are
    skipped and counted in the result.
    """
    if k < 1:
        raise InputValidationError(f"k must be >= 1, got {k}")
    usable = sorted(
        ((key, img) for key, img in items if img is not None), key=lambda kv: kv[0]
    )
    skipped = len(items) - len(usable)
    if not usable:
        return RepresentativeSelection([], skipped)

    target = min(k, cap, len(usable))
    keys = [key for key, _ in usable]
    mat = np.stack([img.pixels.ravel() for _, img in usable])

    selected = [0]
    min_dist = 1.0 - _ssim_one_vs_many(mat[0], mat)
    min_dist[0] = -np.inf
    while len(selected) < target:
        _check_cancel(cancel)
        # argmax returns the first (smallest-key) index on exact ties.
        nxt = int(np.argmax(min_dist))
        selected.append(nxt)
        dist = 1.0 - _ssim_one_vs_many(mat[nxt], mat)
        np.minimum(min_dist, dist, out=min_dist)
        min_dist[nxt] = -np.inf
    return RepresentativeSelection([keys[i] for i in selected], skipped)


# --- trip timeline ----------------------------------------------------------------

def trip_timeline(trip: Trip) -> dict:
    """Per-frame series for the drill-down view; values copied, not recomputed."""
    if not trip.frames:
        raise NotFoundError(f"trip {trip.trip_id!r} has no frames")
    models = sorted(trip.agg.keys())
    return {
        "trip_id": trip.trip_id,
        "frame_count": len(trip.frames),
        "frame_idx": [f.frame_idx for f in trip.frames],
        "timestamp": [f.timestamp for f in trip.frames],
        "location": [{"lat": f.location.lat, "lon": f.location.lon} for f in trip.frames],
        "speed": [f.speed for f in trip.frames],
        "actual": [f.actual.label for f in trip.frames],
        "predicted": {m: [f.predicted[m].label for f in trip.frames] for m in models},
        "perplexity": {m: [f.perplexity[m] for f in trip.frames] for m in models},
        "scores": {m: [list(f.scores[m]) for f in trip.frames] for m in models},
    }
