"""Planar-approximation geometry: projection, street matching, region assignment.

All distances are computed on a local equirectangular plane, which is
accurate to well under 0.1% at city scale. Street and region sets are
immutable after load and safe to share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import DatasetLoadError, InputValidationError, ProjectionWindowError

if TYPE_CHECKING:  # pragma: no cover
    from .core import Trip

EARTH_RADIUS_M = 6_371_000.0
DEFAULT_MATCH_RADIUS_M = 30.0
DEFAULT_CELL_DEG = 0.005

# Max angular offset (degrees) accepted by the local planar projection.
PROJECTION_WINDOW_DEG = 1.0

_DEG = math.pi / 180.0


@dataclass(frozen=True)
class LatLon:
    """WGS84 coordinate in degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise InputValidationError(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not (-90.0 <= self.lat <= 90.0 and -180.0 <= self.lon <= 180.0):
            raise InputValidationError(f"coordinate out of range ({self.lat}, {self.lon})")


@dataclass(frozen=True)
class BBox:
    """Axis-aligned lat/lon rectangle."""

    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float

    def contains(self, p: LatLon) -> bool:
        return self.min_lat <= p.lat <= self.max_lat and self.min_lon <= p.lon <= self.max_lon

    @property
    def center(self) -> LatLon:
        return LatLon(0.5 * (self.min_lat + self.max_lat), 0.5 * (self.min_lon + self.max_lon))

    @staticmethod
    def of_points(points: Iterable[LatLon]) -> "BBox":
        lats, lons = [], []
        for p in points:
            lats.append(p.lat)
            lons.append(p.lon)
        if not lats:
            raise InputValidationError("bounding box of empty point set")
        return BBox(min(lats), min(lons), max(lats), max(lons))


@dataclass
class StreetSegment:
    """Road-network polyline with a street-scene classification."""

    segment_id: str
    polyline: list[LatLon]
    street_type: str = "undefined"

    def __post_init__(self):
        if not self.segment_id:
            raise InputValidationError("segment_id must be non-empty")
        if len(self.polyline) < 2:
            raise InputValidationError(f"segment {self.segment_id}: polyline needs >= 2 points")
        for a, b in zip(self.polyline, self.polyline[1:]):
            if a == b:
                raise InputValidationError(
                    f"segment {self.segment_id}: consecutive duplicate polyline points"
                )


@dataclass
class Region:
    """Zipcode region: rings evaluated with even-odd parity (holes subtract).

    A MultiPolygon source collapses to one Region whose rings list holds
    every outer ring and hole; even-odd membership handles that correctly.
    """

    region_id: str
    rings: list[list[LatLon]]
    bbox: BBox = field(init=False)

    def __post_init__(self):
        if not self.region_id:
            raise InputValidationError("region_id must be non-empty")
        if not self.rings:
            raise InputValidationError(f"region {self.region_id}: no rings")
        for ring in self.rings:
            if len(ring) < 4 or ring[0] != ring[-1]:
                raise InputValidationError(
                    f"region {self.region_id}: rings must be closed with >= 4 points"
                )
        self.bbox = BBox.of_points(p for ring in self.rings for p in ring)


@dataclass(frozen=True)
class TripSlice:
    """Maximal run of consecutive trip frames inside one region (or none)."""

    trip_id: str
    region_id: str | None
    start: int  # inclusive frame index
    end: int    # exclusive frame index


def local_project(origin: LatLon, p: LatLon) -> tuple[float, float]:
    """Project ``p`` onto the equirectangular plane centered at ``origin``.

    Returns (x, y) in meters: x east, y north. Inputs must lie within
    1 degree of the origin (city scale), otherwise the planar error grows.
    """
    dlat = p.lat - origin.lat
    dlon = p.lon - origin.lon
    if abs(dlat) >= PROJECTION_WINDOW_DEG or abs(dlon) >= PROJECTION_WINDOW_DEG:
        raise ProjectionWindowError(
            f"point ({p.lat}, {p.lon}) outside the 1-degree window of ({origin.lat}, {origin.lon})"
        )
    x = EARTH_RADIUS_M * dlon * _DEG * math.cos(origin.lat * _DEG)
    y = EARTH_RADIUS_M * dlat * _DEG
    return x, y


def local_unproject(origin: LatLon, x: float, y: float) -> LatLon:
    """Analytic inverse of :func:`local_project`."""
    lat = origin.lat + (y / EARTH_RADIUS_M) / _DEG
    lon = origin.lon + (x / (EARTH_RADIUS_M * math.cos(origin.lat * _DEG))) / _DEG
    return LatLon(lat, lon)


def _project_edges(p: LatLon, polyline: Sequence[LatLon]) -> list[tuple[float, float]]:
    cos0 = math.cos(p.lat * _DEG)
    return [
        (
            EARTH_RADIUS_M * (q.lon - p.lon) * _DEG * cos0,
            EARTH_RADIUS_M * (q.lat - p.lat) * _DEG,
        )
        for q in polyline
    ]


def point_segment_distance(p: LatLon, seg: StreetSegment) -> float:
    """Minimum distance in meters from ``p`` to any edge of the polyline."""
    pts = _project_edges(p, seg.polyline)
    best = math.inf
    for (ax, ay), (bx, by) in zip(pts, pts[1:]):
        ex, ey = bx - ax, by - ay
        denom = ex * ex + ey * ey
        t = 0.0 if denom == 0.0 else max(0.0, min(1.0, -(ax * ex + ay * ey) / denom))
        d = math.hypot(ax + t * ex, ay + t * ey)
        if d < best:
            best = d
    return best


MATCH_TIE_EPS_M = 1e-6


def match_point(
    p: LatLon,
    candidates: Iterable[StreetSegment],
    max_dist: float = DEFAULT_MATCH_RADIUS_M,
) -> tuple[str, float] | None:
    """Nearest segment within ``max_dist`` meters, or None.

    Distances within 1e-6 m of each other count as ties and resolve to the
    lexicographically smallest segment_id, independent of input order.
    """
    if max_dist <= 0:
        raise InputValidationError(f"max_dist must be > 0, got {max_dist}")
    best_id: str | None = None
    best_d = math.inf
    for seg in sorted(candidates, key=lambda s: s.segment_id):
        d = point_segment_distance(p, seg)
        if d < best_d - MATCH_TIE_EPS_M:
            best_id, best_d = seg.segment_id, d
    if best_id is None or best_d > max_dist:
        return None
    return best_id, best_d


_BOUNDARY_EPS_DEG = 1e-12


def _on_ring_boundary(p: LatLon, ring: Sequence[LatLon]) -> bool:
    for a, b in zip(ring, ring[1:]):
        ex, ey = b.lon - a.lon, b.lat - a.lat
        px, py = p.lon - a.lon, p.lat - a.lat
        norm = math.hypot(ex, ey)
        if norm == 0.0:
            continue
        # Perpendicular offset from the edge line, in degrees.
        if abs(ex * py - ey * px) / norm > _BOUNDARY_EPS_DEG:
            continue
        t = (px * ex + py * ey) / (norm * norm)
        if -_BOUNDARY_EPS_DEG <= t <= 1.0 + _BOUNDARY_EPS_DEG:
            return True
    return False


def point_in_region(p: LatLon, r: Region) -> bool:
    """Even-odd membership over all rings; boundary points count as inside."""
    for ring in r.rings:
        if _on_ring_boundary(p, ring):
            return True
    inside = False
    for ring in r.rings:
        for a, b in zip(ring, ring[1:]):
            if (a.lat > p.lat) != (b.lat > p.lat):
                x_cross = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat)
                if p.lon < x_cross:
                    inside = not inside
    return inside


def assign_regions(trip: "Trip", regions: Iterable[Region]) -> list[TripSlice]:
    """Cut a trip into maximal contiguous runs by containing region.

    Each frame is assigned to the first containing region in region_id
    order (deterministic for overlapping regions); frames outside every
    region get region_id None. The returned slices partition the frames.
    """
    ordered = sorted(regions, key=lambda r: r.region_id)

    def region_of(p: LatLon) -> str | None:
        for r in ordered:
            if r.bbox.contains(p) and point_in_region(p, r):
                return r.region_id
        return None

    slices: list[TripSlice] = []
    start = 0
    current: str | None = None
    for i, frame in enumerate(trip.frames):
        rid = region_of(frame.location)
        if i == 0:
            current = rid
            continue
        if rid != current:
            slices.append(TripSlice(trip.trip_id, current, start, i))
            start, current = i, rid
    if trip.frames:
        slices.append(TripSlice(trip.trip_id, current, start, len(trip.frames)))
    return slices


def _cell_of(p: LatLon, cell_deg: float) -> tuple[int, int]:
    return math.floor(p.lon / cell_deg), math.floor(p.lat / cell_deg)


class SegmentGrid:
    """Uniform-cell index over street segments for fast nearest-segment lookup.

    Results are identical to :func:`match_point` over the full segment set:
    candidate cells around the query point always cover every segment that
    could fall within the match radius.
    """

    def __init__(self, segments: Iterable[StreetSegment], cell_deg: float = DEFAULT_CELL_DEG):
        if cell_deg <= 0:
            raise InputValidationError(f"cell_deg must be > 0, got {cell_deg}")
        self.cell_deg = cell_deg
        self.segments: dict[str, StreetSegment] = {}
        self.cells: dict[tuple[int, int], list[str]] = {}
        for seg in segments:
            if seg.segment_id in self.segments:
                raise InputValidationError(f"duplicate segment_id {seg.segment_id!r}")
            self.segments[seg.segment_id] = seg
            seen: set[tuple[int, int]] = set()
            for a, b in zip(seg.polyline, seg.polyline[1:]):
                cx0, cy0 = _cell_of(a, cell_deg)
                cx1, cy1 = _cell_of(b, cell_deg)
                for cx in range(min(cx0, cx1), max(cx0, cx1) + 1):
                    for cy in range(min(cy0, cy1), max(cy0, cy1) + 1):
                        seen.add((cx, cy))
            for cell in seen:
                self.cells.setdefault(cell, []).append(seg.segment_id)

    def candidates(self, p: LatLon, max_dist: float) -> list[StreetSegment]:
        # 1.5 safety factor absorbs the cos(lat) difference between the
        # query latitude and edge latitudes inside the projection window.
        half_lat = 1.5 * max_dist / EARTH_RADIUS_M / _DEG
        cos0 = max(math.cos(p.lat * _DEG), 1e-6)
        half_lon = 1.5 * max_dist / (EARTH_RADIUS_M * cos0) / _DEG
        cx0 = math.floor((p.lon - half_lon) / self.cell_deg)
        cx1 = math.floor((p.lon + half_lon) / self.cell_deg)
        cy0 = math.floor((p.lat - half_lat) / self.cell_deg)
        cy1 = math.floor((p.lat + half_lat) / self.cell_deg)
        ids: set[str] = set()
        for cx in range(cx0, cx1 + 1):
            for cy in range(cy0, cy1 + 1):
                ids.update(self.cells.get((cx, cy), ()))
        return [self.segments[i] for i in sorted(ids)]

    def match(self, p: LatLon, max_dist: float = DEFAULT_MATCH_RADIUS_M) -> tuple[str, float] | None:
        return match_point(p, self.candidates(p, max_dist), max_dist)


# --- GeoJSON profile -------------------------------------------------------
#
# Streets:  FeatureCollection of LineString features,
#           properties {"segment_id": str, "street_type": str}.
# Regions:  FeatureCollection of Polygon/MultiPolygon features,
#           properties {"region_id": str}.
# Unknown street_type strings map to "undefined".

def _require(cond: bool, msg: str, path: str | None) -> None:
    if not cond:
        raise DatasetLoadError(msg, path=path)


def streets_from_geojson(obj: dict, path: str | None = None) -> list[StreetSegment]:
    from .core import StreetScene  # local import to keep geomatch core-free at import time

    _require(obj.get("type") == "FeatureCollection", "streets file is not a FeatureCollection", path)
    known = {s.value for s in StreetScene}
    segments: list[StreetSegment] = []
    seen: set[str] = set()
    for feat in obj.get("features", []):
        geom = feat.get("geometry") or {}
        _require(geom.get("type") == "LineString", "street feature is not a LineString", path)
        props = feat.get("properties") or {}
        seg_id = props.get("segment_id")
        _require(isinstance(seg_id, str) and bool(seg_id), "street feature missing segment_id", path)
        _require(seg_id not in seen, f"duplicate segment_id {seg_id!r}", path)
        seen.add(seg_id)
        stype = props.get("street_type", "undefined")
        if stype not in known:
            stype = "undefined"
        pts = [LatLon(lat, lon) for lon, lat in geom.get("coordinates", [])]
        segments.append(StreetSegment(seg_id, pts, stype))
    return segments


def regions_from_geojson(obj: dict, path: str | None = None) -> list[Region]:
    _require(obj.get("type") == "FeatureCollection", "regions file is not a FeatureCollection", path)
    regions: list[Region] = []
    seen: set[str] = set()
    for feat in obj.get("features", []):
        geom = feat.get("geometry") or {}
        gtype = geom.get("type")
        _require(gtype in ("Polygon", "MultiPolygon"), "region feature is not a (Multi)Polygon", path)
        props = feat.get("properties") or {}
        rid = props.get("region_id")
        _require(isinstance(rid, str) and bool(rid), "region feature missing region_id", path)
        _require(rid not in seen, f"duplicate region_id {rid!r}", path)
        seen.add(rid)
        polys = geom.get("coordinates", [])
        if gtype == "Polygon":
            polys = [polys]
        rings = [
            [LatLon(lat, lon) for lon, lat in ring]
            for poly in polys
            for ring in poly
        ]
        regions.append(Region(rid, rings))
    return regions


def streets_to_geojson(segments: Iterable[StreetSegment]) -> dict:
    return {
        "type": "FeatureCollection",
        "features": [
            {
                "type": "Feature",
                "properties": {"segment_id": s.segment_id, "street_type": s.street_type},
                "geometry": {
                    "type": "LineString",
                    "coordinates": [[p.lon, p.lat] for p in s.polyline],
                },
            }
            for s in segments
        ],
    }


def regions_to_geojson(regions: Iterable[Region]) -> dict:
    return {
        "type": "FeatureCollection",
        "features": [
            {
                "type": "Feature",
                "properties": {"region_id": r.region_id},
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[[p.lon, p.lat] for p in ring] for ring in r.rings],
                },
            }
            for r in regions
        ],
    }
