"""Spatial/attribute indexing over frames and AND/OR query evaluation.

Queries are trees of predicates combined with And/Or. Evaluation is
set-algebraic: each predicate yields the exact set of matching frame keys
(using grid cells to prune spatial candidates first), And intersects,
Or unions. Results are deterministic and ordered by (trip_id, frame_idx).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .core import (
    ActionId,
    BIN_LABELS,
    FrameDoc,
    StreetScene,
    TimeOfDay,
    Trip,
    Weather,
    metric_bin,
)
from .errors import InputValidationError, QueryValidationError
from .geomatch import (
    BBox,
    DEFAULT_CELL_DEG,
    DEFAULT_MATCH_RADIUS_M,
    EARTH_RADIUS_M,
    LatLon,
    Region,
    StreetSegment,
    point_in_region,
)

FrameKey = tuple[str, int]


# --- Query expression tree --------------------------------------------------

@dataclass(frozen=True)
class InRegionPolygon:
    """Frames whose location falls inside an arbitrary polygon ring."""

    ring: tuple[LatLon, ...]


@dataclass(frozen=True)
class OnStreet:
    segment_id: str


@dataclass(frozen=True)
class RegionIdIn:
    ids: frozenset[str]


@dataclass(frozen=True)
class TimeOfDayIn:
    values: frozenset[str]


@dataclass(frozen=True)
class WeatherIn:
    values: frozenset[str]


@dataclass(frozen=True)
class StreetTypeIn:
    values: frozenset[str]


@dataclass(frozen=True)
class ActualActionIn:
    actions: frozenset[ActionId]


@dataclass(frozen=True)
class PredictedActionIn:
    model: str
    actions: frozenset[ActionId]


@dataclass(frozen=True)
class AccuracyBinIn:
    """Frames of trips whose per-trip accuracy bin is in the set; model None = any model."""

    model: str | None
    bins: frozenset[str]


@dataclass(frozen=True)
class PerplexityBinIn:
    """Frames of trips whose per-trip mean-perplexity bin is in the set; model None = any model."""

    model: str | None
    bins: frozenset[str]


@dataclass(frozen=True)
class CorrectnessPattern:
    """Frames where each constrained model's correctness equals the required flag."""

    pattern: tuple[tuple[str, bool], ...]  # sorted (model, required) pairs

    @staticmethod
    def of(mapping: Mapping[str, bool]) -> "CorrectnessPattern":
        return CorrectnessPattern(tuple(sorted((m, bool(v)) for m, v in mapping.items())))


Predicate = Union[
    InRegionPolygon,
    OnStreet,
    RegionIdIn,
    TimeOfDayIn,
    WeatherIn,
    StreetTypeIn,
    ActualActionIn,
    PredictedActionIn,
    AccuracyBinIn,
    PerplexityBinIn,
    CorrectnessPattern,
]


@dataclass(frozen=True)
class And:
    children: tuple["QueryExpr", ...]


@dataclass(frozen=True)
class Or:
    children: tuple["QueryExpr", ...]


QueryExpr = Union[And, Or, Predicate]


# --- JSON wire format --------------------------------------------------------
#
# {"and": [...]} | {"or": [...]} | {"pred": {"type": "...", ...}}

_PRED_TYPES = {
    "in_region_polygon": InRegionPolygon,
    "on_street": OnStreet,
    "region_id": RegionIdIn,
    "time_of_day": TimeOfDayIn,
    "weather": WeatherIn,
    "street_type": StreetTypeIn,
    "actual_action": ActualActionIn,
    "predicted_action": PredictedActionIn,
    "accuracy_bin": AccuracyBinIn,
    "perplexity_bin": PerplexityBinIn,
    "correctness_pattern": CorrectnessPattern,
}


def _parse_actions(values) -> frozenset[ActionId]:
    if not isinstance(values, (list, tuple)) or not values:
        raise QueryValidationError("actions must be a non-empty list")
    try:
        return frozenset(ActionId.from_label(str(v)) for v in values)
    except InputValidationError as e:
        raise QueryValidationError(str(e)) from None


def _parse_str_set(values, what: str) -> frozenset[str]:
    if not isinstance(values, (list, tuple)) or not values:
        raise QueryValidationError(f"{what} must be a non-empty list")
    return frozenset(str(v) for v in values)


def parse_query(obj) -> QueryExpr:
    """Parse the JSON encoding of a query expression tree."""
    if not isinstance(obj, dict) or len(obj) != 1:
        raise QueryValidationError("query node must be one of {'and':…}, {'or':…}, {'pred':…}")
    kind, payload = next(iter(obj.items()))
    if kind in ("and", "or"):
        if not isinstance(payload, list) or not payload:
            raise QueryValidationError(f"'{kind}' needs a non-empty child list")
        children = tuple(parse_query(c) for c in payload)
        return And(children) if kind == "and" else Or(children)
    if kind != "pred":
        raise QueryValidationError(f"unknown query node {kind!r}")
    if not isinstance(payload, dict) or "type" not in payload:
        raise QueryValidationError("predicate needs a 'type' field")
    ptype = payload["type"]
    if ptype not in _PRED_TYPES:
        raise QueryValidationError(f"unknown predicate type {ptype!r}")
    try:
        if ptype == "in_region_polygon":
            ring = payload.get("ring")
            if not isinstance(ring, list) or len(ring) < 3:
                raise QueryValidationError("in_region_polygon needs a ring of >= 3 [lat, lon] pairs")
            return InRegionPolygon(tuple(LatLon(float(lat), float(lon)) for lat, lon in ring))
        if ptype == "on_street":
            seg = payload.get("segment_id")
            if not isinstance(seg, str) or not seg:
                raise QueryValidationError("on_street needs a segment_id string")
            return OnStreet(seg)
        if ptype == "region_id":
            return RegionIdIn(_parse_str_set(payload.get("ids"), "region ids"))
        if ptype == "time_of_day":
            return TimeOfDayIn(_parse_str_set(payload.get("values"), "time_of_day values"))
        if ptype == "weather":
            return WeatherIn(_parse_str_set(payload.get("values"), "weather values"))
        if ptype == "street_type":
            return StreetTypeIn(_parse_str_set(payload.get("values"), "street_type values"))
        if ptype == "actual_action":
            return ActualActionIn(_parse_actions(payload.get("actions")))
        if ptype == "predicted_action":
            model = payload.get("model")
            if not isinstance(model, str) or not model:
                raise QueryValidationError("predicted_action needs a model")
            return PredictedActionIn(model, _parse_actions(payload.get("actions")))
        if ptype in ("accuracy_bin", "perplexity_bin"):
            model = payload.get("model")
            if model is not None and (not isinstance(model, str) or not model):
                raise QueryValidationError(f"{ptype} model must be a string or null")
            bins = _parse_str_set(payload.get("bins"), "bins")
            cls = AccuracyBinIn if ptype == "accuracy_bin" else PerplexityBinIn
            return cls(model, bins)
        pattern = payload.get("pattern")
        if not isinstance(pattern, dict):
            raise QueryValidationError("correctness_pattern needs a {model: bool} mapping")
        return CorrectnessPattern.of({str(m): bool(v) for m, v in pattern.items()})
    except QueryValidationError:
        raise
    except (TypeError, ValueError, InputValidationError) as e:
        raise QueryValidationError(f"malformed {ptype} predicate: {e}") from None


def query_to_json(expr: QueryExpr) -> dict:
    if isinstance(expr, And):
        return {"and": [query_to_json(c) for c in expr.children]}
    if isinstance(expr, Or):
        return {"or": [query_to_json(c) for c in expr.children]}
    if isinstance(expr, InRegionPolygon):
        return {"pred": {"type": "in_region_polygon", "ring": [[p.lat, p.lon] for p in expr.ring]}}
    if isinstance(expr, OnStreet):
        return {"pred": {"type": "on_street", "segment_id": expr.segment_id}}
    if isinstance(expr, RegionIdIn):
        return {"pred": {"type": "region_id", "ids": sorted(expr.ids)}}
    if isinstance(expr, TimeOfDayIn):
        return {"pred": {"type": "time_of_day", "values": sorted(expr.values)}}
    if isinstance(expr, WeatherIn):
        return {"pred": {"type": "weather", "values": sorted(expr.values)}}
    if isinstance(expr, StreetTypeIn):
        return {"pred": {"type": "street_type", "values": sorted(expr.values)}}
    if isinstance(expr, ActualActionIn):
        return {"pred": {"type": "actual_action", "actions": sorted(a.label for a in expr.actions)}}
    if isinstance(expr, PredictedActionIn):
        return {
            "pred": {
                "type": "predicted_action",
                "model": expr.model,
                "actions": sorted(a.label for a in expr.actions),
            }
        }
    if isinstance(expr, AccuracyBinIn):
        return {"pred": {"type": "accuracy_bin", "model": expr.model, "bins": sorted(expr.bins)}}
    if isinstance(expr, PerplexityBinIn):
        return {"pred": {"type": "perplexity_bin", "model": expr.model, "bins": sorted(expr.bins)}}
    if isinstance(expr, CorrectnessPattern):
        return {"pred": {"type": "correctness_pattern", "pattern": dict(expr.pattern)}}
    raise QueryValidationError(f"unknown expression node {type(expr).__name__}")


# --- Grid index ---------------------------------------------------------------

@dataclass
class GridIndex:
    """Uniform lat/lon cell quantization over frames, segments, and regions."""

    cell_size: float
    cells: dict[tuple[int, int], list[FrameKey]] = field(default_factory=dict)
    segment_cells: dict[tuple[int, int], list[str]] = field(default_factory=dict)
    region_bboxes: dict[str, BBox] = field(default_factory=dict)

    def cell_of(self, p: LatLon) -> tuple[int, int]:
        return math.floor(p.lon / self.cell_size), math.floor(p.lat / self.cell_size)

    def cells_in_bbox(self, bbox: BBox, pad: int = 0) -> Iterable[tuple[int, int]]:
        cx0 = math.floor(bbox.min_lon / self.cell_size) - pad
        cx1 = math.floor(bbox.max_lon / self.cell_size) + pad
        cy0 = math.floor(bbox.min_lat / self.cell_size) - pad
        cy1 = math.floor(bbox.max_lat / self.cell_size) + pad
        for cx in range(cx0, cx1 + 1):
            for cy in range(cy0, cy1 + 1):
                yield (cx, cy)

    def frames_in_cells(self, cells: Iterable[tuple[int, int]]) -> set[FrameKey]:
        out: set[FrameKey] = set()
        for cell in cells:
            out.update(self.cells.get(cell, ()))
        return out


def build_index(
    frames: Iterable[FrameDoc],
    segments: Iterable[StreetSegment] = (),
    regions: Iterable[Region] = (),
    cell_size: float = DEFAULT_CELL_DEG,
) -> GridIndex:
    """Deterministic grid index; rebuildable from the store at any time."""
    idx = GridIndex(cell_size=cell_size)
    for f in frames:
        idx.cells.setdefault(idx.cell_of(f.location), []).append(f.key)
    for cell in idx.cells:
        idx.cells[cell].sort()
    for seg in segments:
        seen: set[tuple[int, int]] = set()
        for a, b in zip(seg.polyline, seg.polyline[1:]):
            ax, ay = idx.cell_of(a)
            bx, by = idx.cell_of(b)
            for cx in range(min(ax, bx), max(ax, bx) + 1):
                for cy in range(min(ay, by), max(ay, by) + 1):
                    seen.add((cx, cy))
        for cell in seen:
            idx.segment_cells.setdefault(cell, []).append(seg.segment_id)
    for cell in idx.segment_cells:
        idx.segment_cells[cell].sort()
    for r in regions:
        idx.region_bboxes[r.region_id] = r.bbox
    return idx


# --- Engine --------------------------------------------------------------------

_DEG = math.pi / 180.0


class QueryEngine:
    """Evaluates queries over an immutable dataset snapshot.

    Safe for unlimited concurrent readers; construct a new engine after
    any ingest or recompute.
    """

    def __init__(
        self,
        trips: Sequence[Trip],
        segments: Sequence[StreetSegment] = (),
        regions: Sequence[Region] = (),
        cell_size: float = DEFAULT_CELL_DEG,
        match_radius_m: float = DEFAULT_MATCH_RADIUS_M,
    ):
        self.trips: dict[str, Trip] = {}
        for t in sorted(trips, key=lambda t: t.trip_id):
            self.trips[t.trip_id] = t
        self.frames: dict[FrameKey, FrameDoc] = {
            f.key: f for t in self.trips.values() for f in t.frames
        }
        self.segments = {s.segment_id: s for s in segments}
        self.regions = {r.region_id: r for r in regions}
        self.models: tuple[str, ...] = ()
        for t in self.trips.values():
            self.models = tuple(sorted(t.agg.keys()))
            break
        self.index = build_index(self.frames.values(), segments, regions, cell_size)
        self.match_radius_m = match_radius_m
        max_abs_lat = 0.0
        for f in self.frames.values():
            max_abs_lat = max(max_abs_lat, abs(f.location.lat))
        for s in self.segments.values():
            for p in s.polyline:
                max_abs_lat = max(max_abs_lat, abs(p.lat))
        self._max_abs_lat = max_abs_lat

        # Posting sets for attribute predicates.
        self._by_condition: dict[tuple[str, str], set[FrameKey]] = {}
        self._by_actual: dict[ActionId, set[FrameKey]] = {}
        self._by_predicted: dict[tuple[str, ActionId], set[FrameKey]] = {}
        self._by_correct: dict[tuple[str, bool], set[FrameKey]] = {}
        self._agg_bins: dict[tuple[str, str, str], str] = {}
        self._segment_to_cells: dict[str, list[tuple[int, int]]] = {}
        for cell, seg_ids in self.index.segment_cells.items():
            for sid in seg_ids:
                self._segment_to_cells.setdefault(sid, []).append(cell)
        for t in self.trips.values():
            keys = {f.key for f in t.frames}
            for dim, value in (
                ("time_of_day", t.conditions.time_of_day.value),
                ("weather", t.conditions.weather.value),
                ("street_type", t.conditions.street_scene.value),
            ):
                self._by_condition.setdefault((dim, value), set()).update(keys)
            for model, agg in t.agg.items():
                self._agg_bins[(t.trip_id, model, "accuracy")] = metric_bin(
                    agg["accuracy"], "accuracy"
                )
                self._agg_bins[(t.trip_id, model, "perplexity")] = metric_bin(
                    agg["mean_perplexity"], "perplexity"
                )
            for f in t.frames:
                self._by_actual.setdefault(f.actual, set()).add(f.key)
                for model, action in f.predicted.items():
                    self._by_predicted.setdefault((model, action), set()).add(f.key)
                for model, ok in f.correct.items():
                    self._by_correct.setdefault((model, ok), set()).add(f.key)

    # -- validation -----------------------------------------------------------

    def _check_model(self, model: str) -> None:
        if model not in self.models:
            raise QueryValidationError(f"unknown model {model!r}")

    def _check_bins(self, bins: frozenset[str]) -> None:
        bad = bins - set(BIN_LABELS)
        if bad:
            raise QueryValidationError(f"unknown bin labels {sorted(bad)}")

    def validate(self, expr: QueryExpr) -> None:
        if isinstance(expr, (And, Or)):
            if not expr.children:
                raise QueryValidationError("And/Or needs at least one child")
            for c in expr.children:
                self.validate(c)
            return
        if isinstance(expr, OnStreet):
            if expr.segment_id not in self.segments:
                raise QueryValidationError(f"unknown segment_id {expr.segment_id!r}")
        elif isinstance(expr, RegionIdIn):
            bad = expr.ids - set(self.regions)
            if bad:
                raise QueryValidationError(f"unknown region ids {sorted(bad)}")
        elif isinstance(expr, TimeOfDayIn):
            bad = expr.values - {v.value for v in TimeOfDay}
            if bad:
                raise QueryValidationError(f"unknown time_of_day values {sorted(bad)}")
        elif isinstance(expr, WeatherIn):
            bad = expr.values - {v.value for v in Weather}
            if bad:
                raise QueryValidationError(f"unknown weather values {sorted(bad)}")
        elif isinstance(expr, StreetTypeIn):
            bad = expr.values - {v.value for v in StreetScene}
            if bad:
                raise QueryValidationError(f"unknown street_type values {sorted(bad)}")
        elif isinstance(expr, PredictedActionIn):
            self._check_model(expr.model)
        elif isinstance(expr, (AccuracyBinIn, PerplexityBinIn)):
            if expr.model is not None:
                self._check_model(expr.model)
            self._check_bins(expr.bins)
        elif isinstance(expr, CorrectnessPattern):
            for model, _ in expr.pattern:
                self._check_model(model)
        elif isinstance(expr, InRegionPolygon):
            if len(expr.ring) < 3:
                raise QueryValidationError("polygon ring needs >= 3 points")
        elif not isinstance(expr, ActualActionIn):
            raise QueryValidationError(f"unknown expression node {type(expr).__name__}")

    # -- evaluation -------------------------------------------------------------

    def _polygon_region(self, ring: tuple[LatLon, ...]) -> Region:
        pts = list(ring)
        if pts[0] != pts[-1]:
            pts.append(pts[0])
        return Region("__query__", [pts])

    def _segment_pad_cells(self) -> int:
        # Frames matched to a segment sit within match_radius of it; pad the
        # segment's cells by enough rings to cover that radius.
        meters_per_cell = (
            self.index.cell_size
            * _DEG
            * EARTH_RADIUS_M
            * max(math.cos(self._max_abs_lat * _DEG), 0.05)
        )
        return 1 + math.ceil(self.match_radius_m / meters_per_cell)

    def _eval_pred(self, pred: Predicate) -> set[FrameKey]:
        if isinstance(pred, InRegionPolygon):
            region = self._polygon_region(pred.ring)
            candidates = self.index.frames_in_cells(self.index.cells_in_bbox(region.bbox))
            return {
                k for k in candidates if point_in_region(self.frames[k].location, region)
            }
        if isinstance(pred, OnStreet):
            pad = self._segment_pad_cells()
            cells: set[tuple[int, int]] = set()
            for cx, cy in self._segment_to_cells.get(pred.segment_id, ()):
                for dx in range(-pad, pad + 1):
                    for dy in range(-pad, pad + 1):
                        cells.add((cx + dx, cy + dy))
            candidates = self.index.frames_in_cells(cells)
            return {k for k in candidates if self.frames[k].segment_id == pred.segment_id}
        if isinstance(pred, RegionIdIn):
            out: set[FrameKey] = set()
            for rid in pred.ids:
                bbox = self.index.region_bboxes[rid]
                candidates = self.index.frames_in_cells(self.index.cells_in_bbox(bbox))
                out.update(k for k in candidates if self.frames[k].region_id == rid)
            return out
        if isinstance(pred, TimeOfDayIn):
            return self._condition_set("time_of_day", pred.values)
        if isinstance(pred, WeatherIn):
            return self._condition_set("weather", pred.values)
        if isinstance(pred, StreetTypeIn):
            return self._condition_set("street_type", pred.values)
        if isinstance(pred, ActualActionIn):
            out = set()
            for a in pred.actions:
                out |= self._by_actual.get(a, set())
            return out
        if isinstance(pred, PredictedActionIn):
            out = set()
            for a in pred.actions:
                out |= self._by_predicted.get((pred.model, a), set())
            return out
        if isinstance(pred, (AccuracyBinIn, PerplexityBinIn)):
            metric = "accuracy" if isinstance(pred, AccuracyBinIn) else "perplexity"
            models = [pred.model] if pred.model is not None else list(self.models)
            out = set()
            for t in self.trips.values():
                if any(self._agg_bins[(t.trip_id, m, metric)] in pred.bins for m in models):
                    out.update(f.key for f in t.frames)
            return out
        if isinstance(pred, CorrectnessPattern):
            if not pred.pattern:
                return set(self.frames)
            sets = [self._by_correct.get((m, want), set()) for m, want in pred.pattern]
            return set.intersection(*sets) if sets else set(self.frames)
        raise QueryValidationError(f"unknown predicate {type(pred).__name__}")

    def _condition_set(self, dim: str, values: frozenset[str]) -> set[FrameKey]:
        out: set[FrameKey] = set()
        for v in values:
            out |= self._by_condition.get((dim, v), set())
        return out

    def _eval(self, expr: QueryExpr) -> set[FrameKey]:
        if isinstance(expr, And):
            result = self._eval(expr.children[0])
            for c in expr.children[1:]:
                if not result:
                    break
                result &= self._eval(c)
            return result
        if isinstance(expr, Or):
            result: set[FrameKey] = set()
            for c in expr.children:
                result |= self._eval(c)
            return result
        return self._eval_pred(expr)

    def query_frames(self, expr: QueryExpr) -> list[FrameKey]:
        """Exactly the frames satisfying the expression, in key order."""
        self.validate(expr)
        return sorted(self._eval(expr))

    def query_trips_by_metric(
        self,
        models: Sequence[str],
        metric: str,
        comparator: str,
        threshold: float,
    ) -> list[str]:
        """Trips whose aggregate satisfies the comparator for ALL listed models."""
        if not models:
            raise QueryValidationError("at least one model required")
        for m in models:
            self._check_model(m)
        if metric not in ("accuracy", "perplexity"):
            raise QueryValidationError(f"unknown metric {metric!r}")
        if comparator not in ("<", ">="):
            raise QueryValidationError(f"unknown comparator {comparator!r}")
        if not math.isfinite(threshold):
            raise QueryValidationError("threshold must be finite")
        if metric == "accuracy" and not 0.0 <= threshold <= 1.0:
            raise QueryValidationError(f"accuracy threshold {threshold} outside [0, 1]")
        if metric == "perplexity" and threshold < 1.0:
            raise QueryValidationError(f"perplexity threshold {threshold} below 1")
        agg_key = "accuracy" if metric == "accuracy" else "mean_perplexity"
        out = []
        for t in self.trips.values():
            vals = [t.agg[m][agg_key] for m in models]
            if comparator == "<":
                ok = all(v < threshold for v in vals)
            else:
                ok = all(v >= threshold for v in vals)
            if ok:
                out.append(t.trip_id)
        return out

    def correctness_pattern_filter(
        self, frame_keys: Iterable[FrameKey], pattern: Mapping[str, bool]
    ) -> list[FrameKey]:
        """Keep frames whose per-model correctness matches every constrained model."""
        for m in pattern:
            self._check_model(m)
        out = []
        for k in frame_keys:
            f = self.frames[k]
            if all(f.correct[m] == want for m, want in pattern.items()):
                out.append(k)
        return out

    def all_frame_keys(self) -> list[FrameKey]:
        return sorted(self.frames)


def resolve_selection(engine: QueryEngine, selection: dict | None) -> list[FrameKey]:
    """Resolve the shared selection object used by the API and CLI.

    {} or None selects everything; {"expr": <query json>} evaluates a
    query; {"trip_ids": [...]} selects whole trips. The two forms are
    mutually exclusive.
    """
    if not selection:
        return engine.all_frame_keys()
    if not isinstance(selection, dict):
        raise QueryValidationError("selection must be an object")
    unknown = set(selection) - {"expr", "trip_ids"}
    if unknown:
        raise QueryValidationError(f"unknown selection fields {sorted(unknown)}")
    if "expr" in selection and "trip_ids" in selection:
        raise QueryValidationError("selection accepts either 'expr' or 'trip_ids', not both")
    if "expr" in selection:
        return engine.query_frames(parse_query(selection["expr"]))
    trip_ids = selection["trip_ids"]
    if not isinstance(trip_ids, list):
        raise QueryValidationError("trip_ids must be a list")
    keys: list[FrameKey] = []
    for tid in sorted(set(str(t) for t in trip_ids)):
        if tid not in engine.trips:
            raise QueryValidationError(f"unknown trip_id {tid!r}")
        keys.extend(f.key for f in engine.trips[tid].frames)
    return keys
