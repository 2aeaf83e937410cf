"""Geo-context analytics engine for discrete-action driving-model predictions.

Links per-frame prediction records to streets, regions, weather, and time
of day, and answers bidirectional queries: spatial conditions -> model
performance, and performance conditions -> locations.
"""

from .core import (
    ActionId,
    FrameDoc,
    SpatialConditions,
    StreetScene,
    TimeOfDay,
    Trip,
    Weather,
    accuracy,
    frame_accuracy,
    metric_bin,
    normalize_scores,
    perplexity_window,
    predict_action,
    trip_aggregate,
)
from .geomatch import (
    BBox,
    LatLon,
    Region,
    StreetSegment,
    TripSlice,
    assign_regions,
    local_project,
    match_point,
    point_in_region,
    point_segment_distance,
)
from .index import QueryEngine, build_index, parse_query, query_to_json
from .ingest import GenSpec, IngestConfig, generate_synthetic, ingest_trips, recompute_derived
from .store import DatasetStore

__version__ = "0.1.0"

__all__ = [
    "ActionId",
    "BBox",
    "DatasetStore",
    "FrameDoc",
    "GenSpec",
    "IngestConfig",
    "LatLon",
    "QueryEngine",
    "Region",
    "SpatialConditions",
    "StreetScene",
    "StreetSegment",
    "TimeOfDay",
    "Trip",
    "TripSlice",
    "Weather",
    "accuracy",
    "assign_regions",
    "build_index",
    "frame_accuracy",
    "generate_synthetic",
    "ingest_trips",
    "local_project",
    "match_point",
    "metric_bin",
    "normalize_scores",
    "parse_query",
    "perplexity_window",
    "point_in_region",
    "point_segment_distance",
    "predict_action",
    "query_to_json",
    "recompute_derived",
    "trip_aggregate",
]
