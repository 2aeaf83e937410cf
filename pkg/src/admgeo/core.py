"""Domain types, discrete-action semantics, and per-frame performance metrics.

Everything here is a pure function over immutable-ish inputs; derived
fields on FrameDoc/Trip are filled once by the ingest pipeline and then
treated as read-only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Sequence

from .errors import (
    EmptyPopulationError,
    InputValidationError,
    InvalidScoreError,
    MetricDomainError,
)
from .geomatch import LatLon


class ActionId(IntEnum):
    """Discrete driving actions with stable 1-based codes."""

    GO_STRAIGHT = 1
    SLOW_STOP = 2
    TURN_LEFT = 3
    TURN_RIGHT = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "ActionId":
        try:
            return cls[label.upper()]
        except KeyError:
            raise InputValidationError(f"unknown action {label!r}") from None


N_ACTIONS = len(ActionId)


class TimeOfDay(str, Enum):
    DAY = "day"
    NIGHT = "night"
    DAWN_DUSK = "dawn_dusk"
    UNDEFINED = "undefined"


class Weather(str, Enum):
    CLEAR = "clear"
    OVERCAST = "overcast"
    RAINY = "rainy"
    SNOWY = "snowy"
    CLOUDY = "cloudy"
    FOGGY = "foggy"
    UNDEFINED = "undefined"


class StreetScene(str, Enum):
    CITY_STREET = "city_street"
    HIGHWAY = "highway"
    RESIDENTIAL = "residential"
    TUNNEL = "tunnel"
    PARKING = "parking"
    GAS_STATION = "gas_station"
    UNDEFINED = "undefined"


def _parse_enum(enum_cls, value, field_name: str):
    if value is None or value == "":
        return enum_cls.UNDEFINED
    try:
        return enum_cls(value)
    except ValueError:
        raise InputValidationError(f"unknown {field_name} {value!r}") from None


@dataclass(frozen=True)
class SpatialConditions:
    """Trip-level context attributes; 'undefined' marks missing data."""

    time_of_day: TimeOfDay = TimeOfDay.UNDEFINED
    weather: Weather = Weather.UNDEFINED
    street_scene: StreetScene = StreetScene.UNDEFINED

    @classmethod
    def parse(cls, time_of_day=None, weather=None, street_scene=None) -> "SpatialConditions":
        return cls(
            _parse_enum(TimeOfDay, time_of_day, "time_of_day"),
            _parse_enum(Weather, weather, "weather"),
            _parse_enum(StreetScene, street_scene, "street_scene"),
        )


# A score vector is one unitless model output per action, in action-code
# order. Raw values need not sum to 1 (observed outputs exceed 1).
ScoreVector = tuple[float, float, float, float]

PROB_FLOOR = 1e-9


def validate_scores(scores: Sequence[float]) -> ScoreVector:
    if len(scores) != N_ACTIONS:
        raise InvalidScoreError(f"score vector must have {N_ACTIONS} entries, got {len(scores)}")
    vals = tuple(float(v) for v in scores)
    for v in vals:
        if not math.isfinite(v):
            raise InvalidScoreError(f"non-finite score {v}")
        if v < 0.0:
            raise InvalidScoreError(f"negative score {v}")
    if not any(v > 0.0 for v in vals):
        raise InvalidScoreError("all-zero score vector")
    return vals  # type: ignore[return-value]


def predict_action(scores: Sequence[float]) -> ActionId:
    """Action with the maximum score; ties break to the lowest action code."""
    vals = validate_scores(scores)
    best = max(vals)
    return ActionId(vals.index(best) + 1)


def frame_accuracy(predicted: ActionId, actual: ActionId) -> int:
    """1 iff the prediction matches the recorded driver action."""
    return 1 if predicted == actual else 0


def accuracy(correct_count: int, total: int) -> float:
    """Fraction of correct predictions, in [0, 1]."""
    if total <= 0:
        raise EmptyPopulationError("accuracy over an empty population")
    if not 0 <= correct_count <= total:
        raise InputValidationError(f"correct_count {correct_count} outside [0, {total}]")
    return correct_count / total


def normalize_scores(scores: Sequence[float]) -> ScoreVector:
    """Sum-normalize raw scores into a probability vector."""
    vals = validate_scores(scores)
    total = sum(vals)
    if total <= 0.0:
        raise InvalidScoreError("score vector sums to zero")
    return tuple(v / total for v in vals)  # type: ignore[return-value]


@dataclass
class FrameDoc:
    """One prediction point: raw inputs plus derived metrics and matches."""

    trip_id: str
    frame_idx: int
    timestamp: int  # milliseconds since epoch
    location: LatLon
    speed: float  # meters/second
    actual: ActionId
    scores: dict[str, ScoreVector]
    # Derived at ingest:
    predicted: dict[str, ActionId] = field(default_factory=dict)
    correct: dict[str, bool] = field(default_factory=dict)
    perplexity: dict[str, float] = field(default_factory=dict)
    segment_id: str | None = None
    region_id: str | None = None

    @property
    def key(self) -> tuple[str, int]:
        return (self.trip_id, self.frame_idx)

    @property
    def image_path(self) -> str:
        """Relative image path, resolved against the dataset directory."""
        return f"frames/{self.trip_id}/{self.frame_idx}.png"


@dataclass
class Trip:
    """Ordered frame sequence plus trip-level conditions and aggregates."""

    trip_id: str
    conditions: SpatialConditions
    frames: list[FrameDoc]
    agg: dict[str, dict[str, float]] = field(default_factory=dict)

    def validate(self) -> None:
        if not self.trip_id:
            raise InputValidationError("trip_id must be non-empty")
        if not self.frames:
            raise InputValidationError(f"trip {self.trip_id}: no frames")
        prev = -1
        for f in self.frames:
            if f.trip_id != self.trip_id:
                raise InputValidationError(
                    f"trip {self.trip_id}: frame carries trip_id {f.trip_id!r}"
                )
            if f.frame_idx <= prev:
                raise InputValidationError(
                    f"trip {self.trip_id}: frame_idx not strictly increasing at {f.frame_idx}"
                )
            prev = f.frame_idx


DEFAULT_PERPLEXITY_WINDOW = 7


def perplexity_window(
    trip_frames: Sequence[FrameDoc],
    frame_idx: int,
    model: str,
    window: int = DEFAULT_PERPLEXITY_WINDOW,
) -> float:
    """Perplexity of a model's predictions over the trailing frame window.

    Uses the n = min(window, frame_idx + 1) most recent frames ending at
    ``frame_idx`` inclusive; the window shrinks at trip start. Each frame
    contributes the sum-normalized probability of its argmax action,
    floored at PROB_FLOOR before the log. Output lies in [1, N_ACTIONS].
    """
    if not 0 <= frame_idx < len(trip_frames):
        raise InputValidationError(f"frame_idx {frame_idx} outside trip of {len(trip_frames)}")
    n = min(window, frame_idx + 1)
    log_sum = 0.0
    for k in range(frame_idx - n + 1, frame_idx + 1):
        probs = normalize_scores(trip_frames[k].scores[model])
        log_sum += math.log(max(max(probs), PROB_FLOOR))
    return math.exp(-log_sum / n)


def trip_aggregate(trip: Trip, model: str) -> dict[str, float]:
    """Trip-level accuracy and mean perplexity for one model."""
    if not trip.frames:
        raise InputValidationError(f"trip {trip.trip_id}: no frames")
    n_correct = 0
    perp_sum = 0.0
    for f in trip.frames:
        if model not in f.correct or model not in f.perplexity:
            raise InputValidationError(
                f"trip {trip.trip_id}: frame {f.frame_idx} lacks derived metrics for {model!r}"
            )
        n_correct += 1 if f.correct[model] else 0
        perp_sum += f.perplexity[model]
    n = len(trip.frames)
    return {"accuracy": accuracy(n_correct, n), "mean_perplexity": perp_sum / n}


BIN_LABELS = tuple(f"{lo}-{lo + 10}" for lo in range(0, 100, 10))

MetricKind = str  # "accuracy" | "perplexity"


def metric_bin(value: float, kind: MetricKind) -> str:
    """Ten-way percentage bin label for an accuracy or perplexity value.

    Accuracy maps [0,1] to percent; perplexity is rescaled linearly from
    [1, N_ACTIONS] to [0, 100] first (values past N_ACTIONS clamp to 100).
    Bins are lower-inclusive with the final bin closed at 100.
    """
    if not math.isfinite(value):
        raise MetricDomainError(f"non-finite {kind} value")
    if kind == "accuracy":
        if not 0.0 <= value <= 1.0:
            raise MetricDomainError(f"accuracy {value} outside [0, 1]")
        percent = value * 100.0
    elif kind == "perplexity":
        if value < 1.0:
            raise MetricDomainError(f"perplexity {value} below 1")
        percent = min((value - 1.0) / (N_ACTIONS - 1.0) * 100.0, 100.0)
    else:
        raise MetricDomainError(f"unknown metric kind {kind!r}")
    return BIN_LABELS[min(int(percent // 10), 9)]
