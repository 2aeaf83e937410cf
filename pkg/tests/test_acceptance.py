"""Acceptance suite: one test per primary criterion, each printing a
pass line with the measured figures (run with -s or check captured output).
"""
import json
import math
import random
import statistics
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from admgeo.analytics import (
    GrayImage,
    aggregate_by,
    combination_table,
    kde_raster,
    select_representatives,
    ssim,
)
from admgeo.cli import main as cli_main
from admgeo.core import (
    ActionId,
    BIN_LABELS,
    metric_bin,
    normalize_scores,
    perplexity_window,
    predict_action,
)
from admgeo.geomatch import (
    BBox,
    LatLon,
    Region,
    SegmentGrid,
    assign_regions,
    local_unproject,
    match_point,
    point_in_region,
)
from admgeo.index import QueryEngine, query_to_json
from admgeo.service import create_app
from admgeo.store import DatasetStore

from .conftest import build_dataset
from .oracles import brute_match, random_query, scan_query, winding_number_inside
from .test_analytics import cluster_images
from .test_core import make_frame
from .test_geomatch import make_trip, random_segments, square_region

ORIGIN = LatLon(40.0, -74.0)

QUERY_DATASET_SPEC = {
    "n_trips": 100,
    "frames_per_trip": 100,
    "weathers": ["clear", "snowy"],
    "weather_accuracy": {"tcnn1": {"snowy": 0.3, "clear": 0.9}},
    "images": "none",
}


@pytest.fixture(scope="module")
def query_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("accept10k")
    data = build_dataset(root, seed=42, spec_obj=QUERY_DATASET_SPEC)
    store = DatasetStore.load(data)
    engine = QueryEngine(store.trips, store.segments, store.regions)
    return data, store, engine


def ok(name, detail=""):
    print(f"ACCEPTANCE {name}: PASS {detail}".rstrip())


def test_argmax_semantics():
    assert predict_action([0.14, 0.35, 0.82, 0.46]) == ActionId.TURN_LEFT
    ok("argmax-semantics", "{0.14,0.35,0.82,0.46} -> turn_left")


def test_binning():
    assert metric_bin(0.64, "accuracy") == "60-70"
    assert metric_bin(0.70, "accuracy") == "70-80"
    assert metric_bin(1.00, "accuracy") == "90-100"
    ok("binning", "0.64 -> 60-70, 0.70 -> 70-80, 1.00 -> 90-100")


def test_perplexity_closed_forms():
    uniform = [make_frame(i, [1, 1, 1, 1]) for i in range(7)]
    assert abs(perplexity_window(uniform, 6, "m") - 4.0) <= 1e-9

    certain = [make_frame(i, [1, 0, 0, 0]) for i in range(7)]
    assert perplexity_window(certain, 6, "m") == pytest.approx(1.0, abs=1e-12)

    rng = random.Random(101)
    for _ in range(300):
        scores = [rng.uniform(0.01, 3.0) for _ in range(4)]
        p = max(normalize_scores(scores))
        got = perplexity_window([make_frame(0, scores)], 0, "m")
        assert abs(got - 1.0 / p) <= 1e-12 * (1.0 / p)

    lo, hi = math.inf, -math.inf
    for _ in range(200):
        frames = [
            make_frame(i, [rng.uniform(0, 2) + 1e-6 for _ in range(4)]) for i in range(12)
        ]
        for idx in range(12):
            v = perplexity_window(frames, idx, "m")
            assert 1.0 <= v <= 4.0 + 1e-12
            lo, hi = min(lo, v), max(hi, v)
    ok("perplexity-closed-forms", f"random outputs stayed in [{lo:.3f}, {hi:.3f}]")


def test_query_engine_soundness(query_dataset):
    data, store, engine = query_dataset
    n_frames = len(engine.frames)
    assert n_frames == 10_000

    rng = random.Random(42)
    timings = []
    for i in range(500):
        expr = random_query(rng, engine)
        t0 = time.perf_counter()
        got = engine.query_frames(expr)
        timings.append(time.perf_counter() - t0)
        want = sorted(scan_query(expr, store.trips))
        assert got == want, f"query #{i} diverged from linear scan: {query_to_json(expr)}"
    median_ms = statistics.median(timings) * 1000.0
    assert median_ms < 50.0, f"median indexed query latency {median_ms:.2f} ms"
    ok(
        "query-engine-soundness",
        f"500/500 queries == linear scan over {n_frames} frames; "
        f"median latency {median_ms:.2f} ms",
    )


def test_matching_oracle():
    rng = random.Random(202)
    segments = random_segments(rng, 200, span_m=4000.0)
    assert len(segments) == 200
    grid = SegmentGrid(segments)
    agree = 0
    for _ in range(1000):
        p = local_unproject(ORIGIN, rng.uniform(-4300, 4300), rng.uniform(-4300, 4300))
        want = brute_match(p, segments, 30.0)
        got = match_point(p, segments, 30.0)
        got_grid = grid.match(p, 30.0)
        if want is None:
            assert got is None and got_grid is None
        else:
            assert got is not None and got_grid is not None
            assert got[0] == want[0] == got_grid[0]
            assert abs(got[1] - want[1]) <= max(1e-9, 1e-9 * want[1])
        agree += 1
    assert agree == 1000

    outer = [(0, 0), (900, 0), (900, 450), (450, 450), (450, 900), (0, 900), (0, 0)]
    ring = [local_unproject(ORIGIN, x - 450, y - 450) for x, y in outer]
    hole = [(150, 150), (350, 150), (350, 350), (150, 350), (150, 150)]
    hole_ring = [local_unproject(ORIGIN, x - 450, y - 450) for x, y in hole]
    region = Region("L", [ring, hole_ring])
    matches = 0
    for _ in range(1000):
        p = local_unproject(ORIGIN, rng.uniform(-700, 700), rng.uniform(-700, 700))
        assert point_in_region(p, region) == winding_number_inside(p, region.rings)
        matches += 1
    ok("matching-oracle", "1000/1000 matches == brute force; 1000/1000 polygon tests == winding oracle")


def test_trip_cutting():
    ra = square_region("10001", -500, 0, 500)
    rb = square_region("10002", 500, 0, 500)
    pts = [local_unproject(ORIGIN, -950 + i * 100, 0) for i in range(20)]
    trip = make_trip(pts)
    slices = assign_regions(trip, [ra, rb])
    assert len(slices) == 2
    assert [s.region_id for s in slices] == ["10001", "10002"]
    assert (slices[0].start, slices[0].end, slices[1].start, slices[1].end) == (0, 10, 10, 20)
    covered = [i for s in slices for i in range(s.start, s.end)]
    assert covered == list(range(20))
    ok("trip-cutting", "crossing trajectory -> slices [0,10) + [10,20)")


def test_planted_statistic_recovery(query_dataset):
    data, store, engine = query_dataset
    conditions = {t.trip_id: t.conditions for t in store.trips}
    frames = [engine.frames[k] for k in engine.all_frame_keys()]
    reports = {r.group_key: r for r in aggregate_by(frames, "weather", ["tcnn1"], conditions)}
    snowy = reports["snowy"].per_model["tcnn1"].accuracy
    clear = reports["clear"].per_model["tcnn1"].accuracy
    assert abs(snowy - 0.3) <= 0.02, f"snowy accuracy {snowy:.4f} not within 0.3 +/- 0.02"
    assert abs(clear - 0.9) <= 0.02, f"clear accuracy {clear:.4f} not within 0.9 +/- 0.02"
    ok(
        "planted-statistic-recovery",
        f"snowy {snowy:.4f} (planted 0.30), clear {clear:.4f} (planted 0.90) over 10,000 frames",
    )


def test_aggregation_consistency():
    rng = random.Random(303)
    worst = 0.0
    for _ in range(50):
        frames = [
            make_frame(i, [1, 0, 0, 0])
            for i in range(rng.randint(1, 500))
        ]
        for f in frames:
            f.correct = {"m": rng.random() < rng.random()}
            f.perplexity = {"m": rng.uniform(1, 4)}
            f.region_id = rng.choice(["A", "B", "C", "D", None])
        reports = aggregate_by(frames, "region", ["m"])
        total = sum(r.per_model["m"].count for r in reports)
        weighted = sum(r.per_model["m"].count * r.per_model["m"].accuracy for r in reports)
        pooled = sum(1 for f in frames if f.correct["m"]) / len(frames)
        err = abs(weighted / total - pooled)
        worst = max(worst, err)
        assert total == len(frames)
        assert err <= 1e-12
    ok("aggregation-consistency", f"worst pooled-vs-weighted error {worst:.2e} <= 1e-12")


def test_combination_table():
    rng = random.Random(404)
    models = ["m1", "m2", "m3"]
    population = []
    for i in range(800):
        f = make_frame(i, [1, 0, 0, 0])
        f.correct = {m: rng.random() < 0.5 for m in models}
        population.append(f)
    for trial in range(100):
        selection = rng.sample(population, rng.randint(0, len(population)))
        table = combination_table(selection, models)
        assert sum(c for _, c in table.rows) == table.total == len(selection)
        for pattern, count in table.rows:
            want = sum(
                1 for f in selection if tuple(f.correct[m] for m in models) == pattern
            )
            assert count == want
    ok("combination-table", "100/100 random selections match brute-force recount; rows always sum")


def test_kde_mass_and_translation():
    bbox = BBox(40.70, -74.02, 40.74, -73.96)
    rng = random.Random(505)
    center = bbox.center
    points = [
        local_unproject(center, rng.uniform(-400, 400), rng.uniform(-400, 400))
        for _ in range(100)
    ]
    raster = kde_raster(points, bbox, 200, 150, bandwidth_m=150.0)
    mass = float(raster.values.sum()) * raster.cell_area_m2
    assert abs(mass - 100.0) <= 1.0, f"mass {mass:.3f} outside 100 +/- 1%"

    dlon = 0.25
    shifted = kde_raster(
        [LatLon(p.lat, p.lon + dlon) for p in points],
        BBox(bbox.min_lat, bbox.min_lon + dlon, bbox.max_lat, bbox.max_lon + dlon),
        200, 150, bandwidth_m=150.0,
    )
    np.testing.assert_allclose(shifted.values, raster.values, rtol=1e-9)
    ok("kde-mass", f"total mass {mass:.3f} of 100; translated raster within 1e-9 relative")


def test_ssim_and_representatives():
    rng = np.random.default_rng(606)
    imgs = [GrayImage(32, 32, rng.uniform(0, 255, (32, 32))) for _ in range(20)]
    for img in imgs:
        assert abs(ssim(img, img) - 1.0) <= 1e-12
    for a, b in zip(imgs, imgs[1:]):
        assert abs(ssim(a, b) - ssim(b, a)) <= 1e-12

    items, _ = cluster_images(rng)
    result = select_representatives(items, k=3)
    assert {key[0] for key in result.keys} == {"c0", "c1", "c2"}

    many = [(("t", i), GrayImage(32, 32, rng.uniform(0, 255, (32, 32)))) for i in range(320)]
    capped = select_representatives(many, k=1000)
    assert len(capped.keys) <= 300
    ok("ssim", "identity/symmetry <= 1e-12; 3 clusters covered at k=3; cap 300 enforced")


def test_end_to_end_case2_workflow(tmp_path, capsys):
    t_start = time.perf_counter()

    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({
        "n_trips": 100,
        "frames_per_trip": 120,
        "weathers": ["clear", "snowy", "rainy", "overcast"],
        "weather_accuracy": {
            "tcnn1": {"snowy": 0.35},
            "cnn_lstm": {"snowy": 0.4},
            "fcn_lstm": {"snowy": 0.45},
        },
        "accuracy": {"tcnn1": 0.55, "cnn_lstm": 0.6, "fcn_lstm": 0.65},
    }))
    raw = tmp_path / "raw"
    data = tmp_path / "data"
    assert cli_main(["gen-synthetic", "--seed", "42", "--spec", str(spec_path),
                     "--out", str(raw)]) == 0
    assert cli_main(["ingest", "--raw", str(raw / "trips.jsonl"),
                     "--streets", str(raw / "streets.geojson"),
                     "--regions", str(raw / "regions.geojson"),
                     "--out", str(data)]) == 0
    capsys.readouterr()

    client = TestClient(create_app(data))
    health = client.get("/health").json()
    assert health == {"status": "ok", "frames": 12_000}

    models = client.get("/manifest").json()["models"]

    # Case-2 step 1: trips whose accuracy is below 50% for every model.
    selected = client.post(
        "/trips/select",
        json={"models": models, "metric": "accuracy", "op": "<", "threshold": 0.5},
    ).json()["trip_ids"]
    assert selected, "expected some low-accuracy trips in the planted dataset"

    # Case-2 step 2: all-models-wrong locations within those trips, expressed
    # as a pure query (accuracy < 0.5 <=> bins 0-10 .. 40-50).
    low_bins = [b for b in BIN_LABELS if int(b.split("-")[0]) < 50]
    expr = {"and": [
        *[{"pred": {"type": "accuracy_bin", "model": m, "bins": low_bins}} for m in models],
        {"pred": {"type": "correctness_pattern", "pattern": {m: False for m in models}}},
    ]}
    page = client.post("/query", json={"expr": expr, "page_size": 1000}).json()
    assert page["total"] > 0
    assert {d["trip_id"] for d in page["ids"]} <= set(selected)

    # the expression's trip set equals the metric selection
    trips_expr = {"and": [
        {"pred": {"type": "accuracy_bin", "model": m, "bins": low_bins}} for m in models
    ]}
    all_low = client.post("/query", json={"expr": trips_expr, "page_size": 1000}).json()
    # paginate fully to recover the distinct trip set
    seen_trips = set()
    page_no = 0
    while True:
        chunk = client.post(
            "/query", json={"expr": trips_expr, "page": page_no, "page_size": 1000}
        ).json()
        if not chunk["ids"]:
            break
        seen_trips.update(d["trip_id"] for d in chunk["ids"])
        page_no += 1
    assert seen_trips == set(selected)

    # Case-2 step 3: thumbnails for the critical locations.
    thumbs = client.post("/thumbnails", json={"selection": {"expr": expr}, "k": 12}).json()
    assert 1 <= len(thumbs["frames"]) <= 12
    img = client.get(thumbs["image_urls"][0])
    assert img.status_code == 200 and img.headers["content-type"] == "image/png"

    # Case-2 step 4: drill into one trip's timeline.
    trip_id = selected[0]
    timeline = client.get(f"/trips/{trip_id}/timeline").json()
    assert timeline["frame_count"] == 120
    assert set(timeline["perplexity"].keys()) == set(models)

    # CLI/API consistency on the same expression.
    expr_path = tmp_path / "expr.json"
    expr_path.write_text(json.dumps(expr))
    assert cli_main(["query", "--data", str(data), "--expr", str(expr_path), "--json"]) == 0
    cli_payload = json.loads(capsys.readouterr().out)
    assert cli_payload["total"] == page["total"]
    api_ids = [(d["trip_id"], d["frame_idx"]) for d in page["ids"]]
    cli_ids = [(d["trip_id"], d["frame_idx"]) for d in cli_payload["ids"]]
    assert cli_ids[: len(api_ids)] == api_ids

    elapsed = time.perf_counter() - t_start
    assert elapsed < 60.0, f"end-to-end took {elapsed:.1f}s"
    with capsys.disabled():
        ok(
            "end-to-end",
            f"gen+ingest+serve+case2 replay in {elapsed:.1f}s; "
            f"{len(selected)} low-accuracy trips, {page['total']} all-wrong locations",
        )
