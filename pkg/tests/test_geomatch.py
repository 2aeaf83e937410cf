import random

import pytest

from admgeo.core import ActionId, FrameDoc, SpatialConditions, Trip
from admgeo.errors import InputValidationError, ProjectionWindowError
from admgeo.geomatch import (
    LatLon,
    Region,
    SegmentGrid,
    StreetSegment,
    assign_regions,
    local_project,
    local_unproject,
    match_point,
    point_in_region,
    point_segment_distance,
    regions_from_geojson,
    regions_to_geojson,
    streets_from_geojson,
    streets_to_geojson,
)

from .oracles import brute_match, brute_point_polyline_distance, haversine_m, winding_number_inside

ORIGIN = LatLon(40.0, -74.0)


def make_trip(points, trip_id="t"):
    frames = [
        FrameDoc(trip_id, i, 1000 + i, p, 5.0, ActionId.GO_STRAIGHT, {"m": (1.0, 0, 0, 0)})
        for i, p in enumerate(points)
    ]
    return Trip(trip_id, SpatialConditions(), frames)


class TestLocalProject:
    def test_identity(self):
        assert local_project(ORIGIN, ORIGIN) == (0.0, 0.0)

    def test_north_offset_vs_haversine(self):
        p = LatLon(40.0009, -74.0)
        x, y = local_project(ORIGIN, p)
        assert x == pytest.approx(0.0, abs=1e-9)
        assert y == pytest.approx(100.07, abs=0.02)
        assert abs(y - haversine_m(40.0, -74.0, 40.0009, -74.0)) / y < 0.001

    def test_east_offset_includes_cosine(self):
        p = LatLon(40.0, -73.9988)
        x, y = local_project(ORIGIN, p)
        assert y == pytest.approx(0.0, abs=1e-9)
        assert x == pytest.approx(102.2, abs=0.2)
        assert abs(x - haversine_m(40.0, -74.0, 40.0, -73.9988)) / x < 0.001

    def test_inverse_recovers_input(self):
        rng = random.Random(23)
        for _ in range(500):
            p = LatLon(40.0 + rng.uniform(-0.9, 0.9), -74.0 + rng.uniform(-0.9, 0.9))
            x, y = local_project(ORIGIN, p)
            back = local_unproject(ORIGIN, x, y)
            assert abs(back.lat - p.lat) < 1e-9
            assert abs(back.lon - p.lon) < 1e-9

    def test_window_enforced(self):
        with pytest.raises(ProjectionWindowError):
            local_project(ORIGIN, LatLon(41.5, -74.0))

    def test_latlon_validation(self):
        with pytest.raises(InputValidationError):
            LatLon(91.0, 0.0)
        with pytest.raises(InputValidationError):
            LatLon(float("nan"), 0.0)


def seg(seg_id, pts, stype="city_street"):
    return StreetSegment(seg_id, [LatLon(*p) for p in pts], stype)


class TestPointSegmentDistance:
    def test_on_vertex(self):
        s = seg("a", [(40.0, -74.0), (40.001, -74.0)])
        assert point_segment_distance(LatLon(40.0, -74.0), s) == 0.0

    def test_perpendicular_offset(self):
        # east-west edge; point 50 m due north of its midpoint
        a = local_unproject(ORIGIN, -100.0, 0.0)
        b = local_unproject(ORIGIN, 100.0, 0.0)
        p = local_unproject(ORIGIN, 0.0, 50.0)
        d = point_segment_distance(p, StreetSegment("e", [a, b]))
        assert d == pytest.approx(50.0, abs=0.1)

    def test_beyond_endpoint_clamps(self):
        a = local_unproject(ORIGIN, 0.0, 0.0)
        b = local_unproject(ORIGIN, 100.0, 0.0)
        p = local_unproject(ORIGIN, 150.0, 0.0)
        d = point_segment_distance(p, StreetSegment("e", [a, b]))
        assert d == pytest.approx(50.0, abs=0.1)


class TestMatchPoint:
    def test_point_on_polyline(self):
        s = seg("A", [(40.0, -74.0), (40.001, -74.0)])
        got = match_point(LatLon(40.0, -74.0), [s])
        assert got == ("A", 0.0)

    def test_nearest_wins(self):
        sa = StreetSegment("A", [local_unproject(ORIGIN, -50, 10), local_unproject(ORIGIN, 50, 10)])
        sb = StreetSegment("B", [local_unproject(ORIGIN, -50, 20), local_unproject(ORIGIN, 50, 20)])
        got = match_point(ORIGIN, [sb, sa], max_dist=30.0)
        assert got is not None
        assert got[0] == "A"
        assert got[1] == pytest.approx(10.0, abs=0.1)

    def test_none_beyond_radius(self):
        s = StreetSegment("A", [local_unproject(ORIGIN, -50, 50), local_unproject(ORIGIN, 50, 50)])
        assert match_point(ORIGIN, [s], max_dist=30.0) is None

    def test_tie_breaks_to_smallest_id(self):
        north = StreetSegment("zz", [local_unproject(ORIGIN, -50, 10), local_unproject(ORIGIN, 50, 10)])
        south = StreetSegment("aa", [local_unproject(ORIGIN, -50, -10), local_unproject(ORIGIN, 50, -10)])
        got = match_point(ORIGIN, [north, south], max_dist=30.0)
        assert got is not None and got[0] == "aa"

    def test_invalid_radius(self):
        with pytest.raises(InputValidationError):
            match_point(ORIGIN, [], max_dist=0.0)


def random_segments(rng, n, span_m=3000.0):
    segments = []
    for i in range(n):
        x0, y0 = rng.uniform(-span_m, span_m), rng.uniform(-span_m, span_m)
        pts = [local_unproject(ORIGIN, x0, y0)]
        x, y = x0, y0
        for _ in range(rng.randint(1, 3)):
            x += rng.uniform(-400, 400)
            y += rng.uniform(-400, 400)
            pts.append(local_unproject(ORIGIN, x, y))
        try:
            segments.append(StreetSegment(f"s{i:04d}", pts))
        except InputValidationError:
            continue
    return segments


class TestMatchingAgainstBruteForce:
    def test_random_instances_agree(self):
        rng = random.Random(31)
        segments = random_segments(rng, 80)
        grid = SegmentGrid(segments)
        for _ in range(1000):
            p = local_unproject(ORIGIN, rng.uniform(-3200, 3200), rng.uniform(-3200, 3200))
            expected = brute_match(p, segments, 30.0)
            got = match_point(p, segments, 30.0)
            got_grid = grid.match(p, 30.0)
            if expected is None:
                assert got is None and got_grid is None
            else:
                assert got is not None and got_grid is not None
                assert got[0] == expected[0] == got_grid[0]
                assert got[1] == pytest.approx(expected[1], rel=1e-9, abs=1e-9)
                assert got_grid[1] == got[1]

    def test_distance_formula_agrees_with_oracle(self):
        rng = random.Random(37)
        for _ in range(300):
            segments = random_segments(rng, 1)
            if not segments:
                continue
            p = local_unproject(ORIGIN, rng.uniform(-3200, 3200), rng.uniform(-3200, 3200))
            mine = point_segment_distance(p, segments[0])
            ref = brute_point_polyline_distance(p, segments[0].polyline)
            assert mine == pytest.approx(ref, rel=1e-9, abs=1e-9)


def square_region(region_id, cx, cy, half, holes=()):
    ring = [
        local_unproject(ORIGIN, cx - half, cy - half),
        local_unproject(ORIGIN, cx + half, cy - half),
        local_unproject(ORIGIN, cx + half, cy + half),
        local_unproject(ORIGIN, cx - half, cy + half),
    ]
    ring.append(ring[0])
    rings = [ring]
    for hx, hy, hh in holes:
        hole = [
            local_unproject(ORIGIN, hx - hh, hy - hh),
            local_unproject(ORIGIN, hx + hh, hy - hh),
            local_unproject(ORIGIN, hx + hh, hy + hh),
            local_unproject(ORIGIN, hx - hh, hy + hh),
        ]
        hole.append(hole[0])
        rings.append(hole)
    return Region(region_id, rings)


class TestPointInRegion:
    def test_centroid_inside(self):
        r = square_region("r", 0, 0, 500)
        assert point_in_region(ORIGIN, r)

    def test_hole_excludes(self):
        r = square_region("r", 0, 0, 500, holes=[(0, 0, 100)])
        assert not point_in_region(ORIGIN, r)
        assert point_in_region(local_unproject(ORIGIN, 300, 0), r)

    def test_boundary_counts_inside(self):
        r = Region(
            "r",
            [[LatLon(40.0, -74.0), LatLon(40.0, -73.9), LatLon(40.1, -73.9),
              LatLon(40.1, -74.0), LatLon(40.0, -74.0)]],
        )
        assert point_in_region(LatLon(40.0, -73.95), r)  # edge midpoint
        assert point_in_region(LatLon(40.0, -74.0), r)   # vertex
        assert point_in_region(LatLon(40.05, -73.9), r)  # vertical edge

    def test_agrees_with_winding_oracle(self):
        rng = random.Random(41)
        # concave polygon (L-shape) plus a hole
        outer = [
            (0, 0), (800, 0), (800, 400), (400, 400), (400, 800), (0, 800), (0, 0)
        ]
        ring = [local_unproject(ORIGIN, x - 400, y - 400) for x, y in outer]
        hole = [(100, 100), (300, 100), (300, 300), (100, 300), (100, 100)]
        hole_ring = [local_unproject(ORIGIN, x - 400, y - 400) for x, y in hole]
        r = Region("L", [ring, hole_ring])
        for _ in range(1000):
            p = local_unproject(ORIGIN, rng.uniform(-600, 600), rng.uniform(-600, 600))
            assert point_in_region(p, r) == winding_number_inside(p, r.rings)

    def test_region_validation(self):
        with pytest.raises(InputValidationError):
            Region("bad", [[LatLon(0, 0), LatLon(0, 1), LatLon(1, 1)]])  # open ring


class TestAssignRegions:
    def test_single_region_single_slice(self):
        r = square_region("11371", 0, 0, 1000)
        points = [local_unproject(ORIGIN, x, 0) for x in range(-400, 500, 100)]
        slices = assign_regions(make_trip(points), [r])
        assert len(slices) == 1
        assert slices[0].region_id == "11371"
        assert (slices[0].start, slices[0].end) == (0, len(points))

    def test_boundary_crossing_two_slices(self):
        ra = square_region("10001", -500, 0, 500)
        rb = square_region("10002", 500, 0, 500)
        pts = [local_unproject(ORIGIN, -950 + i * 100, 0) for i in range(20)]
        slices = assign_regions(make_trip(pts), [rb, ra])
        assert [s.region_id for s in slices] == ["10001", "10002"]
        assert (slices[0].start, slices[0].end) == (0, 10)
        assert (slices[1].start, slices[1].end) == (10, 20)

    def test_outside_all_regions(self):
        r = square_region("10001", 0, 0, 100)
        pts = [local_unproject(ORIGIN, 5000, 5000 + i) for i in range(5)]
        slices = assign_regions(make_trip(pts), [r])
        assert len(slices) == 1
        assert slices[0].region_id is None

    def test_slices_partition_frames(self):
        rng = random.Random(43)
        regions = [
            square_region("10001", -500, 0, 500),
            square_region("10002", 500, 0, 500),
            square_region("10003", 0, 900, 400),
        ]
        for _ in range(50):
            pts = [
                local_unproject(ORIGIN, rng.uniform(-1500, 1500), rng.uniform(-1500, 1500))
                for _ in range(rng.randint(1, 40))
            ]
            trip = make_trip(pts)
            slices = assign_regions(trip, regions)
            covered = []
            for s in slices:
                assert s.start < s.end
                covered.extend(range(s.start, s.end))
            assert covered == list(range(len(pts)))

    def test_overlap_resolves_to_smallest_region_id(self):
        big = square_region("20000", 0, 0, 800)
        small = square_region("10000", 0, 0, 400)
        slices = assign_regions(make_trip([ORIGIN]), [big, small])
        assert slices[0].region_id == "10000"


class TestGeoJson:
    def test_streets_round_trip(self):
        rng = random.Random(47)
        segments = random_segments(rng, 100)
        obj = streets_to_geojson(segments)
        back = streets_from_geojson(obj)
        assert len(back) == len(segments)
        assert [s.segment_id for s in back] == [s.segment_id for s in segments]
        assert all(a.polyline == b.polyline for a, b in zip(segments, back))

    def test_unknown_street_type_maps_to_undefined(self):
        obj = {
            "type": "FeatureCollection",
            "features": [{
                "type": "Feature",
                "properties": {"segment_id": "x", "street_type": "boulevard_of_dreams"},
                "geometry": {"type": "LineString", "coordinates": [[-74.0, 40.0], [-74.0, 40.001]]},
            }],
        }
        assert streets_from_geojson(obj)[0].street_type == "undefined"

    def test_regions_round_trip_with_holes(self):
        r = square_region("10009", 0, 0, 500, holes=[(0, 0, 100)])
        back = regions_from_geojson(regions_to_geojson([r]))
        assert back[0].region_id == "10009"
        assert len(back[0].rings) == 2
        assert back[0].rings == r.rings

    def test_multipolygon_collapses_to_multi_ring_region(self):
        ra = square_region("x", -600, 0, 200)
        rb = square_region("x", 600, 0, 200)
        obj = {
            "type": "FeatureCollection",
            "features": [{
                "type": "Feature",
                "properties": {"region_id": "x"},
                "geometry": {
                    "type": "MultiPolygon",
                    "coordinates": [
                        [[[p.lon, p.lat] for p in ra.rings[0]]],
                        [[[p.lon, p.lat] for p in rb.rings[0]]],
                    ],
                },
            }],
        }
        region = regions_from_geojson(obj)[0]
        assert len(region.rings) == 2
        assert point_in_region(local_unproject(ORIGIN, -600, 0), region)
        assert point_in_region(local_unproject(ORIGIN, 600, 0), region)
        assert not point_in_region(ORIGIN, region)
