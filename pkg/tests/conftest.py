import pytest

from admgeo.index import QueryEngine
from admgeo.ingest import GenSpec, IngestConfig, generate_synthetic, ingest_from_files
from admgeo.store import DatasetStore

SMALL_SPEC = {
    "n_trips": 20,
    "frames_per_trip": 30,
    "weathers": ["clear", "snowy", "rainy", "overcast"],
    "weather_accuracy": {"tcnn1": {"snowy": 0.3, "clear": 0.9}},
    "images": "sparse",
    "image_stride": 10,
}


def build_dataset(root, seed=42, spec_obj=None, config=None):
    """Generate + ingest a synthetic dataset under root; returns the dataset dir."""
    raw = root / "raw"
    data = root / "data"
    spec = GenSpec.from_obj(spec_obj or SMALL_SPEC)
    generate_synthetic(seed, spec, raw)
    ingest_from_files(
        raw / "trips.jsonl", raw / "streets.geojson", raw / "regions.geojson",
        data, config or IngestConfig(),
    )
    return data


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("small")
    return build_dataset(root)


@pytest.fixture(scope="session")
def small_store(small_dataset):
    return DatasetStore.load(small_dataset)


@pytest.fixture(scope="session")
def small_engine(small_store):
    return QueryEngine(small_store.trips, small_store.segments, small_store.regions)
