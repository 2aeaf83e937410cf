"""Operator entry points: gen-synthetic, ingest, stats, query, serve.

Every flag has an ADMGEO_* environment-variable equivalent (flags win);
--json switches each subcommand to machine-readable output.

Exit codes: 0 ok, 2 validation, 3 I/O, 4 internal.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .analytics import aggregate_by, combination_table, histogram
from .errors import (
    AdmGeoError,
    ConflictError,
    DatasetLoadError,
    InputValidationError,
    NotFoundError,
)
from .index import QueryEngine, resolve_selection
from .ingest import (
    GenSpec,
    IngestConfig,
    config_for_dataset,
    generate_synthetic,
    ingest_from_files,
    load_config,
)
from .store import DatasetStore

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


def _env_name(flag: str) -> str:
    return "ADMGEO_" + flag.lstrip("-").replace("-", "_").upper()


def _add(parser: argparse.ArgumentParser, flag: str, required: bool = False, **kwargs):
    """add_argument with an environment-variable default; flags win."""
    env = os.environ.get(_env_name(flag))
    if env is not None:
        kwargs["default"] = kwargs.get("type", str)(env)
        required = False
    parser.add_argument(flag, required=required, **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="admgeo",
        description="Geo-context analytics over driving-model prediction records",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="generate a synthetic raw dataset")
    _add(p, "--seed", required=True, type=int, help="RNG seed (byte-identical reruns)")
    _add(p, "--spec", help="generator spec JSON file (defaults when omitted)")
    _add(p, "--out", required=True, help="output directory for raw + geometry files")
    p.add_argument("--json", action="store_true", help="machine-readable report")

    p = sub.add_parser("ingest", help="build a dataset directory from raw files")
    _add(p, "--raw", required=True, help="raw trips file or directory of .jsonl files")
    _add(p, "--streets", required=True, help="streets GeoJSON file")
    _add(p, "--regions", required=True, help="regions GeoJSON file")
    _add(p, "--out", required=True, help="dataset output directory")
    _add(p, "--config", help="ingest config JSON file")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("stats", help="print manifest and per-model global metrics")
    _add(p, "--data", required=True, help="dataset directory")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("query", help="evaluate a query expression against a dataset")
    _add(p, "--data", required=True, help="dataset directory")
    _add(p, "--expr", help="query expression JSON file (omit to select all frames)")
    _add(p, "--report", default="ids", help="ids | aggregate | combinations | histogram")
    _add(p, "--key", default="region", help="aggregate grouping key")
    _add(p, "--models", help="comma-separated model subset (default: all)")
    _add(p, "--dimension", default="accuracy_bin", help="histogram dimension")
    _add(p, "--model", help="histogram model")
    _add(p, "--items", default="frames", help="histogram population: trips | frames")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("serve", help="serve the HTTP API over a dataset")
    _add(p, "--data", required=True, help="dataset directory")
    _add(p, "--bind", default="127.0.0.1:8000", help="host:port to bind")
    return parser


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def cmd_gen_synthetic(args) -> int:
    spec = GenSpec.from_obj(json.loads(Path(args.spec).read_text())) if args.spec else GenSpec()
    report = generate_synthetic(args.seed, spec, args.out)
    _emit(
        args,
        report.to_obj(),
        [
            f"wrote {report.trips} trips / {report.frames} frames to {args.out}",
            f"geometry: {report.segments} segments, {report.regions} regions, "
            f"{report.images} frame images",
        ],
    )
    return EXIT_OK


def cmd_ingest(args) -> int:
    config = load_config(args.config) if args.config else IngestConfig()
    report = ingest_from_files(args.raw, args.streets, args.regions, args.out, config)
    lines = [
        f"ingested {report.trips} trips / {report.frames} frames into {args.out}",
        f"unmatched frames: {report.unmatched_frames}",
        f"errors: {len(report.errors)}",
    ]
    lines += [f"  {e['file']}:{e['line']}: {e['error']}" for e in report.errors[:20]]
    _emit(args, report.to_obj(), lines)
    return EXIT_OK


def cmd_stats(args) -> int:
    store = DatasetStore.load(args.data)
    manifest = store.manifest.to_obj() if store.manifest else {}
    per_model = {}
    for m in manifest.get("models", []):
        n = 0
        n_correct = 0
        perp_sum = 0.0
        for f in store.iter_frames():
            n += 1
            n_correct += 1 if f.correct[m] else 0
            perp_sum += f.perplexity[m]
        per_model[m] = {
            "accuracy": (n_correct / n) if n else None,
            "mean_perplexity": (perp_sum / n) if n else None,
        }
    payload = {"manifest": manifest, "global": per_model}
    lines = [f"dataset: {args.data}"]
    for k, v in manifest.get("counts", {}).items():
        lines.append(f"  {k}: {v}")
    for m, stats in per_model.items():
        acc = stats["accuracy"]
        perp = stats["mean_perplexity"]
        lines.append(
            f"  {m}: accuracy={acc:.4f} mean_perplexity={perp:.4f}"
            if acc is not None
            else f"  {m}: no frames"
        )
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_query(args) -> int:
    store = DatasetStore.load(args.data)
    config = config_for_dataset(args.data)
    engine = QueryEngine(
        store.trips,
        store.segments,
        store.regions,
        cell_size=config.grid_cell_deg,
        match_radius_m=config.match_radius_m,
    )
    conditions = {t.trip_id: t.conditions for t in store.trips}
    selection = None
    if args.expr:
        selection = {"expr": json.loads(Path(args.expr).read_text())}
    keys = resolve_selection(engine, selection)
    frames = [engine.frames[k] for k in keys]
    known = list(store.manifest.models) if store.manifest else []
    models = known
    if args.models:
        models = [m.strip() for m in args.models.split(",") if m.strip()]
        for m in models:
            if m not in known:
                raise InputValidationError(f"unknown model {m!r}")

    if args.report == "ids":
        payload = {"total": len(keys), "ids": [{"trip_id": t, "frame_idx": i} for t, i in keys]}
        lines = [f"{t}:{i}" for t, i in keys] + [f"total: {len(keys)}"]
    elif args.report == "aggregate":
        reports = aggregate_by(frames, args.key, models, conditions)
        payload = {"key": args.key, "reports": [r.to_obj() for r in reports]}
        lines = [f"aggregate by {args.key}:"]
        for r in reports:
            acc = r.combined.accuracy
            lines.append(
                f"  {r.group_key}: count={r.combined.count}"
                + (f" accuracy={acc:.4f}" if acc is not None else "")
            )
    elif args.report == "combinations":
        table = combination_table(frames, models)
        payload = table.to_obj()
        lines = [f"combinations over {', '.join(models)}:"]
        for row in payload["rows"]:
            lines.append(f"  {row['pattern']}: {row['count']}")
    elif args.report == "histogram":
        if args.items == "trips":
            trip_ids = sorted({k[0] for k in keys})
            items = [engine.trips[t] for t in trip_ids]
        elif args.items == "frames":
            items = frames
        else:
            raise InputValidationError(f"--items must be trips or frames, got {args.items!r}")
        rows = histogram(items, args.dimension, args.model, conditions)
        payload = {
            "dimension": args.dimension,
            "items": args.items,
            "rows": [{"label": lb, "count": c} for lb, c in rows],
        }
        lines = [f"{lb}: {c}" for lb, c in rows]
    else:
        raise InputValidationError(f"unknown report {args.report!r}")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.data, args.bind)
    return EXIT_OK


_COMMANDS = {
    "gen-synthetic": cmd_gen_synthetic,
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "query": cmd_query,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InputValidationError, NotFoundError, ConflictError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DatasetLoadError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except AdmGeoError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
