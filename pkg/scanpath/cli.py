#!/usr/bin/env python3
"""
Command-line entry point.

    python -m scanpath.cli [--seed N] [--format json|csv|text] [--out PATH] [--verbose] <command> ...

Exit codes: 0 success, 2 input error, 3 numeric failure.
"""

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import config
from .checkpoint import load_checkpoint, save_checkpoint
from .errors import EmptyDatasetError, InputError, ScanpathError
from .evaluation import evaluate_sources, format_table_csv, format_table_text, mean_table
from .ingest import (
    format_text_grid,
    length_stats_by_split,
    load_dataset,
    load_image,
    load_record_saliency,
    record_to_json,
    resolve_asset,
    write_pgm,
)
from .models import CoordinateMode, DatasetRecord, ModelConfig, TrainConfig
from .rendering import draw_density, draw_overlay, draw_training_curves, overlay_plan, save_drawing
from .sources import build_source
from .trainer import train

logger = logging.getLogger(__name__)

STATS_COLUMNS = ("min", "max", "mean", "median", "std", "mode", "mode_share", "count")
FIGURE_SUFFIXES = (".svg", ".pdf")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info("Wrote %s", out)
    else:
        sys.stdout.write(text)


def _seed(args) -> int:
    return args.seed if args.seed is not None else 0


def _load(path: str, coordinates: str = CoordinateMode.NORMALIZED.value) -> List[DatasetRecord]:
    return load_dataset(path, coordinates)


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def format_stats_text(summaries: dict) -> str:
    header = f"{'Split':<8} {'Min':>5} {'Max':>5} {'Mean':>8} {'Median':>7} {'std':>8} {'Mode':>12} {'Nbr. scanpaths':>15}"
    lines = [header]
    for split, s in summaries.items():
        mode = f"{s.mode} ({s.mode_share * 100:.2f}%)"
        lines.append(
            f"{split:<8} {s.min:>5} {s.max:>5} {s.mean:>8.2f} {s.median:>7} {s.std:>8.2f} {mode:>12} {s.count:>15}"
        )
    lines.append(summaries["all"].model_dump_json())
    return "\n".join(lines) + "\n"


def format_stats_csv(summaries: dict) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("split",) + STATS_COLUMNS)
    for split, summary in summaries.items():
        writer.writerow([split] + [getattr(summary, column) for column in STATS_COLUMNS])
    return buffer.getvalue()


def cmd_stats(args) -> int:
    records = _load(args.dataset, args.coordinates)
    summaries = length_stats_by_split(records)
    if args.format == "json":
        text = json.dumps({split: s.model_dump() for split, s in summaries.items()}, indent=2) + "\n"
    elif args.format == "csv":
        text = format_stats_csv(summaries)
    else:
        text = format_stats_text(summaries)
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------
# train / predict
# ---------------------------------------------------------------------------


def cmd_train(args) -> int:
    records = _load(args.dataset)
    if args.config:
        model_cfg, train_cfg = config.load_run_config(args.config)
    else:
        model_cfg, train_cfg = ModelConfig(), TrainConfig()
    if args.seed is not None:
        model_cfg = model_cfg.model_copy(update={"seed": args.seed})
        train_cfg = train_cfg.model_copy(update={"seed": args.seed})

    model, report = train(records, model_cfg, train_cfg, base_dir=Path(args.dataset).parent)
    report.checkpoint = str(save_checkpoint(model, args.checkpoint))
    if args.curves:
        if report.epochs:
            save_drawing(draw_training_curves(report), args.curves)
        else:
            logger.warning("No epochs trained; skipping %s", args.curves)
    _emit(report.model_dump_json(indent=2) + "\n", args.report or args.out)
    return 0


def cmd_predict(args) -> int:
    records = _load(args.dataset)
    if not records:
        raise EmptyDatasetError()
    model = load_checkpoint(args.checkpoint)
    height, width, _ = model.config.input_size
    base_dir = Path(args.dataset).parent
    lines = []
    for record in records:
        path = resolve_asset(record.image_path, base_dir)
        if path is None:
            raise InputError(f"image {record.image_id!r} has no stimulus image")
        predicted = model.predict(load_image(path, (height, width))).to_scanpath(
            record.image_id, record.image_width, record.image_height
        )
        output = DatasetRecord(
            image_id=record.image_id,
            image_width=record.image_width,
            image_height=record.image_height,
            scanpaths=(predicted,),
            split=record.split,
        )
        lines.append(record_to_json(output))
    logger.info("Predicted %d scanpaths", len(lines))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    tables = []
    for dataset in args.dataset:
        records = _load(dataset)
        base_dir = Path(dataset).parent
        sources = [build_source(spec, _seed(args), base_dir) for spec in args.source]
        tables.append(evaluate_sources(sources, records, Path(dataset).name, base_dir=base_dir))
    if len(tables) > 1:
        tables.append(mean_table(tables))

    if args.format == "json":
        text = json.dumps([table.model_dump() for table in tables], indent=2) + "\n"
    elif args.format == "csv":
        text = format_table_csv(tables)
    else:
        text = "\n".join(format_table_text(table) for table in tables)
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------
# render / density
# ---------------------------------------------------------------------------


def _find_record(records: Sequence[DatasetRecord], image_id: str) -> DatasetRecord:
    for record in records:
        if record.image_id == image_id:
            return record
    raise InputError(f"unknown image_id {image_id!r}")


def cmd_render(args) -> int:
    if not args.out or Path(args.out).suffix.lower() not in FIGURE_SUFFIXES:
        raise InputError("render needs --out ending in .svg or .pdf")
    records = _load(args.dataset)
    record = _find_record(records, args.image_id)
    base_dir = Path(args.dataset).parent
    spec = args.source or f"ground-truth:{args.observer}"
    scanpath = build_source(spec, _seed(args), base_dir)(record)
    saliency = load_record_saliency(record, base_dir)
    save_drawing(draw_overlay(overlay_plan(scanpath), saliency=saliency), args.out)
    return 0


def density_grid(xy: np.ndarray, bins: int) -> np.ndarray:
    """bins x bins histogram over the unit square (rows = y), normalized to sum 1."""
    if len(xy) == 0:
        raise InputError("no fixations")
    counts, _, _ = np.histogram2d(xy[:, 1], xy[:, 0], bins=bins, range=[[0.0, 1.0], [0.0, 1.0]])
    return counts / counts.sum()


def cmd_density(args) -> int:
    if args.bins < 1:
        raise InputError(f"--bins must be positive, got {args.bins}")
    records = _load(args.dataset)
    source = build_source(args.source, _seed(args), Path(args.dataset).parent)
    points = []
    for record in records:
        scanpaths = record.scanpaths if source.all_observers else (source(record),)
        points.extend(scanpath.xy() for scanpath in scanpaths)
    xy = np.concatenate(points) if points else np.empty((0, 2))
    grid = density_grid(xy, args.bins)

    suffix = Path(args.out).suffix.lower() if args.out else ""
    if suffix == ".pgm":
        write_pgm(args.out, grid)
    elif suffix in FIGURE_SUFFIXES:
        save_drawing(draw_density(grid), args.out)
    elif args.format == "json":
        _emit(json.dumps({"bins": args.bins, "grid": grid.tolist()}) + "\n", args.out)
    else:
        _emit(format_text_grid(grid), args.out)
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    serve(args.host, args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scanpath", description="Scanpath prediction and evaluation toolkit.")
    parser.add_argument("--seed", type=int, default=None, help="Seed for every random choice (default 0).")
    parser.add_argument("--format", choices=("json", "csv", "text"), default="text", help="Output format.")
    parser.add_argument("--out", default=None, help="Output file (default stdout).")
    parser.add_argument("--verbose", action="store_true", help="Debug logging.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="Scanpath length statistics.")
    p.add_argument("dataset")
    p.add_argument(
        "--coordinates",
        choices=[mode.value for mode in CoordinateMode],
        default=CoordinateMode.NORMALIZED.value,
        help="How fixation coordinates are expressed in the file.",
    )
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("train", help="Train the scanpath regressor.")
    p.add_argument("dataset")
    p.add_argument("--checkpoint", required=True, help="Where to write the trained parameters.")
    p.add_argument("--config", default=None, help="JSON run config (model/train sections).")
    p.add_argument("--report", default=None, help="Where to write the JSON training report.")
    p.add_argument("--curves", default=None, help="Loss and time-per-epoch figure (.svg/.pdf).")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("predict", help="Predict one scanpath per image.")
    p.add_argument("dataset")
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("eval", help="Comparison table of scanpath sources.")
    p.add_argument("--dataset", action="append", required=True, help="Repeat for cross-dataset tables.")
    p.add_argument("--source", action="append", required=True, help="Repeat to compare sources.")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("render", help="Scanpath overlay figure.")
    p.add_argument("dataset")
    p.add_argument("image_id")
    p.add_argument("--source", default=None)
    p.add_argument("--observer", type=int, default=0)
    p.set_defaults(handler=cmd_render)

    p = sub.add_parser("density", help="Fixation density grid.")
    p.add_argument("dataset")
    p.add_argument("--source", default="ground-truth")
    p.add_argument("--bins", type=int, default=10)
    p.set_defaults(handler=cmd_density)

    p = sub.add_parser("serve", help="Run the HTTP scoring service.")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else config.log_level(),
        format=config.LOG_FORMAT,
    )
    try:
        return args.handler(args)
    except ScanpathError as exc:
        logger.error("%s", exc.detail)
        sys.stderr.write(f"error: {exc.detail}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
