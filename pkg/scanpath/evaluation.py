"""
Evaluation harness: compare generated scanpaths against every ground-truth
observer and lay the results out as comparison tables.
"""

import csv
import io
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from . import config
from .errors import EmptyDatasetError, InputError
from .ingest import load_record_saliency
from .metrics import congruency, multimatch, scanpath_nss
from .models import DatasetRecord, EvalRow, EvalTable
from .regressor import Regressor
from .sources import ScanpathSource, model_source

logger = logging.getLogger(__name__)

MM_FIELDS = ("shape", "direction", "length", "position", "score")

# (header, EvalRow attribute) in display order
COLUMNS = (
    ("Source", "source"),
    ("Images", "images"),
    ("Comparisons", "comparisons"),
    ("Shape", "shape"),
    ("Direction", "direction"),
    ("Length", "length"),
    ("Position", "position"),
    ("MM Score", "score"),
    ("Duration", "duration"),
    ("NSS", "nss"),
    ("Congruency", "congruency"),
)


def _mean(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def evaluate(
    source: Union[ScanpathSource, Regressor],
    records: Sequence[DatasetRecord],
    base_dir: Optional[Union[str, Path]] = None,
    saliency: Optional[Mapping[str, np.ndarray]] = None,
    images: Optional[Mapping[str, np.ndarray]] = None,
    bins: int = config.OTSU_BINS,
) -> EvalRow:
    """
    Score one source on a dataset.

    Per image the prediction is compared with each ground-truth scanpath of at
    least two fixations and the MultiMatch components are averaged; images are
    then averaged. NSS and congruency use the record's saliency map and stay
    None when no record has one.
    """
    if not records:
        raise EmptyDatasetError()
    if isinstance(source, Regressor):
        source = model_source(source, base_dir, images)

    per_image: Dict[str, List[float]] = {name: [] for name in MM_FIELDS}
    durations: List[float] = []
    untimed = 0
    nss_values: List[float] = []
    congruency_values: List[float] = []
    comparisons = 0
    skipped = 0

    for record in records:
        predicted = source(record)
        results = []
        if len(predicted) >= 2:
            for truth in record.scanpaths:
                if len(truth) < 2:
                    skipped += 1
                    continue
                results.append(multimatch(predicted, truth))
        else:
            skipped += len(record.scanpaths)
        if results:
            comparisons += len(results)
            for name in MM_FIELDS:
                per_image[name].append(float(np.mean([getattr(r, name) for r in results])))
            timed = [r.duration for r in results if r.duration is not None]
            untimed += len(results) - len(timed)
            if timed:
                durations.append(float(np.mean(timed)))

        if saliency is not None and record.image_id in saliency:
            saliency_map = saliency[record.image_id]
        else:
            saliency_map = load_record_saliency(record, base_dir)
        if saliency_map is not None:
            try:
                nss_values.append(scanpath_nss(saliency_map, predicted))
                congruency_values.append(congruency(saliency_map, predicted, bins))
            except InputError as exc:
                raise InputError(f"image {record.image_id!r}: {exc.detail}") from exc

    if untimed and durations:
        logger.info("%s: %d comparisons lack durations; Duration not reported", source.name, untimed)
    if skipped:
        logger.warning("%s: skipped %d comparisons with fewer than 2 fixations", source.name, skipped)
    logger.info("%s: %d images, %d comparisons", source.name, len(records), comparisons)

    return EvalRow(
        source=source.name,
        images=len(records),
        comparisons=comparisons,
        duration=_mean(durations) if not untimed else None,
        nss=_mean(nss_values),
        congruency=_mean(congruency_values),
        **{name: _mean(values) for name, values in per_image.items()},
    )


def evaluate_sources(
    sources: Sequence[ScanpathSource],
    records: Sequence[DatasetRecord],
    dataset: str,
    **kwargs,
) -> EvalTable:
    logger.info("Evaluating %d source(s) on %s", len(sources), dataset)
    return EvalTable(dataset=dataset, rows=[evaluate(source, records, **kwargs) for source in sources])


def mean_table(tables: Sequence[EvalTable]) -> EvalTable:
    """Per-source mean over datasets; a cell stays None only when every dataset lacks it."""
    if not tables:
        raise EmptyDatasetError("no tables to average")
    order: List[str] = []
    grouped: Dict[str, List[EvalRow]] = {}
    for table in tables:
        for row in table.rows:
            if row.source not in grouped:
                order.append(row.source)
                grouped[row.source] = []
            grouped[row.source].append(row)

    rows = []
    for name in order:
        group = grouped[name]
        values = {}
        for _, attr in COLUMNS[3:]:
            present = [getattr(row, attr) for row in group if getattr(row, attr) is not None]
            values[attr] = _mean(present)
        rows.append(
            EvalRow(
                source=name,
                images=sum(row.images for row in group),
                comparisons=sum(row.comparisons for row in group),
                **values,
            )
        )
    return EvalTable(dataset="mean", rows=rows)


def _cell(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def format_table_text(table: EvalTable) -> str:
    headers = [header for header, _ in COLUMNS]
    body = [[_cell(getattr(row, attr)) for _, attr in COLUMNS] for row in table.rows]
    widths = [max(len(line[i]) for line in [headers] + body) for i in range(len(headers))]

    def render(line: List[str]) -> str:
        first = line[0].ljust(widths[0])
        rest = [cell.rjust(width) for cell, width in zip(line[1:], widths[1:])]
        return "  ".join([first] + rest)

    lines = [f"Dataset: {table.dataset}", render(headers), "  ".join("-" * w for w in widths)]
    lines.extend(render(line) for line in body)
    return "\n".join(lines) + "\n"


def format_table_csv(tables: Sequence[EvalTable]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["Dataset"] + [header for header, _ in COLUMNS])
    for table in tables:
        for row in table.rows:
            writer.writerow([table.dataset] + [_cell(getattr(row, attr)) for _, attr in COLUMNS])
    return buffer.getvalue()
