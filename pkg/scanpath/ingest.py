"""
Dataset ingestion: the canonical JSON Lines format, saliency map files,
stimulus images, length statistics and training-target selection.
"""

import hashlib
import io
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .config import SEED_MASK
from .core import SaliencyMap, normalize_coordinate
from .errors import DatasetFormatError, EmptyDatasetError, InputError
from .models import CoordinateMode, DatasetRecord, Fixation, Scanpath, StatsSummary

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class _RawRecord(BaseModel):
    """One line of the canonical dataset format, before normalization."""
    model_config = ConfigDict(extra="ignore")

    image_id: str
    width: int = Field(gt=0)
    height: int = Field(gt=0)
    scanpaths: List[List[List[Optional[float]]]] = Field(min_length=1)
    saliency: Optional[str] = None
    image: Optional[str] = None
    split: Optional[str] = None


def _parse_scanpath(
    rows: List[List[Optional[float]]],
    raw: _RawRecord,
    mode: CoordinateMode,
) -> Scanpath:
    if not rows:
        raise ValueError("empty scanpath")
    fixations = []
    for row in rows:
        if not 2 <= len(row) <= 4 or row[0] is None or row[1] is None:
            raise ValueError(f"fixation must be [x, y, t?, dur?], got {row}")
        try:
            x = normalize_coordinate(row[0], raw.width, mode)
            y = normalize_coordinate(row[1], raw.height, mode)
        except ValueError as exc:
            raise InputError(f"image {raw.image_id!r}: {exc}") from exc
        fixations.append(
            Fixation(
                x=x,
                y=y,
                t=row[2] if len(row) > 2 else None,
                dur=row[3] if len(row) > 3 else None,
            )
        )
    return Scanpath(
        fixations=tuple(fixations),
        image_id=raw.image_id,
        image_width=raw.width,
        image_height=raw.height,
    )


def parse_record(line: str, mode: CoordinateMode = CoordinateMode.NORMALIZED) -> DatasetRecord:
    raw = _RawRecord.model_validate_json(line)
    scanpaths = tuple(_parse_scanpath(rows, raw, mode) for rows in raw.scanpaths)
    return DatasetRecord(
        image_id=raw.image_id,
        image_width=raw.width,
        image_height=raw.height,
        scanpaths=scanpaths,
        saliency_path=raw.saliency,
        image_path=raw.image,
        split=raw.split,
    )


def load_dataset(
    path: PathLike,
    coordinate_mode: Union[CoordinateMode, str] = CoordinateMode.NORMALIZED,
) -> List[DatasetRecord]:
    """
    Load a canonical-format dataset.

    Relative ``saliency``/``image`` paths are kept as written; resolve them with
    ``resolve_asset`` against the dataset's directory.
    """
    mode = CoordinateMode(coordinate_mode)
    dataset_path = Path(path)
    records: List[DatasetRecord] = []
    try:
        handle = open(dataset_path, "rb")
    except OSError as exc:
        raise InputError(f"cannot read dataset {dataset_path}: {exc}") from exc

    with handle:
        for line_number, raw in enumerate(handle, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise DatasetFormatError(f"invalid UTF-8: {exc.reason}", line_number) from exc
            if not line.strip():
                continue
            try:
                records.append(parse_record(line, mode))
            except InputError as exc:
                raise DatasetFormatError(exc.detail, line_number) from exc
            except (ValidationError, ValueError) as exc:
                raise DatasetFormatError(_first_error(exc), line_number) from exc

    scanpath_count = sum(len(record.scanpaths) for record in records)
    logger.info(
        "Loaded %d records (%d scanpaths) from %s [%s]",
        len(records),
        scanpath_count,
        dataset_path,
        mode.value,
    )
    return records


def _first_error(exc: Exception) -> str:
    if isinstance(exc, ValidationError):
        errors = exc.errors()
        if errors:
            first = errors[0]
            location = ".".join(str(part) for part in first.get("loc", ()))
            return f"{location}: {first.get('msg')}" if location else str(first.get("msg"))
    return str(exc)


def record_to_json(record: DatasetRecord) -> str:
    payload: Dict[str, object] = {
        "image_id": record.image_id,
        "width": record.image_width,
        "height": record.image_height,
        "scanpaths": [scanpath.to_rows() for scanpath in record.scanpaths],
    }
    if record.saliency_path is not None:
        payload["saliency"] = record.saliency_path
    if record.image_path is not None:
        payload["image"] = record.image_path
    if record.split is not None:
        payload["split"] = record.split
    return json.dumps(payload, ensure_ascii=False)


def dump_dataset(records: Iterable[DatasetRecord], path: PathLike) -> int:
    """Write records in the canonical format (normalized coordinates)."""
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(record_to_json(record))
            f.write("\n")
            count += 1
    logger.info("Wrote %d records to %s", count, path)
    return count


def resolve_asset(reference: Optional[str], base_dir: Optional[PathLike]) -> Optional[Path]:
    if not reference:
        return None
    candidate = Path(reference)
    if not candidate.is_absolute() and base_dir is not None:
        candidate = Path(base_dir) / candidate
    return candidate


# ---------------------------------------------------------------------------
# Saliency maps and images
# ---------------------------------------------------------------------------


def _read_image_map(data: bytes) -> np.ndarray:
    """Decode a PGM (8/16 bit) or PNG saliency image to float64."""
    with Image.open(io.BytesIO(data), formats=("PPM", "PNG")) as img:
        img.load()
        if img.mode.startswith("I;16"):
            img = img.convert("I")
        elif img.mode not in ("L", "I", "F"):
            img = img.convert("L")
        return np.asarray(img, dtype=np.float64)


def _read_text_grid(text: str) -> np.ndarray:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise InputError("empty saliency grid")
    try:
        width, height = (int(value) for value in lines[0].split())
    except ValueError as exc:
        raise InputError(f"grid header must be 'W H', got {lines[0]!r}") from exc
    rows = lines[1:]
    if len(rows) != height:
        raise InputError(f"grid declares {height} rows, found {len(rows)}")
    try:
        values = np.array([[float(v) for v in row.split()] for row in rows], dtype=np.float64)
    except ValueError as exc:
        raise InputError(f"grid contains a non-numeric value: {exc}") from exc
    if values.shape != (height, width):
        raise InputError(f"grid rows must have {width} values")
    return values


def load_saliency(path: PathLike) -> SaliencyMap:
    """Read a binary PGM (8/16 bit), a grayscale PNG or a plain-text grid."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read saliency map {path}: {exc}") from exc
    try:
        values = _read_image_map(data)
    except UnidentifiedImageError:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"saliency map {path} is neither an image nor a text grid: {exc}") from exc
        values = _read_text_grid(text)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot decode saliency map {path}: {exc}") from exc
    return SaliencyMap(values)


def load_record_saliency(record: DatasetRecord, base_dir: Optional[PathLike]) -> Optional[SaliencyMap]:
    path = resolve_asset(record.saliency_path, base_dir)
    return load_saliency(path) if path is not None else None


def format_text_grid(values: np.ndarray) -> str:
    grid = np.asarray(values, dtype=np.float64)
    height, width = grid.shape
    lines = [f"{width} {height}"]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in grid)
    return "\n".join(lines) + "\n"


def write_text_grid(path: PathLike, values: np.ndarray) -> None:
    Path(path).write_text(format_text_grid(values), encoding="utf-8")


def write_pgm(path: PathLike, values: np.ndarray, maxval: int = 65535) -> None:
    """Write a binary PGM scaled so the maximum maps to ``maxval`` (255 or 65535)."""
    if maxval not in (255, 65535):
        raise InputError(f"PGM maxval must be 255 or 65535, got {maxval}")
    grid = np.asarray(values, dtype=np.float64)
    if grid.ndim != 2:
        raise InputError("PGM output needs a 2-D grid")
    peak = grid.max() if grid.size else 0.0
    scaled = grid / peak * maxval if peak > 0 else np.zeros_like(grid)
    # mode L is written with maxval 255, mode I with 65535
    raster = np.rint(scaled).astype(np.uint8 if maxval == 255 else np.int32)
    Image.fromarray(raster).save(path, format="PPM")


def load_image(path: PathLike, size: Tuple[int, int]) -> np.ndarray:
    """Load an RGB image resized bilinearly to (height, width); (3, H, W) in [0, 1]."""
    height, width = size
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB").resize((width, height), Image.Resampling.BILINEAR)
    except OSError as exc:
        raise InputError(f"cannot read image {path}: {exc}") from exc
    array = np.asarray(rgb, dtype=np.float64) / 255.0
    return np.transpose(array, (2, 0, 1)).copy()


# ---------------------------------------------------------------------------
# Length statistics
# ---------------------------------------------------------------------------


def scanpath_lengths(records: Iterable[DatasetRecord]) -> np.ndarray:
    return np.array(
        [len(scanpath) for record in records for scanpath in record.scanpaths],
        dtype=np.int64,
    )


def length_stats(records: Iterable[DatasetRecord]) -> StatsSummary:
    """
    Statistics over per-scanpath fixation counts.

    Population std; the median of an even count is the lower-middle element;
    mode ties go to the smallest length.
    """
    lengths = np.sort(scanpath_lengths(records))
    if lengths.size == 0:
        raise EmptyDatasetError()
    counts = np.bincount(lengths)
    mode = int(np.argmax(counts))
    return StatsSummary(
        min=int(lengths[0]),
        max=int(lengths[-1]),
        mean=float(lengths.mean()),
        median=int(lengths[(lengths.size - 1) // 2]),
        std=float(lengths.std()),
        mode=mode,
        mode_share=float(counts[mode] / lengths.size),
        count=int(lengths.size),
    )


def length_stats_by_split(records: Sequence[DatasetRecord]) -> Dict[str, StatsSummary]:
    """One summary per split label plus ``"all"``; unlabeled records only count in ``"all"``."""
    summaries: Dict[str, StatsSummary] = {}
    splits = sorted({record.split for record in records if record.split is not None})
    for split in splits:
        summaries[split] = length_stats([record for record in records if record.split == split])
    summaries["all"] = length_stats(records)
    return summaries


# ---------------------------------------------------------------------------
# Training targets
# ---------------------------------------------------------------------------


def stable_hash(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "little")


def mix_seed(seed: int, *keys: int) -> int:
    """Derive a 64-bit seed from a base seed and extra integer keys."""
    sequence = np.random.SeedSequence([seed & SEED_MASK, *(key & SEED_MASK for key in keys)])
    return int(sequence.generate_state(1, np.uint64)[0])


def select_random_scanpath(record: DatasetRecord, seed: int) -> Scanpath:
    """Uniform, deterministic choice of one observer given (seed, image_id)."""
    rng = np.random.default_rng([seed & SEED_MASK, stable_hash(record.image_id)])
    return record.scanpaths[int(rng.integers(len(record.scanpaths)))]


def resample_scanpath(scanpath: Scanpath, n: int) -> Scanpath:
    """Truncate to the first ``n`` fixations or pad with the last one; drops timing."""
    if n < 1:
        raise InputError(f"target length must be positive, got {n}")
    if len(scanpath.fixations) == 0:
        raise InputError("empty scanpath")
    kept = list(scanpath.fixations[:n])
    kept.extend([kept[-1]] * (n - len(kept)))
    return Scanpath(
        fixations=tuple(Fixation(x=f.x, y=f.y) for f in kept),
        image_id=scanpath.image_id,
        image_width=scanpath.image_width,
        image_height=scanpath.image_height,
    )
