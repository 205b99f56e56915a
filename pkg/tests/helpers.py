import json
from pathlib import Path

import numpy as np

from scanpath.models import DatasetRecord, Scanpath


def write_jsonl(path: Path, rows) -> Path:
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(row if isinstance(row, str) else json.dumps(row))
            f.write("\n")
    return path


def random_scanpath(rng: np.random.Generator, n: int, timed: bool = False) -> Scanpath:
    xy = rng.uniform(0.0, 1.0, size=(n, 2))
    if not timed:
        return Scanpath.from_points(xy.tolist())
    t = np.cumsum(rng.uniform(50.0, 300.0, size=n))
    dur = rng.uniform(50.0, 300.0, size=n)
    return Scanpath.from_points(np.column_stack([xy, t, dur]).tolist())


def make_record(image_id: str, *scanpaths, width: int = 1, height: int = 1, **kwargs) -> DatasetRecord:
    paths = tuple(
        Scanpath.from_points(points, image_id=image_id, image_width=width, image_height=height)
        for points in scanpaths
    )
    return DatasetRecord(image_id=image_id, image_width=width, image_height=height, scanpaths=paths, **kwargs)


def numeric_grad(f, array: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central differences of the scalar ``f()`` with respect to ``array`` (perturbed in place)."""
    grad = np.zeros_like(array)
    for index in np.ndindex(array.shape):
        original = array[index]
        array[index] = original + eps
        plus = f()
        array[index] = original - eps
        minus = f()
        array[index] = original
        grad[index] = (plus - minus) / (2 * eps)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
    return float(np.linalg.norm(analytic - numeric) / scale)
