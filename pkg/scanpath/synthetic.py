"""
Synthetic datasets for sanity checks and tests.

Each builder returns records plus in-memory stimulus images and saliency maps;
``write_synthetic`` puts one on disk in the canonical format.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
from PIL import Image

from . import config
from .baselines import center_bias
from .core import cell_center
from .ingest import dump_dataset, mix_seed, write_pgm
from .models import DatasetRecord, Scanpath

logger = logging.getLogger(__name__)


@dataclass
class SyntheticDataset:
    records: List[DatasetRecord]
    images: Dict[str, np.ndarray] = field(default_factory=dict)    # (3, H, W) in [0, 1]
    saliency: Dict[str, np.ndarray] = field(default_factory=dict)  # (H, W) >= 0


def _unit_grid(height: int, width: int):
    ys = np.arange(height) / max(height - 1, 1)
    xs = np.arange(width) / max(width - 1, 1)
    return np.meshgrid(xs, ys)


def blob_dataset(
    n: int = 4,
    size: int = 16,
    seed: int = 0,
    scanpath_len: int = config.DEFAULT_SCANPATH_LEN,
) -> SyntheticDataset:
    """Colored Gaussian blobs on a dark background; the target is the blob center repeated."""
    rng = np.random.default_rng(seed & config.SEED_MASK)
    grid_x, grid_y = _unit_grid(size, size)
    dataset = SyntheticDataset(records=[])
    for index in range(n):
        image_id = f"blob_{index:03d}"
        cx, cy = rng.uniform(0.2, 0.8, size=2)
        color = rng.uniform(0.3, 1.0, size=3)
        blob = np.exp(-((grid_x - cx) ** 2 + (grid_y - cy) ** 2) / (2 * 0.12 ** 2))
        image = 0.05 + color[:, None, None] * blob[None]
        dataset.images[image_id] = np.clip(image, 0.0, 1.0)
        dataset.saliency[image_id] = blob
        target = Scanpath.from_points(
            [(float(cx), float(cy))] * scanpath_len,
            image_id=image_id,
            image_width=size,
            image_height=size,
        )
        dataset.records.append(
            DatasetRecord(image_id=image_id, image_width=size, image_height=size, scanpaths=(target,))
        )
    return dataset


def centered_saliency_dataset(
    n: int = 10,
    grid: int = 32,
    radius: float = 0.49,
    seed: int = 0,
    observers: int = 3,
) -> SyntheticDataset:
    """A salient disc around the image center; ground truth is center-biased."""
    grid_x, grid_y = _unit_grid(grid, grid)
    disc = (((grid_x - 0.5) ** 2 + (grid_y - 0.5) ** 2) <= radius ** 2).astype(np.float64)
    dataset = SyntheticDataset(records=[])
    for index in range(n):
        image_id = f"center_{index:03d}"
        scanpaths = tuple(
            center_bias(config.DEFAULT_SCANPATH_LEN, mix_seed(seed, index, observer)).model_copy(
                update={"image_id": image_id, "image_width": grid, "image_height": grid}
            )
            for observer in range(observers)
        )
        dataset.records.append(
            DatasetRecord(image_id=image_id, image_width=grid, image_height=grid, scanpaths=scanpaths)
        )
        dataset.saliency[image_id] = disc.copy()
        dataset.images[image_id] = np.repeat(disc[None], 3, axis=0)
    return dataset


def _off_center(rng: np.random.Generator) -> float:
    value = rng.uniform(0.1, 0.3)
    return value if rng.random() < 0.5 else 1.0 - value


def peaked_saliency_dataset(
    n: int = 50,
    grid: int = 32,
    seed: int = 0,
    observers: int = 3,
    sigma: float = 0.08,
) -> SyntheticDataset:
    """
    One off-center Gaussian peak per map; observers fixate cells drawn in
    proportion to saliency, so the ground truth follows the map.
    """
    rng = np.random.default_rng(seed & config.SEED_MASK)
    grid_x, grid_y = _unit_grid(grid, grid)
    dataset = SyntheticDataset(records=[])
    for index in range(n):
        image_id = f"peak_{index:03d}"
        cx, cy = _off_center(rng), _off_center(rng)
        saliency = np.exp(-((grid_x - cx) ** 2 + (grid_y - cy) ** 2) / (2 * sigma ** 2))
        probabilities = (saliency / saliency.sum()).ravel()
        scanpaths = []
        for _ in range(observers):
            cells = rng.choice(probabilities.size, size=config.DEFAULT_SCANPATH_LEN, p=probabilities)
            points = [cell_center(int(c) // grid, int(c) % grid, grid, grid) for c in cells]
            scanpaths.append(
                Scanpath.from_points(points, image_id=image_id, image_width=grid, image_height=grid)
            )
        dataset.records.append(
            DatasetRecord(image_id=image_id, image_width=grid, image_height=grid, scanpaths=tuple(scanpaths))
        )
        dataset.saliency[image_id] = saliency
        dataset.images[image_id] = np.repeat(saliency[None], 3, axis=0)
    return dataset


def write_synthetic(dataset: SyntheticDataset, out_dir: Union[str, Path]) -> Path:
    """Write PNG stimuli, 16-bit PGM saliency maps and ``dataset.jsonl``."""
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "saliency").mkdir(parents=True, exist_ok=True)
    records = []
    for record in dataset.records:
        update = {}
        image = dataset.images.get(record.image_id)
        if image is not None:
            relative = f"images/{record.image_id}.png"
            pixels = np.rint(np.transpose(image, (1, 2, 0)) * 255.0).astype(np.uint8)
            Image.fromarray(pixels).save(out_dir / relative)
            update["image_path"] = relative
        saliency = dataset.saliency.get(record.image_id)
        if saliency is not None:
            relative = f"saliency/{record.image_id}.pgm"
            write_pgm(out_dir / relative, saliency)
            update["saliency_path"] = relative
        records.append(record.model_copy(update=update))
    dataset_path = out_dir / "dataset.jsonl"
    dump_dataset(records, dataset_path)
    logger.info("Wrote synthetic dataset with %d records to %s", len(records), out_dir)
    return dataset_path
