"""
Reference scanpath generators: center-bias sampling and winner-takes-all
with hard inhibition of return.
"""

import logging
from typing import List, Optional, Tuple, Union

import numpy as np

from . import config
from .core import SaliencyMap, cell_center
from .errors import DegenerateSaliencyError, InputError
from .models import Scanpath, WtaConfig

logger = logging.getLogger(__name__)


def center_bias(n: int, seed: int, std: float = config.CENTER_BIAS_STD) -> Scanpath:
    """``n`` Gaussian draws around the image center, rejection-sampled into the unit square."""
    if n < 1:
        raise InputError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed & config.SEED_MASK)
    points: List[np.ndarray] = []
    kept = 0
    while kept < n:
        draws = rng.normal(0.5, std, size=(2 * n, 2))
        inside = draws[np.all((draws >= 0.0) & (draws <= 1.0), axis=1)]
        points.append(inside)
        kept += len(inside)
    return Scanpath.from_points(np.concatenate(points)[:n].tolist())


def _cell_grid(height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    xs = np.arange(width) / (width - 1) if width > 1 else np.zeros(1)
    ys = np.arange(height) / (height - 1) if height > 1 else np.zeros(1)
    return np.meshgrid(xs, ys)


def wta_scanpath(
    s: Union[SaliencyMap, np.ndarray],
    cfg: Optional[WtaConfig] = None,
) -> Scanpath:
    """
    Winner-takes-all: take the global maximum (smallest row, then column, on
    ties), then suppress every cell within ``ior_radius``; repeat until
    ``n_fixations`` are placed or nothing is left.
    """
    cfg = cfg or WtaConfig()
    saliency = s if isinstance(s, SaliencyMap) else SaliencyMap(s)
    values = np.array(saliency.values, dtype=np.float64)
    if values.max() == values.min():
        raise DegenerateSaliencyError("cannot pick winners on a constant saliency map")

    height, width = values.shape
    grid_x, grid_y = _cell_grid(height, width)
    radius_sq = cfg.ior_radius ** 2
    points = []
    for _ in range(cfg.n_fixations):
        if np.all(np.isneginf(values)):
            break
        row, col = divmod(int(np.argmax(values)), width)
        x, y = cell_center(row, col, width, height)
        points.append((x, y))
        values[(grid_x - x) ** 2 + (grid_y - y) ** 2 <= radius_sq] = -np.inf

    if len(points) < cfg.n_fixations:
        logger.debug("WTA stopped after %d of %d fixations", len(points), cfg.n_fixations)
    return Scanpath.from_points(points)
