"""
Grid types and geometric primitives shared by every other module.
"""

from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np

from .errors import InputError, ShapeMismatchError
from .models import CoordinateMode, Scanpath


@dataclass(frozen=True, eq=False)
class SaliencyMap:
    """Dense non-negative saliency values, shape (height, width)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.size == 0:
            raise ShapeMismatchError(f"saliency map must be a non-empty 2-D grid, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("saliency map contains non-finite values")
        if np.any(values < 0):
            raise InputError("saliency map contains negative values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class FixationMap:
    """Binary grid of fixated cells, shape (height, width)."""

    cells: np.ndarray

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.uint8)
        if cells.ndim != 2 or cells.size == 0:
            raise ShapeMismatchError(f"fixation map must be a non-empty 2-D grid, got shape {cells.shape}")
        if np.any(cells > 1):
            raise InputError("fixation map cells must be 0 or 1")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def shape(self):
        return self.cells.shape

    @property
    def count(self) -> int:
        return int(self.cells.sum())


class SaccadeVector(NamedTuple):
    dx: float  # normalized width units
    dy: float  # normalized height units


def round_half_up(values: np.ndarray) -> np.ndarray:
    """Round non-negative values to nearest, ties away from zero."""
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5).astype(np.int64)


def grid_cells(xy: np.ndarray, grid_w: int, grid_h: int) -> np.ndarray:
    """Map normalized (x, y) rows to (row, col) cell indices."""
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    rows = round_half_up(xy[:, 1] * (grid_h - 1))
    cols = round_half_up(xy[:, 0] * (grid_w - 1))
    return np.stack([rows, cols], axis=1)


def cell_center(row: int, col: int, grid_w: int, grid_h: int) -> tuple:
    """Normalized (x, y) of a cell; the inverse of ``grid_cells``."""
    x = col / (grid_w - 1) if grid_w > 1 else 0.0
    y = row / (grid_h - 1) if grid_h > 1 else 0.0
    return x, y


def normalize_coordinate(value: float, extent: int, mode: CoordinateMode) -> float:
    """
    Convert one raw coordinate to [0, 1].

    Pixel coordinates are divided by ``extent - 1``; the valid pixel range is
    ``0..extent-1`` (origin 0) or ``1..extent`` (origin 1). Out-of-range values
    raise ``ValueError``; the caller adds the image id.
    """
    if mode == CoordinateMode.NORMALIZED:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"normalized coordinate {value} outside [0, 1]")
        return float(value)

    offset = 1.0 if mode == CoordinateMode.PIXEL_ORIGIN1 else 0.0
    pixel = value - offset
    if not 0.0 <= pixel <= extent - 1:
        raise ValueError(f"pixel coordinate {value} outside 0..{extent - 1} (mode {mode.value})")
    if extent == 1:
        return 0.0
    return pixel / (extent - 1)


def rasterize(scanpath: Scanpath, grid_w: int, grid_h: int) -> FixationMap:
    """Binary fixation map; repeated cells collapse to one."""
    if scanpath is None or len(scanpath.fixations) == 0:
        raise InputError("empty scanpath")
    if grid_w < 1 or grid_h < 1:
        raise InputError(f"grid dimensions must be >= 1, got {grid_w}x{grid_h}")

    cells = np.zeros((grid_h, grid_w), dtype=np.uint8)
    indices = grid_cells(scanpath.xy(), grid_w, grid_h)
    cells[indices[:, 0], indices[:, 1]] = 1
    return FixationMap(cells)


def saccade_array(scanpath: Scanpath) -> np.ndarray:
    """Consecutive fixation differences, shape (n - 1, 2)."""
    if len(scanpath.fixations) < 2:
        raise InputError("no saccades")
    return np.diff(scanpath.xy(), axis=0)


def saccade_vectors(scanpath: Scanpath) -> List[SaccadeVector]:
    return [SaccadeVector(float(dx), float(dy)) for dx, dy in saccade_array(scanpath)]
