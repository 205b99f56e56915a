"""
Scanpath evaluation metrics: NSS, Otsu-based congruency and MultiMatch.

Every function here is pure. MultiMatch aligns the two saccade sequences with a
minimum-cost monotone path over their pairwise distance lattice and does not
simplify the scanpaths first.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from . import config
from .core import FixationMap, SaccadeVector, SaliencyMap, grid_cells, rasterize, saccade_array
from .errors import DegenerateSaliencyError, InputError, NumericError, ShapeMismatchError
from .models import MultiMatchResult, Scanpath

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

# Lattice steps in tie-break preference order.
_STEPS = ((1, 1), (1, 0), (0, 1))


def _as_map(s: Union[SaliencyMap, np.ndarray]) -> SaliencyMap:
    return s if isinstance(s, SaliencyMap) else SaliencyMap(s)


def normalize_saliency(s: Union[SaliencyMap, np.ndarray]) -> np.ndarray:
    """Z-score a saliency map using the population standard deviation."""
    values = _as_map(s).values
    if values.max() == values.min():
        raise DegenerateSaliencyError()
    normalized = (values - values.mean()) / values.std()
    if __debug__:
        if abs(normalized.mean()) > 1e-6 or abs(normalized.std() - 1.0) > 1e-6:
            raise NumericError("saliency normalization lost precision")
    return normalized


def nss(s: Union[SaliencyMap, np.ndarray], fixmap: FixationMap) -> float:
    """Mean normalized saliency over the fixated cells."""
    saliency = _as_map(s)
    if saliency.shape != fixmap.shape:
        raise ShapeMismatchError(
            f"saliency shape {saliency.shape} != fixation map shape {fixmap.shape}"
        )
    if fixmap.count == 0:
        raise InputError("fixation map has no fixated cells")
    normalized = normalize_saliency(saliency)
    return float(normalized[fixmap.cells == 1].mean())


def scanpath_nss(s: Union[SaliencyMap, np.ndarray], scanpath: Scanpath) -> float:
    """NSS of a scanpath rasterized at the saliency map's resolution."""
    saliency = _as_map(s)
    return nss(saliency, rasterize(scanpath, saliency.width, saliency.height))


def _histogram_edges(values: np.ndarray, bins: int) -> np.ndarray:
    lo = values.min()
    hi = values.max()
    return lo + (hi - lo) * np.arange(1, bins, dtype=np.float64) / bins


def otsu_threshold(s: Union[SaliencyMap, np.ndarray], bins: int = config.OTSU_BINS) -> float:
    """
    Otsu threshold over a ``bins``-bin histogram spanning [min, max].

    Returns the bin edge that maximizes between-class variance; cells with a
    value strictly above it are salient. Ties go to the lowest edge. A constant
    map returns its constant.
    """
    if bins < 2:
        raise InputError(f"bins must be >= 2, got {bins}")
    values = _as_map(s).values.ravel()
    lo = float(values.min())
    if lo == float(values.max()):
        return lo

    edges = _histogram_edges(values, bins)
    # bin index k means edges[k-1] < v <= edges[k]
    bin_index = np.searchsorted(edges, values, side="left")
    counts = np.bincount(bin_index, minlength=bins).tolist()

    total = len(values)
    total_sum = sum(k * c for k, c in enumerate(counts))
    best_k = 1
    best_num, best_den = 0, 1
    c0 = 0
    s0 = 0
    # between-class variance up to a constant: (s0*c1 - s1*c0)^2 / (c0*c1),
    # exact in integers
    for k in range(1, bins):
        c0 += counts[k - 1]
        s0 += (k - 1) * counts[k - 1]
        c1 = total - c0
        if c0 == 0 or c1 == 0:
            continue
        s1 = total_sum - s0
        num = (s0 * c1 - s1 * c0) ** 2
        den = c0 * c1
        if num * best_den > best_num * den:
            best_k, best_num, best_den = k, num, den
    return float(edges[best_k - 1])


def otsu_binarize(s: Union[SaliencyMap, np.ndarray], bins: int = config.OTSU_BINS) -> FixationMap:
    """Binary salient-region map (value > Otsu threshold)."""
    saliency = _as_map(s)
    threshold = otsu_threshold(saliency, bins)
    return FixationMap(saliency.values > threshold)


def congruency_with_threshold(
    s: Union[SaliencyMap, np.ndarray],
    scanpath: Scanpath,
    bins: int = config.OTSU_BINS,
) -> Tuple[float, float]:
    saliency = _as_map(s)
    if scanpath is None or len(scanpath.fixations) == 0:
        raise InputError("empty scanpath")
    threshold = otsu_threshold(saliency, bins)
    salient = saliency.values > threshold
    cells = grid_cells(scanpath.xy(), saliency.width, saliency.height)
    # per fixation, duplicates included
    hits = salient[cells[:, 0], cells[:, 1]]
    return float(hits.mean()), threshold


def congruency(
    s: Union[SaliencyMap, np.ndarray],
    scanpath: Scanpath,
    bins: int = config.OTSU_BINS,
) -> float:
    """Fraction of fixations landing in the Otsu-salient region."""
    value, _ = congruency_with_threshold(s, scanpath, bins)
    return value


@dataclass(frozen=True)
class Alignment:
    pairs: Tuple[Tuple[int, int], ...]
    cost: float


def _as_vectors(saccades: Union[np.ndarray, Sequence[SaccadeVector]]) -> np.ndarray:
    array = np.asarray(saccades, dtype=np.float64)
    if array.size == 0:
        raise InputError("cannot align an empty saccade sequence")
    return array.reshape(-1, 2)


def align(
    a: Union[np.ndarray, Sequence[SaccadeVector]],
    b: Union[np.ndarray, Sequence[SaccadeVector]],
) -> Alignment:
    """
    Minimum-cost monotone path from (0, 0) to (|a|-1, |b|-1).

    Node cost is the Euclidean distance between paired saccades; steps are
    (1,1), (1,0) and (0,1), preferred in that order on equal cost.
    """
    u = _as_vectors(a)
    v = _as_vectors(b)
    node_cost = np.linalg.norm(u[:, None, :] - v[None, :, :], axis=2)
    n_a, n_b = node_cost.shape

    # cost_to_go[i, j]: cheapest path from (i, j) to the end, including (i, j)
    cost_to_go = np.full((n_a + 1, n_b + 1), np.inf)
    for i in range(n_a - 1, -1, -1):
        for j in range(n_b - 1, -1, -1):
            if i == n_a - 1 and j == n_b - 1:
                rest = 0.0
            else:
                rest = min(cost_to_go[i + 1, j + 1], cost_to_go[i + 1, j], cost_to_go[i, j + 1])
            cost_to_go[i, j] = node_cost[i, j] + rest

    pairs = [(0, 0)]
    total = float(node_cost[0, 0])
    i, j = 0, 0
    while (i, j) != (n_a - 1, n_b - 1):
        best = None
        for di, dj in _STEPS:
            candidate = cost_to_go[i + di, j + dj]
            if best is None or candidate < cost_to_go[best]:
                best = (i + di, j + dj)
        i, j = best
        pairs.append(best)
        total += float(node_cost[i, j])
    return Alignment(pairs=tuple(pairs), cost=total)


def _duration_dissimilarity(
    a: Scanpath,
    b: Scanpath,
    end_a: np.ndarray,
    end_b: np.ndarray,
) -> Optional[np.ndarray]:
    durations_a = a.durations()
    durations_b = b.durations()
    if durations_a is None or durations_b is None:
        return None
    du = durations_a[end_a]
    dv = durations_b[end_b]
    peak = np.maximum(du, dv)
    safe_peak = np.where(peak > 0, peak, 1.0)
    return np.where(peak > 0, np.abs(du - dv) / safe_peak, 0.0)


def _similarity(dissimilarity: np.ndarray) -> float:
    return float(np.clip(1.0 - dissimilarity.mean(), 0.0, 1.0))


def _directional_components(a: Scanpath, b: Scanpath) -> Tuple[np.ndarray, Optional[float]]:
    """(shape, direction, length, position) similarities and duration for one argument order."""
    saccades_a = saccade_array(a)
    saccades_b = saccade_array(b)
    alignment = align(saccades_a, saccades_b)

    index_a = np.array([pair[0] for pair in alignment.pairs])
    index_b = np.array([pair[1] for pair in alignment.pairs])
    u = saccades_a[index_a]
    v = saccades_b[index_b]

    shape = np.linalg.norm(u - v, axis=1) / (2.0 * SQRT2)

    length_u = np.linalg.norm(u, axis=1)
    length_v = np.linalg.norm(v, axis=1)
    cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    dot = np.sum(u * v, axis=1)
    angle = np.arctan2(np.abs(cross), dot)
    angle[(length_u == 0) | (length_v == 0)] = 0.0
    direction = angle / math.pi

    length = np.abs(length_u - length_v) / SQRT2

    # saccade k ends at fixation k + 1
    end_a = index_a + 1
    end_b = index_b + 1
    position = np.linalg.norm(a.xy()[end_a] - b.xy()[end_b], axis=1) / SQRT2

    duration = _duration_dissimilarity(a, b, end_a, end_b)
    spatial = np.array([_similarity(shape), _similarity(direction), _similarity(length), _similarity(position)])
    return spatial, (_similarity(duration) if duration is not None else None)


def multimatch(a: Scanpath, b: Scanpath) -> MultiMatchResult:
    """
    Vector-based scanpath similarity.

    Shape, Direction, Length and Position make up the score; Duration is
    reported only when both scanpaths carry durations.

    Equal-cost alignments can pair saccades differently for (a, b) and (b, a),
    so every component is averaged over both argument orders.
    """
    if len(a.fixations) < 2 or len(b.fixations) < 2:
        raise InputError("no saccades")
    forward, duration_forward = _directional_components(a, b)
    backward, duration_backward = _directional_components(b, a)
    shape, direction, length, position = (forward + backward) / 2.0
    duration = None
    if duration_forward is not None and duration_backward is not None:
        duration = (duration_forward + duration_backward) / 2.0

    return MultiMatchResult.from_components(
        shape=float(shape),
        direction=float(direction),
        length=float(length),
        position=float(position),
        duration=duration,
    )
