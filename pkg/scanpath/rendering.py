"""
Figure output with reportlab: scanpath overlays, fixation density heatmaps and
training curves. The file suffix picks the renderer (.svg or .pdf).
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from reportlab.graphics import renderPDF, renderSVG
from reportlab.graphics.shapes import Circle, Drawing, Group, Line, PolyLine, Polygon, Rect, String
from reportlab.lib import colors

from .core import SaliencyMap
from .errors import InputError
from .models import RenderSpec, Scanpath, TrainReport

logger = logging.getLogger(__name__)

MAX_BACKDROP_CELLS = 64
ARROW_LENGTH = 8.0
ARROW_HALF_WIDTH = 4.0
CHART_MARGIN = 48.0


@dataclass(frozen=True)
class FixationMarker:
    label: str
    x: float  # drawing units, origin bottom-left
    y: float


@dataclass(frozen=True)
class SaccadeArrow:
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def length(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)


@dataclass(frozen=True)
class OverlayPlan:
    markers: Tuple[FixationMarker, ...]
    arrows: Tuple[SaccadeArrow, ...]


def _to_drawing(x: float, y: float, spec: RenderSpec) -> Tuple[float, float]:
    # image y grows downwards, drawing y upwards
    return x * spec.width, (1.0 - y) * spec.height


def overlay_plan(scanpath: Scanpath, spec: Optional[RenderSpec] = None) -> OverlayPlan:
    """Numbered markers 1..n and one arrow per saccade."""
    spec = spec or RenderSpec()
    points = [_to_drawing(f.x, f.y, spec) for f in scanpath.fixations]
    markers = tuple(FixationMarker(str(i + 1), x, y) for i, (x, y) in enumerate(points))
    arrows = tuple(SaccadeArrow(x0, y0, x1, y1) for (x0, y0), (x1, y1) in zip(points, points[1:]))
    return OverlayPlan(markers=markers, arrows=arrows)


def _gray(value: float) -> colors.Color:
    return colors.Color(value, value, value)


def _heatmap(values: np.ndarray, width: float, height: float) -> Group:
    """Grayscale cells, brightest at the maximum, coarsened to at most 64x64."""
    grid = np.asarray(values, dtype=np.float64)
    rows, cols = grid.shape
    step_r = max(1, math.ceil(rows / MAX_BACKDROP_CELLS))
    step_c = max(1, math.ceil(cols / MAX_BACKDROP_CELLS))
    coarse = np.array(
        [
            [grid[r:r + step_r, c:c + step_c].mean() for c in range(0, cols, step_c)]
            for r in range(0, rows, step_r)
        ]
    )
    peak = coarse.max()
    scaled = coarse / peak if peak > 0 else coarse
    cell_w = width / coarse.shape[1]
    cell_h = height / coarse.shape[0]
    group = Group()
    for r, row in enumerate(scaled):
        for c, value in enumerate(row):
            group.add(
                Rect(
                    c * cell_w,
                    height - (r + 1) * cell_h,
                    cell_w,
                    cell_h,
                    fillColor=_gray(float(value)),
                    strokeColor=None,
                )
            )
    return group


def _arrowhead(arrow: SaccadeArrow, spec: RenderSpec) -> Optional[Polygon]:
    length = arrow.length
    if length == 0:
        return None
    ux = (arrow.x1 - arrow.x0) / length
    uy = (arrow.y1 - arrow.y0) / length
    # tip sits on the edge of the target marker
    tip_x = arrow.x1 - ux * spec.point_radius
    tip_y = arrow.y1 - uy * spec.point_radius
    base_x = tip_x - ux * ARROW_LENGTH
    base_y = tip_y - uy * ARROW_LENGTH
    color = colors.HexColor(spec.saccade_color)
    return Polygon(
        [
            tip_x, tip_y,
            base_x - uy * ARROW_HALF_WIDTH, base_y + ux * ARROW_HALF_WIDTH,
            base_x + uy * ARROW_HALF_WIDTH, base_y - ux * ARROW_HALF_WIDTH,
        ],
        fillColor=color,
        strokeColor=color,
        strokeWidth=0.5,
    )


def draw_overlay(
    plan: OverlayPlan,
    spec: Optional[RenderSpec] = None,
    saliency: Optional[Union[SaliencyMap, np.ndarray]] = None,
) -> Drawing:
    spec = spec or RenderSpec()
    drawing = Drawing(spec.width, spec.height)
    if saliency is not None:
        values = saliency.values if isinstance(saliency, SaliencyMap) else saliency
        drawing.add(_heatmap(values, spec.width, spec.height))
    else:
        drawing.add(Rect(0, 0, spec.width, spec.height, fillColor=colors.white, strokeColor=colors.lightgrey))

    saccade_color = colors.HexColor(spec.saccade_color)
    for arrow in plan.arrows:
        drawing.add(
            Line(arrow.x0, arrow.y0, arrow.x1, arrow.y1, strokeColor=saccade_color, strokeWidth=spec.stroke_width)
        )
        head = _arrowhead(arrow, spec)
        if head is not None:
            drawing.add(head)

    fixation_color = colors.HexColor(spec.fixation_color)
    label_color = colors.HexColor(spec.label_color)
    for marker in plan.markers:
        drawing.add(Circle(marker.x, marker.y, spec.point_radius, fillColor=fixation_color, strokeColor=None))
        drawing.add(
            String(
                marker.x,
                marker.y - spec.font_size / 3.0,
                marker.label,
                textAnchor="middle",
                fontSize=spec.font_size,
                fillColor=label_color,
            )
        )
    return drawing


def draw_density(grid: np.ndarray, spec: Optional[RenderSpec] = None) -> Drawing:
    spec = spec or RenderSpec()
    drawing = Drawing(spec.width, spec.height)
    drawing.add(_heatmap(grid, spec.width, spec.height))
    return drawing


def _chart_points(
    xs: Sequence[float],
    ys: Sequence[float],
    x_max: float,
    y_max: float,
    box: Tuple[float, float, float, float],
) -> List[float]:
    left, bottom, width, height = box
    points: List[float] = []
    for x, y in zip(xs, ys):
        points.append(left + (x / x_max) * width if x_max > 0 else left)
        points.append(bottom + (y / y_max) * height if y_max > 0 else bottom)
    return points


def draw_training_curves(report: TrainReport, spec: Optional[RenderSpec] = None) -> Drawing:
    """Loss per epoch (top panel) and wall-clock seconds per epoch (bottom panel)."""
    spec = spec or RenderSpec()
    if not report.epochs:
        raise InputError("training report has no epochs to plot")
    drawing = Drawing(spec.width, spec.height)
    epochs = [record.epoch for record in report.epochs]
    x_max = float(max(epochs))
    panel_h = (spec.height - 3 * CHART_MARGIN) / 2.0
    panel_w = spec.width - 2 * CHART_MARGIN
    loss_box = (CHART_MARGIN, 2 * CHART_MARGIN + panel_h, panel_w, panel_h)
    time_box = (CHART_MARGIN, CHART_MARGIN, panel_w, panel_h)

    train = [record.train_loss for record in report.epochs]
    val = [record.val_loss for record in report.epochs if record.val_loss is not None]
    seconds = [record.seconds for record in report.epochs]
    loss_max = max(train + val)

    for box, title in ((loss_box, "MSE loss"), (time_box, "seconds per epoch")):
        left, bottom, width, height = box
        drawing.add(Rect(left, bottom, width, height, fillColor=None, strokeColor=colors.grey))
        drawing.add(String(left, bottom + height + 6, title, fontSize=spec.font_size))
    drawing.add(String(spec.width / 2.0, 12, "epoch", textAnchor="middle", fontSize=spec.font_size))

    saccade_color = colors.HexColor(spec.saccade_color)
    fixation_color = colors.HexColor(spec.fixation_color)
    drawing.add(
        PolyLine(
            _chart_points(epochs, train, x_max, loss_max, loss_box),
            strokeColor=saccade_color,
            strokeWidth=spec.stroke_width,
        )
    )
    if len(val) == len(epochs):
        drawing.add(
            PolyLine(
                _chart_points(epochs, val, x_max, loss_max, loss_box),
                strokeColor=fixation_color,
                strokeWidth=spec.stroke_width,
            )
        )
    drawing.add(
        PolyLine(
            _chart_points(epochs, seconds, x_max, max(seconds), time_box),
            strokeColor=saccade_color,
            strokeWidth=spec.stroke_width,
        )
    )
    return drawing


def save_drawing(drawing: Drawing, path: Union[str, Path]) -> Path:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".svg":
        renderSVG.drawToFile(drawing, str(path))
    elif suffix == ".pdf":
        renderPDF.drawToFile(drawing, str(path))
    else:
        raise InputError(f"unsupported figure format {suffix!r}; use .svg or .pdf")
    logger.info("Wrote figure %s", path)
    return path
