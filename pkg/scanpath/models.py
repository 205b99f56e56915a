from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import config


class CoordinateMode(str, Enum):
    """How fixation coordinates are expressed in a dataset file."""
    NORMALIZED = "normalized"
    PIXEL_ORIGIN0 = "pixel_origin0"
    PIXEL_ORIGIN1 = "pixel_origin1"


class Fixation(BaseModel):
    """A gaze fixation in normalized image coordinates."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    x: float = Field(ge=0.0, le=1.0)  # fraction of image width
    y: float = Field(ge=0.0, le=1.0)  # fraction of image height
    t: Optional[float] = Field(default=None, ge=0.0)    # ms since stimulus onset
    dur: Optional[float] = Field(default=None, ge=0.0)  # ms

    def to_row(self) -> list:
        if self.dur is not None:
            return [self.x, self.y, self.t, self.dur]
        if self.t is not None:
            return [self.x, self.y, self.t]
        return [self.x, self.y]


class Scanpath(BaseModel):
    model_config = ConfigDict(frozen=True)

    fixations: Tuple[Fixation, ...] = Field(min_length=1)
    image_id: str = ""
    image_width: int = Field(default=1, gt=0)   # pixels; 1 when unknown
    image_height: int = Field(default=1, gt=0)

    @model_validator(mode="after")
    def _check_timestamps(self) -> "Scanpath":
        for prev, cur in zip(self.fixations, self.fixations[1:]):
            if prev.t is not None and cur.t is not None and cur.t < prev.t:
                raise ValueError(f"timestamps decrease in scanpath for {self.image_id!r}")
        return self

    @classmethod
    def from_points(cls, points: Sequence[Sequence[Optional[float]]], **kwargs) -> "Scanpath":
        """Build from rows of ``[x, y]`` or ``[x, y, t, dur]`` (t may be None)."""
        fixations = []
        for index, row in enumerate(points):
            if not 2 <= len(row) <= 4:
                raise ValueError(
                    f"fixation {index} has {len(row)} values; expected [x, y], [x, y, t] or [x, y, t, dur]"
                )
            fixations.append(
                Fixation(
                    x=row[0],
                    y=row[1],
                    t=row[2] if len(row) > 2 else None,
                    dur=row[3] if len(row) > 3 else None,
                )
            )
        return cls(fixations=tuple(fixations), **kwargs)

    def __len__(self) -> int:
        return len(self.fixations)

    def xy(self) -> np.ndarray:
        """Fixation coordinates as a float64 array of shape (n, 2)."""
        return np.array([[f.x, f.y] for f in self.fixations], dtype=np.float64)

    def durations(self) -> Optional[np.ndarray]:
        if any(f.dur is None for f in self.fixations):
            return None
        return np.array([f.dur for f in self.fixations], dtype=np.float64)

    def to_rows(self) -> List[list]:
        return [f.to_row() for f in self.fixations]


class DatasetRecord(BaseModel):
    """One image with every observer's scanpath."""
    model_config = ConfigDict(frozen=True)

    image_id: str
    image_width: int = Field(gt=0)
    image_height: int = Field(gt=0)
    scanpaths: Tuple[Scanpath, ...] = Field(min_length=1)
    saliency_path: Optional[str] = None
    image_path: Optional[str] = None
    split: Optional[str] = None

    @model_validator(mode="after")
    def _check_dimensions(self) -> "DatasetRecord":
        for scanpath in self.scanpaths:
            if (scanpath.image_width, scanpath.image_height) != (self.image_width, self.image_height):
                raise ValueError(f"scanpath dimensions differ from record {self.image_id!r}")
        return self


class StatsSummary(BaseModel):
    """Scanpath length statistics over a set of records."""
    min: int = Field(ge=0)
    max: int = Field(ge=0)
    mean: float
    median: int
    std: float = Field(ge=0.0)  # population
    mode: int
    mode_share: float = Field(ge=0.0, le=1.0)
    count: int = Field(ge=0)  # number of scanpaths


class MultiMatchResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    shape: float = Field(ge=0.0, le=1.0)
    direction: float = Field(ge=0.0, le=1.0)
    length: float = Field(ge=0.0, le=1.0)
    position: float = Field(ge=0.0, le=1.0)
    duration: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    score: float = Field(ge=0.0, le=1.0)

    @classmethod
    def from_components(
        cls,
        shape: float,
        direction: float,
        length: float,
        position: float,
        duration: Optional[float] = None,
    ) -> "MultiMatchResult":
        # duration never enters the score
        score = (shape + direction + length + position) / 4.0
        return cls(
            shape=shape,
            direction=direction,
            length=length,
            position=position,
            duration=duration,
            score=score,
        )


class ModelConfig(BaseModel):
    """Architecture of the convolutional scanpath regressor."""
    model_config = ConfigDict(extra="forbid")

    input_size: Tuple[int, int, int] = (64, 64, 3)  # (height, width, channels)
    blocks: Tuple[Tuple[int, int], ...] = ((2, 16), (2, 32), (2, 64))  # (conv count, channels)
    scanpath_len: int = Field(default=config.DEFAULT_SCANPATH_LEN, gt=0)
    kernel_size: int = Field(default=3, gt=0)
    seed: int = 0

    def readout_kernel(self) -> Tuple[int, int]:
        """Spatial size of the final feature map, which the readout kernel spans."""
        from .errors import InputError

        height, width, channels = self.input_size
        if height < 1 or width < 1 or channels < 1:
            raise InputError(f"invalid input size {self.input_size}")
        if self.kernel_size % 2 == 0:
            raise InputError(f"kernel_size must be odd, got {self.kernel_size}")
        for index, (conv_count, channels_out) in enumerate(self.blocks):
            if conv_count < 1 or channels_out < 1:
                raise InputError(f"block {index} needs at least one conv and one channel")
            if height % 2 or width % 2:
                raise InputError(
                    f"block {index} pools an odd feature map ({height}x{width})"
                )
            height //= 2
            width //= 2
            if height < 1 or width < 1:
                raise InputError(f"blocks reduce spatial dims below 1 at block {index}")
        return height, width


class PredictedScanpath(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: Tuple[Tuple[float, float], ...]   # raw model output
    clamped: Tuple[Tuple[float, float], ...]  # points clamped to [0, 1]

    @classmethod
    def from_outputs(cls, outputs: np.ndarray) -> "PredictedScanpath":
        pairs = np.asarray(outputs, dtype=np.float64).reshape(-1, 2)
        clipped = np.clip(pairs, 0.0, 1.0)
        return cls(
            points=tuple((float(x), float(y)) for x, y in pairs),
            clamped=tuple((float(x), float(y)) for x, y in clipped),
        )

    def to_scanpath(self, image_id: str = "", image_width: int = 1, image_height: int = 1) -> Scanpath:
        return Scanpath.from_points(
            self.clamped,
            image_id=image_id,
            image_width=image_width,
            image_height=image_height,
        )


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(default=config.DEFAULT_EPOCHS, ge=0)
    lr: float = Field(default=config.DEFAULT_LEARNING_RATE, gt=0.0)
    batch_size: int = Field(default=1, gt=0)
    seed: int = 0
    val_fraction: float = Field(default=config.DEFAULT_VAL_FRACTION, ge=0.0, lt=1.0)


class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    val_loss: Optional[float] = None
    steps: int
    seconds: float  # wall clock


class TrainReport(BaseModel):
    epochs: List[EpochRecord] = Field(default_factory=list)
    checkpoint: Optional[str] = None
    architecture: Optional[ModelConfig] = None
    training: Optional[TrainConfig] = None
    n_train: int = 0
    n_val: int = 0
    steps: int = 0
    final_train_loss: Optional[float] = None
    total_seconds: float = 0.0

    def deterministic_dump(self) -> dict:
        """Report contents without wall-clock fields."""
        data = self.model_dump(mode="json", exclude={"total_seconds"})
        for epoch in data["epochs"]:
            epoch.pop("seconds", None)
        return data


class WtaConfig(BaseModel):
    n_fixations: int = Field(default=8, gt=0)
    ior_radius: float = Field(default=config.IOR_RADIUS, gt=0.0, lt=1.0)  # normalized units


class EvalRow(BaseModel):
    """One row of a comparison table."""
    source: str
    images: int = 0
    comparisons: int = 0
    shape: Optional[float] = None
    direction: Optional[float] = None
    length: Optional[float] = None
    position: Optional[float] = None
    score: Optional[float] = None
    duration: Optional[float] = None
    nss: Optional[float] = None
    congruency: Optional[float] = None


class EvalTable(BaseModel):
    dataset: str
    rows: List[EvalRow] = Field(default_factory=list)


class RenderSpec(BaseModel):
    """Presentation knobs for emitted figures (units are points)."""
    stroke_width: float = Field(default=2.0, gt=0.0)
    point_radius: float = Field(default=9.0, gt=0.0)
    saccade_color: str = "#1f77b4"
    fixation_color: str = "#d62728"
    label_color: str = "#ffffff"
    font_size: float = Field(default=9.0, gt=0.0)
    width: float = Field(default=512.0, gt=0.0)
    height: float = Field(default=512.0, gt=0.0)
