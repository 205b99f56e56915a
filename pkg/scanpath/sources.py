"""
Scanpath sources: named ways of producing one scanpath per dataset record.

Spec strings accepted by ``build_source``:
    ground-truth[:k]     observer k (default 0)
    center-bias[:n]      center-bias sample of n fixations
    wta[:n]              winner-takes-all on the record's saliency map
    checkpoint:<path>    trained regressor, clamped prediction
    predictions:<path>   first scanpath per image_id in a canonical-format file
"""

import logging
from pathlib import Path
from typing import Callable, Dict, Optional, Union

import numpy as np

from . import config
from .baselines import center_bias, wta_scanpath
from .errors import InputError
from .ingest import load_dataset, load_image, load_record_saliency, mix_seed, resolve_asset, stable_hash
from .models import DatasetRecord, Scanpath, WtaConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class ScanpathSource:
    """Callable ``record -> Scanpath`` with a display name."""

    def __init__(self, name: str, produce: Callable[[DatasetRecord], Scanpath], all_observers: bool = False):
        self.name = name
        self._produce = produce
        self.all_observers = all_observers  # ground truth without an index

    def __call__(self, record: DatasetRecord) -> Scanpath:
        scanpath = self._produce(record)
        return scanpath.model_copy(
            update={
                "image_id": record.image_id,
                "image_width": record.image_width,
                "image_height": record.image_height,
            }
        )

    def __repr__(self) -> str:
        return f"ScanpathSource({self.name!r})"


def _split_spec(spec: str):
    kind, _, arg = spec.partition(":")
    return kind.strip(), arg.strip()


def _int_arg(arg: str, default: int, spec: str) -> int:
    if not arg:
        return default
    try:
        value = int(arg)
    except ValueError as exc:
        raise InputError(f"source {spec!r}: expected an integer, got {arg!r}") from exc
    if value < 0:
        raise InputError(f"source {spec!r}: value must be non-negative")
    return value


def ground_truth_source(observer: int = 0, all_observers: bool = False) -> ScanpathSource:
    def produce(record: DatasetRecord) -> Scanpath:
        if observer >= len(record.scanpaths):
            raise InputError(
                f"image {record.image_id!r} has {len(record.scanpaths)} scanpaths, no observer {observer}"
            )
        return record.scanpaths[observer]

    name = "ground-truth" if all_observers else f"ground-truth:{observer}"
    return ScanpathSource(name, produce, all_observers=all_observers)


def center_bias_source(seed: int, n: int = config.DEFAULT_SCANPATH_LEN) -> ScanpathSource:
    def produce(record: DatasetRecord) -> Scanpath:
        return center_bias(n, mix_seed(seed, stable_hash(record.image_id)))

    return ScanpathSource("center-bias", produce)


def wta_source(
    base_dir: Optional[PathLike] = None,
    cfg: Optional[WtaConfig] = None,
    saliency: Optional[Dict[str, np.ndarray]] = None,
) -> ScanpathSource:
    cfg = cfg or WtaConfig()

    def produce(record: DatasetRecord) -> Scanpath:
        if saliency is not None and record.image_id in saliency:
            return wta_scanpath(saliency[record.image_id], cfg)
        saliency_map = load_record_saliency(record, base_dir)
        if saliency_map is None:
            raise InputError(f"wta needs a saliency map; image {record.image_id!r} has none")
        return wta_scanpath(saliency_map, cfg)

    return ScanpathSource("wta", produce)


def model_source(
    model,
    base_dir: Optional[PathLike] = None,
    images: Optional[Dict[str, np.ndarray]] = None,
    name: str = "model",
) -> ScanpathSource:
    height, width, _ = model.config.input_size

    def produce(record: DatasetRecord) -> Scanpath:
        if images is not None and record.image_id in images:
            image = images[record.image_id]
        else:
            path = resolve_asset(record.image_path, base_dir)
            if path is None:
                raise InputError(f"image {record.image_id!r} has no stimulus image to predict from")
            image = load_image(path, (height, width))
        return model.predict(image).to_scanpath()

    return ScanpathSource(name, produce)


def predictions_source(path: PathLike) -> ScanpathSource:
    by_image = {record.image_id: record.scanpaths[0] for record in load_dataset(path)}

    def produce(record: DatasetRecord) -> Scanpath:
        try:
            return by_image[record.image_id]
        except KeyError:
            raise InputError(f"no prediction for image {record.image_id!r} in {path}") from None

    return ScanpathSource(f"predictions:{Path(path).name}", produce)


def build_source(
    spec: str,
    seed: int = 0,
    base_dir: Optional[PathLike] = None,
    images: Optional[Dict[str, np.ndarray]] = None,
    saliency: Optional[Dict[str, np.ndarray]] = None,
) -> ScanpathSource:
    kind, arg = _split_spec(spec)
    if kind == "ground-truth":
        return ground_truth_source(_int_arg(arg, 0, spec), all_observers=not arg)
    if kind == "center-bias":
        return center_bias_source(seed, max(_int_arg(arg, config.DEFAULT_SCANPATH_LEN, spec), 1))
    if kind == "wta":
        n = _int_arg(arg, config.DEFAULT_SCANPATH_LEN, spec)
        return wta_source(base_dir, WtaConfig(n_fixations=max(n, 1)), saliency)
    if kind == "checkpoint":
        if not arg:
            raise InputError("checkpoint source needs a path: checkpoint:<path>")
        from .checkpoint import load_checkpoint

        checkpoint = Path(arg)
        return model_source(load_checkpoint(checkpoint), base_dir, images, name=f"checkpoint:{checkpoint.name}")
    if kind == "predictions":
        if not arg:
            raise InputError("predictions source needs a path: predictions:<path>")
        return predictions_source(arg)
    raise InputError(
        f"unknown source {spec!r}; expected ground-truth[:k], center-bias[:n], wta[:n], "
        "checkpoint:<path> or predictions:<path>"
    )
