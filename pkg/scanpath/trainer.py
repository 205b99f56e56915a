"""
Training loop for the scanpath regressor: one randomly chosen observer per
image, MSE on the resampled fixed-length target, Adam updates, per-epoch
timing.
"""

import logging
import math
import time
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import EmptyDatasetError, InputError, NonFiniteError, ShapeMismatchError
from .ingest import load_image, mix_seed, resample_scanpath, resolve_asset, select_random_scanpath
from .models import DatasetRecord, EpochRecord, ModelConfig, TrainConfig, TrainReport
from .regressor import Regressor, batch_loss_and_grads, build, flatten_gradients, forward
from .tensor import AdamState, adam_step

logger = logging.getLogger(__name__)

# stream keys for mix_seed
_SPLIT_STREAM = 1
_ORDER_STREAM = 2

ImageMap = Mapping[str, np.ndarray]


def split_records(
    records: Sequence[DatasetRecord],
    val_fraction: float,
    seed: int,
) -> Tuple[List[DatasetRecord], List[DatasetRecord]]:
    """Seeded shuffle split; at least one record always trains."""
    n = len(records)
    order = np.random.default_rng(mix_seed(seed, _SPLIT_STREAM)).permutation(n)
    n_val = min(int(math.floor(n * val_fraction)), max(n - 1, 0))
    val_index = set(int(i) for i in order[:n_val])
    train = [record for i, record in enumerate(records) if i not in val_index]
    val = [record for i, record in enumerate(records) if i in val_index]
    return train, val


def load_images(
    records: Sequence[DatasetRecord],
    model_cfg: ModelConfig,
    images: Optional[ImageMap] = None,
    base_dir: Optional[Union[str, Path]] = None,
) -> Dict[str, np.ndarray]:
    """Stimulus arrays (3, H, W) keyed by image_id, from ``images`` or the record's file."""
    height, width, channels = model_cfg.input_size
    loaded: Dict[str, np.ndarray] = {}
    for record in records:
        if images is not None and record.image_id in images:
            array = np.asarray(images[record.image_id], dtype=np.float64)
        else:
            path = resolve_asset(record.image_path, base_dir)
            if path is None:
                raise InputError(f"record {record.image_id!r} has no image")
            array = load_image(path, (height, width))
        if array.shape != (channels, height, width):
            raise ShapeMismatchError(
                f"image {record.image_id!r} has shape {array.shape}, model expects {(channels, height, width)}"
            )
        loaded[record.image_id] = array
    return loaded


def epoch_target(record: DatasetRecord, seed: int, epoch: int, length: int) -> np.ndarray:
    """The (length, 2) target for ``record`` in ``epoch``; the observer is redrawn every epoch."""
    chosen = select_random_scanpath(record, mix_seed(seed, epoch))
    return resample_scanpath(chosen, length).xy()


def evaluate_loss(
    model: Regressor,
    records: Sequence[DatasetRecord],
    images: ImageMap,
    cfg: TrainConfig,
    epoch: int = 1,
) -> Optional[float]:
    """Mean MSE over ``records`` with the epoch's observer choice; None when empty."""
    if not records:
        return None
    length = model.config.scanpath_len
    total = 0.0
    for record in records:
        outputs, _ = forward(model, images[record.image_id][None])
        target = epoch_target(record, cfg.seed, epoch, length).reshape(1, -1)
        total += float(np.mean((outputs - target) ** 2))
    return total / len(records)


def train(
    records: Sequence[DatasetRecord],
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    images: Optional[ImageMap] = None,
    base_dir: Optional[Union[str, Path]] = None,
    model: Optional[Regressor] = None,
) -> Tuple[Regressor, TrainReport]:
    if not records:
        raise EmptyDatasetError()
    model = model if model is not None else build(model_cfg)
    report = TrainReport(architecture=model_cfg, training=train_cfg)
    if train_cfg.epochs == 0:
        logger.info("epochs=0, returning the initialized model")
        return model, report

    train_records, val_records = split_records(records, train_cfg.val_fraction, train_cfg.seed)
    stimuli = load_images(records, model_cfg, images, base_dir)
    report.n_train = len(train_records)
    report.n_val = len(val_records)
    logger.info(
        "Training on %d images (%d held out) for %d epochs, lr %g, batch size %d",
        len(train_records),
        len(val_records),
        train_cfg.epochs,
        train_cfg.lr,
        train_cfg.batch_size,
    )

    params = model.parameters()
    state = AdamState.for_parameters(params, lr=train_cfg.lr)
    length = model_cfg.scanpath_len
    run_start = time.perf_counter()

    for epoch in range(1, train_cfg.epochs + 1):
        epoch_start = time.perf_counter()
        order = np.random.default_rng(mix_seed(train_cfg.seed, _ORDER_STREAM, epoch)).permutation(
            len(train_records)
        )
        weighted_loss = 0.0
        steps = 0
        for start in range(0, len(order), train_cfg.batch_size):
            batch = [train_records[int(i)] for i in order[start:start + train_cfg.batch_size]]
            batch_ids = ", ".join(record.image_id for record in batch)
            inputs = np.stack([stimuli[record.image_id] for record in batch])
            targets = np.stack([epoch_target(record, train_cfg.seed, epoch, length) for record in batch])
            try:
                loss, grads = batch_loss_and_grads(model, inputs, targets)
                if not math.isfinite(loss):
                    raise NonFiniteError("non-finite loss")
                adam_step(params, flatten_gradients(grads), state)
            except NonFiniteError as exc:
                raise NonFiniteError(f"epoch {epoch}, image(s) {batch_ids}: {exc.detail}") from exc
            weighted_loss += loss * len(batch)
            steps += 1

        train_loss = weighted_loss / len(train_records)
        val_loss = evaluate_loss(model, val_records, stimuli, train_cfg, epoch)
        seconds = time.perf_counter() - epoch_start
        report.epochs.append(
            EpochRecord(epoch=epoch, train_loss=train_loss, val_loss=val_loss, steps=steps, seconds=seconds)
        )
        report.steps += steps
        logger.info(
            "Epoch %d/%d: train loss %.6f, val loss %s, %.2fs",
            epoch,
            train_cfg.epochs,
            train_loss,
            f"{val_loss:.6f}" if val_loss is not None else "n/a",
            seconds,
        )

    report.final_train_loss = report.epochs[-1].train_loss
    report.total_seconds = time.perf_counter() - run_start
    return model, report
