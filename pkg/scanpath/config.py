"""
Environment settings, documented defaults and the JSON run-config loader.
"""

import json
import logging
import os
from pathlib import Path
from typing import TYPE_CHECKING, Tuple, Union

from pydantic import ValidationError

from .errors import InputError

if TYPE_CHECKING:
    from .models import ModelConfig, TrainConfig

logger = logging.getLogger(__name__)

ENVIRONMENT = os.getenv("ENVIRONMENT", "development")
LOG_LEVEL = os.getenv("SCANPATH_LOG_LEVEL", "INFO").upper()
DATA_DIR = os.getenv("SCANPATH_DATA_DIR", "")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

ALLOWED_ORIGINS = ["*"] if ENVIRONMENT == "development" else [
    "http://localhost:3000",
    "http://127.0.0.1:3000",
]

DEFAULT_SCANPATH_LEN = 8
DEFAULT_LEARNING_RATE = 0.0003
DEFAULT_EPOCHS = 25
DEFAULT_VAL_FRACTION = 0.1
OTSU_BINS = 256
CENTER_BIAS_STD = 0.15
IOR_RADIUS = 0.1
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
SEED_MASK = (1 << 64) - 1  # seeds are reduced to unsigned 64 bit


def log_level() -> int:
    level = logging.getLevelName(LOG_LEVEL)
    return level if isinstance(level, int) else logging.INFO


def load_run_config(path: Union[str, Path]) -> Tuple["ModelConfig", "TrainConfig"]:
    """
    Load a run configuration file.

    Accepts ``{"model": {...}, "train": {...}}`` or a flat object whose keys are
    ModelConfig/TrainConfig field names. Missing keys fall back to defaults.
    """
    from .models import ModelConfig, TrainConfig

    config_path = Path(path)
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise InputError(f"cannot read config {config_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config {config_path} is not valid JSON: {exc}") from exc

    if not isinstance(data, dict):
        raise InputError(f"config {config_path} must be a JSON object")

    if "model" in data or "train" in data:
        unknown = set(data) - {"model", "train"}
        if unknown:
            raise InputError(f"unknown config sections: {sorted(unknown)}")
        model_data = data.get("model") or {}
        train_data = data.get("train") or {}
    else:
        model_fields = set(ModelConfig.model_fields)
        train_fields = set(TrainConfig.model_fields)
        unknown = set(data) - model_fields - train_fields
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        # "seed" exists in both; a flat file seeds both
        model_data = {k: v for k, v in data.items() if k in model_fields}
        train_data = {k: v for k, v in data.items() if k in train_fields}

    try:
        model_cfg = ModelConfig.model_validate(model_data)
        train_cfg = TrainConfig.model_validate(train_data)
    except ValidationError as exc:
        raise InputError(f"invalid config {config_path}: {exc}") from exc

    logger.info("Loaded run config from %s", config_path)
    return model_cfg, train_cfg
