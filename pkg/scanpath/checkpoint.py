"""
Parameter container for trained regressors.

Binary layout (little endian):
    b"SPLB1"                     magic
    uint32                       layer count
    per layer:
        uint32 x 7               out_ch, in_ch, kh, kw, bias length, stride, padding
        float64 x out*in*kh*kw   weights, C order
        float64 x bias length    bias

The architecture travels in a JSON sidecar at ``<checkpoint>.json``.
"""

import logging
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
from pydantic import ValidationError

from .errors import InputError
from .models import ModelConfig
from .regressor import Regressor, build
from .tensor import ConvParams

logger = logging.getLogger(__name__)

MAGIC = b"SPLB1"
_U32 = np.dtype("<u4")
_F64 = np.dtype("<f8")
_DESCRIPTOR_LEN = 7

PathLike = Union[str, Path]


def sidecar_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def encode_parameters(layers: Sequence[ConvParams]) -> bytes:
    chunks = [MAGIC, np.array([len(layers)], dtype=_U32).tobytes()]
    for layer in layers:
        out_ch, in_ch, kh, kw = layer.weights.shape
        descriptor = [out_ch, in_ch, kh, kw, layer.bias.shape[0], layer.stride, layer.padding]
        chunks.append(np.array(descriptor, dtype=_U32).tobytes())
        chunks.append(np.ascontiguousarray(layer.weights, dtype=_F64).tobytes())
        chunks.append(np.ascontiguousarray(layer.bias, dtype=_F64).tobytes())
    return b"".join(chunks)


def decode_parameters(data: bytes) -> List[ConvParams]:
    if data[:len(MAGIC)] != MAGIC:
        raise InputError("not an SPLB1 checkpoint (bad magic)")
    offset = len(MAGIC)

    def take(count: int, dtype: np.dtype) -> np.ndarray:
        nonlocal offset
        size = count * dtype.itemsize
        if offset + size > len(data):
            raise InputError("truncated checkpoint")
        chunk = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
        offset += size
        return chunk

    (layer_count,) = take(1, _U32)
    layers = []
    for _ in range(int(layer_count)):
        out_ch, in_ch, kh, kw, bias_len, stride, padding = (int(v) for v in take(_DESCRIPTOR_LEN, _U32))
        weights = take(out_ch * in_ch * kh * kw, _F64).reshape(out_ch, in_ch, kh, kw)
        bias = take(bias_len, _F64)
        layers.append(
            ConvParams(weights.astype(np.float64), bias.astype(np.float64), stride=stride, padding=padding)
        )
    if offset != len(data):
        raise InputError(f"{len(data) - offset} trailing bytes after the last layer")
    return layers


def save_checkpoint(model: Regressor, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_parameters(model.layers))
    sidecar_path(path).write_text(model.config.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("Saved checkpoint with %d layers to %s", len(model.layers), path)
    return path


def load_checkpoint(path: PathLike) -> Regressor:
    path = Path(path)
    try:
        data = path.read_bytes()
        sidecar = sidecar_path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read checkpoint {path}: {exc}") from exc
    try:
        model_config = ModelConfig.model_validate_json(sidecar)
    except ValidationError as exc:
        raise InputError(f"invalid architecture sidecar for {path}: {exc}") from exc

    layers = decode_parameters(data)
    model = Regressor(config=model_config, layers=layers)
    _check_architecture(model)
    logger.info("Loaded checkpoint %s", path)
    return model


def _check_architecture(model: Regressor) -> None:
    """The decoded layers must be the ones ``build`` would create for the sidecar config."""
    expected = build(model.config).layers
    if len(expected) != len(model.layers):
        raise InputError(
            f"checkpoint has {len(model.layers)} layers, architecture needs {len(expected)}"
        )
    for index, (want, got) in enumerate(zip(expected, model.layers)):
        if (want.weights.shape, want.stride, want.padding) != (got.weights.shape, got.stride, got.padding):
            raise InputError(f"layer {index} does not match the architecture sidecar")
