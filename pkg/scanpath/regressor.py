"""
Fully-convolutional scanpath regressor.

A stack of conv+ReLU blocks, each closed by 2x2 max pooling, followed by a
readout convolution whose kernel spans the whole final feature map. The
readout emits ``2 * scanpath_len`` channels at 1x1: channel ``2k`` is x_k and
``2k + 1`` is y_k, regressed in normalized coordinates with no squashing.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from .config import SEED_MASK
from .errors import InputError, ShapeMismatchError
from .models import ModelConfig, PredictedScanpath, Scanpath
from .tensor import (
    ConvParams,
    Tensor4,
    check_finite,
    conv2d_backward,
    conv2d_forward,
    maxpool2x2,
    maxpool_backward,
    relu,
    relu_backward,
)

logger = logging.getLogger(__name__)

Gradients = List[Tuple[np.ndarray, np.ndarray]]


@dataclass
class Regressor:
    config: ModelConfig
    layers: List[ConvParams]  # backbone convs in order, readout last

    @property
    def readout(self) -> ConvParams:
        return self.layers[-1]

    def parameters(self) -> List[np.ndarray]:
        """Weights and biases in layer order: [w0, b0, w1, b1, ...]."""
        flat = []
        for layer in self.layers:
            flat.extend((layer.weights, layer.bias))
        return flat

    def copy(self) -> "Regressor":
        return Regressor(
            config=self.config,
            layers=[
                ConvParams(layer.weights.copy(), layer.bias.copy(), layer.stride, layer.padding)
                for layer in self.layers
            ],
        )

    def predict(self, image: Union[Tensor4, np.ndarray]) -> PredictedScanpath:
        batch = self._as_batch(image)
        if batch.shape[0] != 1:
            raise ShapeMismatchError(f"predict takes a single image, got batch of {batch.shape[0]}")
        outputs, _ = forward(self, batch)
        check_finite(outputs, "model output")
        return PredictedScanpath.from_outputs(outputs[0])

    def loss_and_grads(
        self,
        image: Union[Tensor4, np.ndarray],
        target: Union[Scanpath, np.ndarray],
    ) -> Tuple[float, Gradients]:
        """MSE over every output coordinate, with gradients for every layer."""
        batch = self._as_batch(image)
        if isinstance(target, Scanpath):
            targets = target.xy()[None]
        else:
            targets = np.asarray(target, dtype=np.float64)
            if targets.ndim == 2:
                targets = targets[None]
        return batch_loss_and_grads(self, batch, targets)

    def _as_batch(self, image: Union[Tensor4, np.ndarray]) -> np.ndarray:
        data = image.data if isinstance(image, Tensor4) else np.asarray(image, dtype=np.float64)
        if data.ndim == 3:
            data = data[None]
        height, width, channels = self.config.input_size
        if data.ndim != 4 or data.shape[1:] != (channels, height, width):
            raise ShapeMismatchError(
                f"image shape {data.shape} does not match model input ({channels}, {height}, {width})"
            )
        return data


def he_uniform(rng: np.random.Generator, shape: Tuple[int, int, int, int]) -> np.ndarray:
    fan_in = shape[1] * shape[2] * shape[3]
    limit = math.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


def build(config: ModelConfig) -> Regressor:
    """Initialize a regressor from ``config.seed`` (He-uniform weights, zero bias)."""
    readout_h, readout_w = config.readout_kernel()
    rng = np.random.default_rng(config.seed & SEED_MASK)
    kernel = config.kernel_size
    padding = (kernel - 1) // 2

    layers: List[ConvParams] = []
    channels = config.input_size[2]
    for conv_count, width in config.blocks:
        for _ in range(conv_count):
            shape = (width, channels, kernel, kernel)
            layers.append(ConvParams(he_uniform(rng, shape), np.zeros(width), stride=1, padding=padding))
            channels = width

    out_channels = 2 * config.scanpath_len
    readout_shape = (out_channels, channels, readout_h, readout_w)
    layers.append(ConvParams(he_uniform(rng, readout_shape), np.zeros(out_channels)))

    logger.debug(
        "Built regressor: %d conv layers, readout kernel %dx%d, %d parameters",
        len(layers) - 1,
        readout_h,
        readout_w,
        sum(p.size for p in (param for layer in layers for param in (layer.weights, layer.bias))),
    )
    return Regressor(config=config, layers=layers)


def forward(model: Regressor, images: np.ndarray) -> Tuple[np.ndarray, list]:
    """Returns outputs of shape (batch, 2 * scanpath_len) and the backward cache."""
    cache = []
    h = images
    layer_index = 0
    for conv_count, _ in model.config.blocks:
        for _ in range(conv_count):
            pre = conv2d_forward(h, model.layers[layer_index]).data
            cache.append(("conv", layer_index, h, pre))
            h = relu(pre).data
            layer_index += 1
        pooled, indices = maxpool2x2(h)
        cache.append(("pool", indices))
        h = pooled.data
    cache.append(("readout", layer_index, h))
    out = conv2d_forward(h, model.readout).data
    return out.reshape(out.shape[0], -1), cache


def _checked(grad_w: np.ndarray, grad_b: np.ndarray, index: int) -> Tuple[np.ndarray, np.ndarray]:
    check_finite(grad_w, f"weight gradient of layer {index}")
    check_finite(grad_b, f"bias gradient of layer {index}")
    return grad_w, grad_b


def backward(model: Regressor, cache: list, grad_out: np.ndarray) -> Gradients:
    grads: Gradients = [None] * len(model.layers)
    _, readout_index, readout_in = cache[-1]
    upstream = grad_out.reshape(grad_out.shape[0], -1, 1, 1)
    upstream, grad_w, grad_b = conv2d_backward(readout_in, model.readout, upstream)
    grads[readout_index] = _checked(grad_w, grad_b, readout_index)

    for entry in reversed(cache[:-1]):
        if entry[0] == "pool":
            upstream = maxpool_backward(entry[1], upstream)
            continue
        _, index, layer_in, pre = entry
        upstream = relu_backward(pre, upstream)
        upstream, grad_w, grad_b = conv2d_backward(layer_in, model.layers[index], upstream)
        grads[index] = _checked(grad_w, grad_b, index)
    return grads


def flatten_gradients(grads: Gradients) -> List[np.ndarray]:
    flat = []
    for grad_w, grad_b in grads:
        flat.extend((grad_w, grad_b))
    return flat


def batch_loss_and_grads(
    model: Regressor,
    images: np.ndarray,
    targets: np.ndarray,
) -> Tuple[float, Gradients]:
    """Mean squared error over all batch * 2 * scanpath_len residuals."""
    expected = (images.shape[0], model.config.scanpath_len, 2)
    if targets.shape != expected:
        raise InputError(f"target shape {targets.shape} != {expected}; resample targets first")
    outputs, cache = forward(model, images)
    check_finite(outputs, "model output")
    residual = outputs - targets.reshape(targets.shape[0], -1)
    loss = float(np.mean(residual ** 2))
    grad_out = 2.0 * residual / residual.size
    grads = backward(model, cache, grad_out)
    return loss, grads

