"""
Dense float64 kernels with hand-written backward passes: 2-D convolution
(cross-correlation), 2x2 max pooling, ReLU and the Adam update.

There is no autodiff graph; the regressor chains these calls itself.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import as_strided

from . import config
from .errors import InputError, NonFiniteError, ShapeMismatchError

logger = logging.getLogger(__name__)

ArrayLike = Union["Tensor4", np.ndarray]


@dataclass
class Tensor4:
    """Activations of shape (batch, channels, height, width)."""

    data: np.ndarray
    grad: Optional[np.ndarray] = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 4:
            raise ShapeMismatchError(f"expected a 4-D tensor, got shape {self.data.shape}")
        if self.grad is not None and self.grad.shape != self.data.shape:
            raise ShapeMismatchError("gradient buffer shape differs from data shape")

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return self.data.shape


@dataclass
class ConvParams:
    weights: np.ndarray  # (out_ch, in_ch, kh, kw)
    bias: np.ndarray     # (out_ch,)
    stride: int = 1
    padding: int = 0
    grad_w: Optional[np.ndarray] = None
    grad_b: Optional[np.ndarray] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 4 or min(self.weights.shape) < 1:
            raise ShapeMismatchError(f"conv weights must be (out, in, kh, kw), got {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise ShapeMismatchError(
                f"bias shape {self.bias.shape} does not match {self.weights.shape[0]} output channels"
            )
        if self.stride < 1 or self.padding < 0:
            raise InputError(f"invalid stride {self.stride} / padding {self.padding}")

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def kernel(self) -> Tuple[int, int]:
        return self.weights.shape[2], self.weights.shape[3]


@dataclass
class AdamState:
    m: List[np.ndarray]
    v: List[np.ndarray]
    step: int = 0
    lr: float = config.DEFAULT_LEARNING_RATE
    beta1: float = config.ADAM_BETA1
    beta2: float = config.ADAM_BETA2
    eps: float = config.ADAM_EPS

    @classmethod
    def for_parameters(
        cls, params: Sequence[np.ndarray], lr: float = config.DEFAULT_LEARNING_RATE, **kwargs
    ) -> "AdamState":
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            lr=lr,
            **kwargs,
        )


def _data(x: ArrayLike) -> np.ndarray:
    return x.data if isinstance(x, Tensor4) else np.asarray(x, dtype=np.float64)


def check_finite(array: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(array)):
        raise NonFiniteError(f"non-finite values in {what}")


def conv_output_size(h: int, w: int, p: ConvParams) -> Tuple[int, int]:
    kh, kw = p.kernel
    out_h = (h + 2 * p.padding - kh) // p.stride + 1
    out_w = (w + 2 * p.padding - kw) // p.stride + 1
    return out_h, out_w


def _pad(x: np.ndarray, padding: int) -> np.ndarray:
    if padding == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)), mode="constant")


def _windows(x: np.ndarray, kh: int, kw: int, stride: int, out_h: int, out_w: int) -> np.ndarray:
    """Read-only view of shape (batch, channels, out_h, out_w, kh, kw)."""
    batch, channels = x.shape[:2]
    sb, sc, sh, sw = x.strides
    return as_strided(
        x,
        (batch, channels, out_h, out_w, kh, kw),
        (sb, sc, stride * sh, stride * sw, sh, sw),
        writeable=False,
    )


def _check_conv_input(x: np.ndarray, p: ConvParams) -> Tuple[int, int]:
    if x.ndim != 4:
        raise ShapeMismatchError(f"expected a 4-D input, got shape {x.shape}")
    if x.shape[1] != p.in_channels:
        raise ShapeMismatchError(f"input has {x.shape[1]} channels, kernel expects {p.in_channels}")
    out_h, out_w = conv_output_size(x.shape[2], x.shape[3], p)
    if out_h < 1 or out_w < 1:
        raise ShapeMismatchError(f"conv output would be {out_h}x{out_w}")
    return out_h, out_w


def conv2d_forward(x: ArrayLike, p: ConvParams) -> Tensor4:
    data = _data(x)
    out_h, out_w = _check_conv_input(data, p)
    kh, kw = p.kernel
    windows = _windows(_pad(data, p.padding), kh, kw, p.stride, out_h, out_w)
    out = np.einsum("bchwkl,ockl->bohw", windows, p.weights) + p.bias[None, :, None, None]
    return Tensor4(out)


def conv2d_backward(
    x: ArrayLike,
    p: ConvParams,
    upstream: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (grad_x, grad_w, grad_b)."""
    data = _data(x)
    out_h, out_w = _check_conv_input(data, p)
    upstream = np.asarray(upstream, dtype=np.float64)
    expected = (data.shape[0], p.out_channels, out_h, out_w)
    if upstream.shape != expected:
        raise ShapeMismatchError(f"upstream gradient shape {upstream.shape} != {expected}")

    kh, kw = p.kernel
    padded = _pad(data, p.padding)
    windows = _windows(padded, kh, kw, p.stride, out_h, out_w)

    grad_b = upstream.sum(axis=(0, 2, 3))
    grad_w = np.einsum("bchwkl,bohw->ockl", windows, upstream)

    grad_padded = np.zeros_like(padded)
    row_stop = p.stride * (out_h - 1) + 1
    col_stop = p.stride * (out_w - 1) + 1
    for k in range(kh):
        for l in range(kw):
            contribution = np.einsum("bohw,oc->bchw", upstream, p.weights[:, :, k, l])
            grad_padded[:, :, k:k + row_stop:p.stride, l:l + col_stop:p.stride] += contribution
    if p.padding:
        grad_x = grad_padded[:, :, p.padding:-p.padding, p.padding:-p.padding]
    else:
        grad_x = grad_padded
    return np.ascontiguousarray(grad_x), grad_w, grad_b


def maxpool2x2(x: ArrayLike) -> Tuple[Tensor4, np.ndarray]:
    """Window max over 2x2 blocks; indices are 0..3 in raster order, first max wins."""
    data = _data(x)
    batch, channels, h, w = data.shape
    if h % 2 or w % 2:
        raise ShapeMismatchError(f"max pooling needs even spatial dims, got {h}x{w}")
    blocks = (
        data.reshape(batch, channels, h // 2, 2, w // 2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(batch, channels, h // 2, w // 2, 4)
    )
    indices = blocks.argmax(axis=-1)
    pooled = np.take_along_axis(blocks, indices[..., None], axis=-1)[..., 0]
    return Tensor4(pooled), indices


def maxpool_backward(indices: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != indices.shape:
        raise ShapeMismatchError(f"upstream gradient shape {upstream.shape} != pooled shape {indices.shape}")
    batch, channels, h2, w2 = indices.shape
    routed = (np.arange(4) == indices[..., None]) * upstream[..., None]
    return (
        routed.reshape(batch, channels, h2, w2, 2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(batch, channels, 2 * h2, 2 * w2)
    )


def relu(x: ArrayLike) -> Tensor4:
    return Tensor4(np.maximum(_data(x), 0.0))


def relu_backward(x: ArrayLike, upstream: np.ndarray) -> np.ndarray:
    # subgradient 0 at the kink
    return np.asarray(upstream, dtype=np.float64) * (_data(x) > 0.0)


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
) -> Tuple[Sequence[np.ndarray], AdamState]:
    """Bias-corrected Adam update, applied to ``params`` in place."""
    if not len(params) == len(grads) == len(state.m) == len(state.v):
        raise ShapeMismatchError("params, grads and optimizer state differ in length")
    for index, (param, grad) in enumerate(zip(params, grads)):
        if param.shape != grad.shape or param.shape != state.m[index].shape:
            raise ShapeMismatchError(f"parameter {index}: shape {param.shape} vs grad {np.shape(grad)}")
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError(f"non-finite gradient for parameter {index}")

    state.step += 1
    correction1 = 1.0 - state.beta1 ** state.step
    correction2 = 1.0 - state.beta2 ** state.step
    for param, grad, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        param -= state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
    return params, state
