__doc__ = """
Differentiable operators used by the power-regression network.

Convolution is a cross-correlation (no kernel flip). ReLU and abs use 0 as the
subgradient at exactly 0.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from lumipower.errors import ShapeError

from .kernels import col2im, max_pool_backward
from .tensor import Function, Tensor, _as_tensor

BATCHNORM_EPS = 1e-5
BATCHNORM_MOMENTUM = 0.1


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == tuple(shape):
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, size in enumerate(shape) if size == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# elementwise -----------------------------------------------------------------
class Add(Function):
    def forward(self, a, b):
        self.shapes = (a.shape, b.shape)
        return a + b

    def backward(self, grad):
        return (
            _unbroadcast(grad, self.shapes[0]) if self.needs_input_grad[0] else None,
            _unbroadcast(grad, self.shapes[1]) if self.needs_input_grad[1] else None,
        )


class Mul(Function):
    def forward(self, a, b):
        self.a, self.b = a, b
        return a * b

    def backward(self, grad):
        return (
            _unbroadcast(grad * self.b, self.a.shape) if self.needs_input_grad[0] else None,
            _unbroadcast(grad * self.a, self.b.shape) if self.needs_input_grad[1] else None,
        )


class Scale(Function):
    def forward(self, a, factor: float):
        self.factor = factor
        return a * a.dtype.type(factor)

    def backward(self, grad):
        return (grad * grad.dtype.type(self.factor),)


class ReLU(Function):
    def forward(self, a):
        self.mask = a > 0
        return np.where(self.mask, a, a.dtype.type(0))

    def backward(self, grad):
        return (grad * self.mask,)


class Abs(Function):
    def forward(self, a):
        self.sign = np.sign(a)
        return np.abs(a)

    def backward(self, grad):
        return (grad * self.sign,)


# reductions and shape ----------------------------------------------------
class Sum(Function):
    def forward(self, a, axis=None, keepdims=False):
        self.in_shape = a.shape
        self.axis = axis
        self.keepdims = keepdims
        return np.asarray(a.sum(axis=axis, keepdims=keepdims), dtype=a.dtype)

    def backward(self, grad):
        if self.axis is not None and not self.keepdims:
            axes = (self.axis,) if np.isscalar(self.axis) else tuple(self.axis)
            axes = tuple(ax % len(self.in_shape) for ax in axes)
            grad = np.expand_dims(grad, axes)
        return (np.broadcast_to(grad, self.in_shape).copy(),)


class Reshape(Function):
    def forward(self, a, shape):
        self.in_shape = a.shape
        try:
            return a.reshape(shape)
        except ValueError as err:
            raise ShapeError(f"Cannot reshape {a.shape} into {shape}") from err

    def backward(self, grad):
        return (grad.reshape(self.in_shape),)


class Pad2d(Function):
    """Zero padding of the two trailing (spatial) axes."""

    def forward(self, a, padding: int):
        if padding < 0:
            raise ShapeError(f"Padding must be non-negative, got {padding}")
        self.padding = padding
        width = [(0, 0)] * (a.ndim - 2) + [(padding, padding)] * 2
        return np.pad(a, width)

    def backward(self, grad):
        p = self.padding
        if p == 0:
            return (grad,)
        return (np.ascontiguousarray(grad[..., p:-p, p:-p]),)


# convolution and pooling ---------------------------------------------------
class Conv2d(Function):
    def forward(self, x, w, stride: int = 1, padding: int = 0):
        if x.ndim != 4 or w.ndim != 4:
            raise ShapeError(f"conv2d expects 4-D input and kernel, got {x.shape}, {w.shape}")
        n, c_in, h, wd = x.shape
        c_out, c_k, kh, kw = w.shape
        if c_in != c_k:
            raise ShapeError(f"conv2d channel mismatch: input has {c_in}, kernel expects {c_k}")
        if stride < 1:
            raise ShapeError(f"conv2d stride must be >= 1, got {stride}")
        h_out = (h + 2 * padding - kh) // stride + 1
        w_out = (wd + 2 * padding - kw) // stride + 1
        if kh > h + 2 * padding or kw > wd + 2 * padding or h_out <= 0 or w_out <= 0:
            raise ShapeError(
                f"conv2d produces an empty output for input {x.shape}, kernel {w.shape}, "
                f"stride {stride}, padding {padding}"
            )
        xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x
        windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
        windows = windows[:, :, :h_out, :w_out]
        out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3]))  # (N, Ho, Wo, Cout)

        self.windows = windows
        self.w = w
        self.padded_shape = xp.shape
        self.in_shape = x.shape
        self.stride, self.padding = stride, padding
        return np.ascontiguousarray(out.transpose(0, 3, 1, 2))

    def backward(self, grad):
        dx = dw = None
        if self.needs_input_grad[1]:
            dw = np.tensordot(grad, self.windows, axes=([0, 2, 3], [0, 2, 3]))
        if self.needs_input_grad[0]:
            _, _, kh, kw = self.w.shape
            columns = np.ascontiguousarray(np.tensordot(grad, self.w, axes=([1], [0])))
            dxp = col2im(columns, tuple(self.padded_shape), kh, kw, self.stride)
            p = self.padding
            dx = dxp if p == 0 else np.ascontiguousarray(dxp[:, :, p:-p, p:-p])
        return dx, dw


class MaxPool2d(Function):
    def forward(self, x, kernel: int = 2, stride: int = 2):
        n, c, h, w = x.shape
        if h < kernel or w < kernel:
            raise ShapeError(f"max_pool2d window {kernel} exceeds input {x.shape}")
        windows = sliding_window_view(x, (kernel, kernel), axis=(2, 3))[:, :, ::stride, ::stride]
        flat = windows.reshape(*windows.shape[:4], kernel * kernel)
        self.argmax = np.ascontiguousarray(flat.argmax(axis=-1))
        self.in_shape = x.shape
        self.kernel, self.stride = kernel, stride
        return np.ascontiguousarray(np.take_along_axis(flat, self.argmax[..., None], axis=-1)[..., 0])

    def backward(self, grad):
        dx = max_pool_backward(
            np.ascontiguousarray(grad), self.argmax, tuple(self.in_shape), self.kernel, self.stride
        )
        return (dx,)


class GlobalAvgPool(Function):
    def forward(self, x):
        if x.ndim != 4:
            raise ShapeError(f"global_avg_pool expects (N, C, H, W), got {x.shape}")
        self.in_shape = x.shape
        self.area = x.shape[2] * x.shape[3]
        return x.sum(axis=(2, 3)) / x.dtype.type(self.area)

    def backward(self, grad):
        g = grad / grad.dtype.type(self.area)
        return (np.broadcast_to(g[:, :, None, None], self.in_shape).copy(),)


# normalization -------------------------------------------------------------
class BatchNormState:
    """Running statistics of a batch-normalization layer (mutated in train mode)."""

    def __init__(self, channels: int, dtype=np.float32):
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)
        self.momentum = BATCHNORM_MOMENTUM
        self.eps = BATCHNORM_EPS


class BatchNorm2d(Function):
    def forward(self, x, gamma, beta, state: BatchNormState, training: bool):
        if x.ndim != 4 or gamma.shape != (x.shape[1],) or beta.shape != (x.shape[1],):
            raise ShapeError(
                f"batchnorm2d shape mismatch: input {x.shape}, gamma {gamma.shape}, beta {beta.shape}"
            )
        n, c, h, w = x.shape
        count = n * h * w
        self.training = training
        if training:
            if count < 2:
                raise ShapeError(f"batchnorm2d needs N*H*W >= 2 in train mode, got {count}")
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            momentum = state.momentum
            state.running_mean[...] = (1 - momentum) * state.running_mean + momentum * mean
            state.running_var[...] = (1 - momentum) * state.running_var + momentum * var * (
                count / (count - 1)
            )
        else:
            mean, var = state.running_mean.astype(x.dtype), state.running_var.astype(x.dtype)
        inv_std = 1.0 / np.sqrt(var + x.dtype.type(state.eps))
        x_hat = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
        self.x_hat = x_hat
        self.inv_std = inv_std.astype(x.dtype)
        self.gamma = gamma
        self.count = count
        return gamma[None, :, None, None] * x_hat + beta[None, :, None, None]

    def backward(self, grad):
        dgamma = (grad * self.x_hat).sum(axis=(0, 2, 3)) if self.needs_input_grad[1] else None
        dbeta = grad.sum(axis=(0, 2, 3)) if self.needs_input_grad[2] else None
        dx = None
        if self.needs_input_grad[0]:
            dx_hat = grad * self.gamma[None, :, None, None]
            inv_std = self.inv_std[None, :, None, None]
            if self.training:
                m = self.count
                sum_dx_hat = dx_hat.sum(axis=(0, 2, 3), keepdims=True)
                sum_dx_hat_xhat = (dx_hat * self.x_hat).sum(axis=(0, 2, 3), keepdims=True)
                dx = inv_std / m * (m * dx_hat - sum_dx_hat - self.x_hat * sum_dx_hat_xhat)
            else:
                dx = dx_hat * inv_std
        return dx, dgamma, dbeta


# dense ---------------------------------------------------------------------
class Linear(Function):
    def forward(self, x, weight, bias=None):
        if x.ndim != 2 or weight.ndim != 2 or x.shape[1] != weight.shape[1]:
            raise ShapeError(f"linear dimension mismatch: input {x.shape}, weight {weight.shape}")
        if bias is not None and bias.shape != (weight.shape[0],):
            raise ShapeError(f"linear bias shape {bias.shape} != ({weight.shape[0]},)")
        self.x, self.weight = x, weight
        out = x @ weight.T
        if bias is not None:
            out = out + bias[None, :]
        return out

    def backward(self, grad):
        dx = grad @ self.weight if self.needs_input_grad[0] else None
        dw = grad.T @ self.x if self.needs_input_grad[1] else None
        if len(self.parents) > 2:
            db = grad.sum(axis=0) if self.needs_input_grad[2] else None
            return dx, dw, db
        return dx, dw


# public API ----------------------------------------------------------------
def add(a, b) -> Tensor:
    a = _as_tensor(a)
    return Add.apply(a, _as_tensor(b, a.dtype))


def mul(a, b) -> Tensor:
    a = _as_tensor(a)
    return Mul.apply(a, _as_tensor(b, a.dtype))


def scale(a, factor: float) -> Tensor:
    return Scale.apply(a, factor=factor)


def relu(a) -> Tensor:
    return ReLU.apply(a)


def abs(a) -> Tensor:
    return Abs.apply(a)


def sum(a, axis=None, keepdims=False) -> Tensor:
    return Sum.apply(a, axis=axis, keepdims=keepdims)


def reshape(a, shape) -> Tensor:
    return Reshape.apply(a, shape=tuple(shape))


def pad2d(a, padding: int) -> Tensor:
    return Pad2d.apply(a, padding=padding)


def conv2d(x, kernel, stride: int = 1, padding: int = 0, bias=None) -> Tensor:
    out = Conv2d.apply(x, kernel, stride=stride, padding=padding)
    if bias is not None:
        out = add(out, reshape(bias, (1, -1, 1, 1)))
    return out


def max_pool2d(x, kernel: int = 2, stride: int = 2) -> Tensor:
    return MaxPool2d.apply(x, kernel=kernel, stride=stride)


def global_avg_pool(x) -> Tensor:
    return GlobalAvgPool.apply(x)


def batchnorm2d(x, gamma, beta, state: BatchNormState, training: bool) -> Tensor:
    return BatchNorm2d.apply(x, gamma, beta, state=state, training=training)


def linear(x, weight, bias=None) -> Tensor:
    if bias is None:
        return Linear.apply(x, weight)
    return Linear.apply(x, weight, bias)
