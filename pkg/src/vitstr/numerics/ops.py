"""Differentiable operations on :class:`Tensor`.

Broadcasting is deliberately narrow: ``matmul`` accepts a missing leading batch
dimension on either side and ``add`` accepts a right operand whose shape equals
the trailing dimensions of the left operand. Everything else must match exactly.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf

from .tensor import DimensionError, NumericError, Tensor, as_tensor, make_result

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _sum_to(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce leading broadcast axes of ``g`` so it has ``shape``."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    return g


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError(f"matmul needs matrices, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    if a.ndim > 2 and b.ndim > 2 and a.shape[:-2] != b.shape[:-2]:
        raise DimensionError(f"matmul batch dimensions differ: {a.shape} @ {b.shape}")
    out = np.matmul(a.data, b.data)

    def backward(g):
        ga = gb = None
        if a.requires_grad:
            ga = _sum_to(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape)
        if b.requires_grad:
            gb = _sum_to(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape)
        return ga, gb

    return make_result(out, (a, b), backward, "matmul")


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if b.ndim > a.ndim or a.shape[a.ndim - b.ndim:] != b.shape:
        raise DimensionError(f"add shapes incompatible: {a.shape} + {b.shape}")

    def backward(g):
        return g, _sum_to(g, b.shape)

    return make_result(a.data + b.data, (a, b), backward, "add")


def mul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise DimensionError(f"mul shapes differ: {a.shape} * {b.shape}")

    def backward(g):
        return g * b.data, g * a.data

    return make_result(a.data * b.data, (a, b), backward, "mul")


def scale(a: Tensor, c: float) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        return (g * c,)

    return make_result(a.data * a.data.dtype.type(c), (a,), backward, "scale")


def reshape(a: Tensor, shape) -> Tensor:
    a = as_tensor(a)
    try:
        out = a.data.reshape(shape)
    except ValueError as exc:
        raise DimensionError(f"cannot reshape {a.shape} to {tuple(shape)}") from exc

    def backward(g):
        return (g.reshape(a.shape),)

    return make_result(out, (a,), backward, "reshape")


def transpose(a: Tensor, axes=None) -> Tensor:
    """Permute axes (reverse them when ``axes`` is None)."""
    a = as_tensor(a)
    axes = tuple(reversed(range(a.ndim))) if axes is None else tuple(axes)
    inverse = tuple(np.argsort(axes))
    out = np.ascontiguousarray(np.transpose(a.data, axes))

    def backward(g):
        return (np.transpose(g, inverse),)

    return make_result(out, (a,), backward, "transpose")


def index(a: Tensor, key) -> Tensor:
    """Basic (slice/integer) indexing."""
    a = as_tensor(a)
    out = np.ascontiguousarray(a.data[key])

    def backward(g):
        full = np.zeros_like(a.data)
        full[key] = g
        return (full,)

    return make_result(out, (a,), backward, "index")


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        shapes = [t.shape for t in tensors]
        raise DimensionError(f"concat shapes incompatible along axis {axis}: {shapes}") from exc
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return make_result(out, tensors, backward, "concat")


def repeat_leading(a: Tensor, n: int) -> Tensor:
    """Stack ``n`` copies of ``a`` along a new leading axis."""
    a = as_tensor(a)
    out = np.ascontiguousarray(np.broadcast_to(a.data, (n,) + a.shape))

    def backward(g):
        return (g.sum(axis=0),)

    return make_result(out, (a,), backward, "repeat_leading")


def sum(a: Tensor) -> Tensor:  # noqa: A001 - mirrors numpy naming
    a = as_tensor(a)

    def backward(g):
        return (np.broadcast_to(g, a.shape).astype(a.data.dtype),)

    return make_result(np.asarray(a.data.sum(), dtype=a.data.dtype), (a,), backward, "sum")


def mean(a: Tensor) -> Tensor:
    a = as_tensor(a)
    n = a.size

    def backward(g):
        return (np.full(a.shape, g / n, dtype=a.data.dtype),)

    return make_result(np.asarray(a.data.mean(), dtype=a.data.dtype), (a,), backward, "mean")


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    if not np.isfinite(x.data).all():
        raise NumericError("softmax: non-finite input")
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return make_result(y, (x,), backward, "softmax")


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    if not np.isfinite(x.data).all():
        raise NumericError("log_softmax: non-finite input")
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def backward(g):
        return (g - np.exp(out) * g.sum(axis=axis, keepdims=True),)

    return make_result(out, (x,), backward, "log_softmax")


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-6) -> Tensor:
    """Normalize over the last axis, then apply ``gamma * x_hat + beta``."""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    d = x.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise DimensionError(
            f"layer_norm affine shapes {gamma.shape}, {beta.shape} do not match last axis of {x.shape}"
        )
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = centered * inv_std
    out = x_hat * gamma.data + beta.data

    def backward(g):
        gx = None
        if x.requires_grad:
            dx_hat = g * gamma.data
            gx = inv_std * (
                dx_hat
                - dx_hat.mean(axis=-1, keepdims=True)
                - x_hat * (dx_hat * x_hat).mean(axis=-1, keepdims=True)
            )
        ggamma = _sum_to(g * x_hat, gamma.shape) if gamma.requires_grad else None
        gbeta = _sum_to(g, beta.shape) if beta.requires_grad else None
        return gx, ggamma, gbeta

    return make_result(out, (x, gamma, beta), backward, "layer_norm")


def gelu(x: Tensor) -> Tensor:
    """Exact GELU, ``0.5 * x * (1 + erf(x / sqrt(2)))``."""
    x = as_tensor(x)
    cdf = 0.5 * (1.0 + erf(x.data * _INV_SQRT2))
    out = x.data * cdf

    def backward(g):
        pdf = _INV_SQRT2PI * np.exp(-0.5 * x.data * x.data)
        return (g * (cdf + x.data * pdf),)

    return make_result(out.astype(x.data.dtype, copy=False), (x,), backward, "gelu")


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """``x @ weight + bias`` with ``weight`` laid out as [in, out]."""
    y = matmul(x, weight)
    return add(y, bias) if bias is not None else y
