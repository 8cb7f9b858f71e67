"""Differentiable operations on :class:`~vcforge.numerics.tensor.Tensor`.

Broadcasting is limited to exact shape match or a scalar operand (a Python
number or a single-element tensor). Every function returns a new tensor and
records a backward closure when any input requires a gradient.
"""

from __future__ import annotations

from typing import Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tensor import Tensor

Operand = Union[Tensor, float, int]

ELEMENTWISE_KINDS = ("add", "sub", "mul", "sigmoid", "tanh", "square")


def _as_tensor(x: Operand, like: Tensor) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=like.dtype), dtype=like.dtype)


def _check_binary(a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape and a.size != 1 and b.size != 1:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def _reduce_to(grad: np.ndarray, shape: tuple) -> np.ndarray:
    if grad.shape == shape:
        return grad
    return np.asarray(grad.sum(), dtype=grad.dtype).reshape(shape)


def add(a: Operand, b: Operand) -> Tensor:
    if not isinstance(a, Tensor):
        a, b = b, a
    b = _as_tensor(b, a)
    _check_binary(a, b)
    return Tensor._from_op(
        a.data + b.data,
        (a, b),
        lambda g: (_reduce_to(g, a.shape), _reduce_to(g, b.shape)),
    )


def sub(a: Operand, b: Operand) -> Tensor:
    if not isinstance(a, Tensor):
        a = _as_tensor(a, b)
    b = _as_tensor(b, a)
    _check_binary(a, b)
    return Tensor._from_op(
        a.data - b.data,
        (a, b),
        lambda g: (_reduce_to(g, a.shape), _reduce_to(-g, b.shape)),
    )


def mul(a: Operand, b: Operand) -> Tensor:
    if not isinstance(a, Tensor):
        a, b = b, a
    b = _as_tensor(b, a)
    _check_binary(a, b)
    return Tensor._from_op(
        a.data * b.data,
        (a, b),
        lambda g: (_reduce_to(g * b.data, a.shape), _reduce_to(g * a.data, b.shape)),
    )


def neg(a: Tensor) -> Tensor:
    return Tensor._from_op(-a.data, (a,), lambda g: (-g,))


def sigmoid(a: Tensor) -> Tensor:
    # split by sign so exp never overflows
    x = a.data
    z = np.exp(-np.abs(x))
    s = np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z)).astype(x.dtype)
    return Tensor._from_op(s, (a,), lambda g: (g * s * (1 - s),))


def tanh(a: Tensor) -> Tensor:
    t = np.tanh(a.data)
    return Tensor._from_op(t, (a,), lambda g: (g * (1 - t * t),))


def square(a: Tensor) -> Tensor:
    return Tensor._from_op(a.data * a.data, (a,), lambda g: (2 * g * a.data,))


def abs(a: Tensor) -> Tensor:  # noqa: A001 - mirrors numpy naming
    return Tensor._from_op(np.abs(a.data), (a,), lambda g: (g * np.sign(a.data),))


def elementwise(op_kind: str, a: Tensor, b: Operand = None) -> Tensor:
    """Dispatch by name to one of :data:`ELEMENTWISE_KINDS`."""
    if op_kind == "add":
        return add(a, b)
    if op_kind == "sub":
        return sub(a, b)
    if op_kind == "mul":
        return mul(a, b)
    if op_kind == "sigmoid":
        return sigmoid(a)
    if op_kind == "tanh":
        return tanh(a)
    if op_kind == "square":
        return square(a)
    raise ValueError(f"unknown elementwise op {op_kind!r}; expected one of {ELEMENTWISE_KINDS}")


def sum(a: Tensor) -> Tensor:  # noqa: A001
    shape = a.shape
    return Tensor._from_op(
        np.asarray(a.data.sum(), dtype=a.dtype),
        (a,),
        lambda g: (np.full(shape, g, dtype=a.dtype),),
    )


def mean(a: Tensor) -> Tensor:
    shape, n = a.shape, a.size
    return Tensor._from_op(
        np.asarray(a.data.mean(), dtype=a.dtype),
        (a,),
        lambda g: (np.full(shape, g / n, dtype=a.dtype),),
    )


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul needs rank-2 operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    return Tensor._from_op(a.data @ b.data, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def conv1d(x: Tensor, weight: Tensor, bias: Tensor | None = None, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlate ``x`` [C_in, T] with ``weight`` [C_out, C_in, K].

    Output length is ``(T + 2*padding - K) // stride + 1``.
    """
    if x.ndim != 2 or weight.ndim != 3:
        raise ValueError(f"conv1d expects input [C, T] and kernels [C_out, C_in, K], got {x.shape}, {weight.shape}")
    c_in, length = x.shape
    c_out, w_in, k = weight.shape
    if w_in != c_in:
        raise ValueError(f"conv1d channel mismatch: input has {c_in}, kernels expect {w_in}")
    if stride < 1 or padding < 0:
        raise ValueError("stride must be positive and padding nonnegative")
    padded_len = length + 2 * padding
    if k > padded_len:
        raise ValueError(f"kernel length {k} exceeds padded input length {padded_len}")
    xp = np.pad(x.data, ((0, 0), (padding, padding))) if padding else x.data
    t_out = (padded_len - k) // stride + 1
    # cols: [C_in, T_out, K] -> [C_in*K, T_out]
    windows = sliding_window_view(xp, k, axis=1)[:, : (t_out - 1) * stride + 1 : stride, :]
    cols = np.ascontiguousarray(windows.transpose(0, 2, 1)).reshape(c_in * k, t_out)
    w2 = weight.data.reshape(c_out, c_in * k)
    out = w2 @ cols
    if bias is not None:
        out = out + bias.data[:, None]

    def backward(g):
        gw = (g @ cols.T).reshape(weight.shape) if weight.requires_grad else None
        gx = None
        if x.requires_grad:
            gcols = (w2.T @ g).reshape(c_in, k, t_out)
            gxp = np.zeros_like(xp)
            span = (t_out - 1) * stride + 1
            for j in range(k):
                gxp[:, j : j + span : stride] += gcols[:, j, :]
            gx = gxp[:, padding : padding + length] if padding else gxp
        gb = g.sum(axis=1) if bias is not None and bias.requires_grad else None
        return (gx, gw, gb)

    parents = (x, weight) if bias is None else (x, weight, bias)
    return Tensor._from_op(out, parents, backward)


def glu(x: Tensor) -> Tensor:
    """Gated linear unit: first half of the channels times sigmoid of the second half."""
    if x.ndim < 1 or x.shape[0] % 2:
        raise ValueError(f"glu needs an even leading (channel) dimension, got shape {x.shape}")
    c = x.shape[0] // 2
    a, b = x.data[:c], x.data[c:]
    z = np.exp(-np.abs(b))
    s = np.where(b >= 0, 1.0 / (1.0 + z), z / (1.0 + z)).astype(x.dtype)

    def backward(g):
        return (np.concatenate([g * s, g * a * s * (1 - s)], axis=0),)

    return Tensor._from_op(a * s, (x,), backward)


def instance_norm(x: Tensor, gain: Tensor, bias: Tensor, epsilon: float = 1e-5) -> Tensor:
    """Normalize each channel of ``x`` [C, T] over time, then scale and shift."""
    if x.ndim != 2:
        raise ValueError(f"instance_norm expects [C, T], got {x.shape}")
    c, t = x.shape
    if gain.shape != (c,) or bias.shape != (c,):
        raise ValueError(f"gain/bias must have shape ({c},), got {gain.shape} and {bias.shape}")
    mu = x.data.mean(axis=1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + epsilon)
    xhat = centered * inv_std
    out = gain.data[:, None] * xhat + bias.data[:, None]

    def backward(g):
        gxhat = g * gain.data[:, None]
        gx = inv_std * (
            gxhat - gxhat.mean(axis=1, keepdims=True) - xhat * (gxhat * xhat).mean(axis=1, keepdims=True)
        )
        return (gx, (g * xhat).sum(axis=1), g.sum(axis=1))

    return Tensor._from_op(out.astype(x.dtype, copy=False), (x, gain, bias), backward)


def upsample_nearest(x: Tensor, factor: int = 2) -> Tensor:
    """Repeat every time step ``factor`` times along the last axis."""
    c, t = x.shape
    out = np.repeat(x.data, factor, axis=1)
    return Tensor._from_op(out, (x,), lambda g: (g.reshape(c, t, factor).sum(axis=2),))


def pad_time(x: Tensor, left: int, right: int, mode: str = "edge") -> Tensor:
    """Pad the time axis of [C, T] by edge replication or reflection."""
    if mode not in ("edge", "reflect"):
        raise ValueError(f"pad mode must be 'edge' or 'reflect', got {mode!r}")
    if left < 0 or right < 0:
        raise ValueError("padding amounts must be nonnegative")
    if mode == "reflect" and max(left, right) >= x.shape[1]:
        raise ValueError(f"reflect padding of {max(left, right)} needs more than {x.shape[1]} frames")
    if left == 0 and right == 0:
        return x
    out = np.pad(x.data, ((0, 0), (left, right)), mode=mode)
    t = x.shape[1]

    def backward(g):
        gx = g[:, left : left + t].copy()
        if mode == "edge":
            gx[:, 0] += g[:, :left].sum(axis=1)
            gx[:, -1] += g[:, left + t :].sum(axis=1)
        else:
            for i in range(left):
                gx[:, left - i] += g[:, i]
            for i in range(right):
                gx[:, t - 2 - i] += g[:, left + t + i]
        return (gx,)

    return Tensor._from_op(out, (x,), backward)


def crop_time(x: Tensor, start: int, stop: int) -> Tensor:
    shape = x.shape

    def backward(g):
        gx = np.zeros(shape, dtype=g.dtype)
        gx[:, start:stop] = g
        return (gx,)

    return Tensor._from_op(x.data[:, start:stop], (x,), backward)
