"""Minimal tensor / reverse-mode autodiff core and the Adam optimizer."""

from . import functional
from .functional import (
    abs,
    add,
    conv1d,
    crop_time,
    elementwise,
    glu,
    instance_norm,
    matmul,
    mean,
    mul,
    neg,
    pad_time,
    sigmoid,
    square,
    sub,
    sum,
    tanh,
    upsample_nearest,
)
from .optim import Adam, AdamState, adam_step
from .random import make_rng, uniform_fan_in
from .tensor import Tensor, backward

__all__ = [
    "Adam",
    "AdamState",
    "Tensor",
    "abs",
    "adam_step",
    "add",
    "backward",
    "conv1d",
    "crop_time",
    "elementwise",
    "functional",
    "glu",
    "instance_norm",
    "make_rng",
    "matmul",
    "mean",
    "mul",
    "neg",
    "pad_time",
    "sigmoid",
    "square",
    "sub",
    "sum",
    "tanh",
    "uniform_fan_in",
    "upsample_nearest",
]
