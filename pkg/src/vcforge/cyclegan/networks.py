"""1-D gated CNN generator and patch discriminator.

Parameters live in ordered ``dict[str, Tensor]`` maps; the declaration order
is the order used for checkpoint serialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .. import numerics as nx
from ..numerics import Tensor

N_FEATURES = 24


class Direction(str, Enum):
    X_TO_Y = "X_to_Y"
    Y_TO_X = "Y_to_X"


class Side(str, Enum):
    D_X = "D_X"
    D_Y = "D_Y"


@dataclass(frozen=True)
class Architecture:
    """Channel widths (post-GLU) and depth shared by all four networks."""

    n_features: int = N_FEATURES
    base_channels: int = 64
    down_channels: tuple[int, int] = (64, 128)
    n_residual: int = 3
    disc_channels: tuple[int, int, int] = (64, 128, 256)
    input_skip: bool = False

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "base_channels": self.base_channels,
            "down_channels": list(self.down_channels),
            "n_residual": self.n_residual,
            "disc_channels": list(self.disc_channels),
            "input_skip": self.input_skip,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Architecture":
        return cls(
            n_features=int(d["n_features"]),
            base_channels=int(d["base_channels"]),
            down_channels=tuple(int(c) for c in d["down_channels"]),
            n_residual=int(d["n_residual"]),
            disc_channels=tuple(int(c) for c in d["disc_channels"]),
            input_skip=bool(d.get("input_skip", False)),
        )


def _conv(rng, c_out: int, c_in: int, k: int, name: str, bias: bool) -> dict[str, Tensor]:
    fan_in = c_in * k
    out = {f"{name}.weight": Tensor(nx.uniform_fan_in(rng, (c_out, c_in, k), fan_in), requires_grad=True)}
    if bias:
        out[f"{name}.bias"] = Tensor(nx.uniform_fan_in(rng, (c_out,), fan_in), requires_grad=True)
    return out


def _norm(c: int, name: str) -> dict[str, Tensor]:
    return {
        f"{name}.gain": Tensor(np.ones(c, dtype=np.float32), requires_grad=True),
        f"{name}.bias": Tensor(np.zeros(c, dtype=np.float32), requires_grad=True),
    }


@dataclass
class GeneratorParams:
    direction: Direction
    arch: Architecture
    params: dict[str, Tensor] = field(default_factory=dict)

    @classmethod
    def init(cls, direction, arch: Architecture, rng: np.random.Generator) -> "GeneratorParams":
        d = arch.n_features
        b = arch.base_channels
        c1, c2 = arch.down_channels
        p: dict[str, Tensor] = {}
        p.update(_conv(rng, 2 * b, d, 5, "in", bias=True))
        p.update(_conv(rng, 2 * c1, b, 5, "down1", bias=False))
        p.update(_norm(2 * c1, "down1.norm"))
        p.update(_conv(rng, 2 * c2, c1, 5, "down2", bias=False))
        p.update(_norm(2 * c2, "down2.norm"))
        for r in range(arch.n_residual):
            p.update(_conv(rng, 2 * c2, c2, 3, f"res{r}.a", bias=False))
            p.update(_norm(2 * c2, f"res{r}.a.norm"))
            p.update(_conv(rng, c2, c2, 3, f"res{r}.b", bias=False))
            p.update(_norm(c2, f"res{r}.b.norm"))
        p.update(_conv(rng, 2 * c1, c2, 5, "up1", bias=False))
        p.update(_norm(2 * c1, "up1.norm"))
        p.update(_conv(rng, 2 * b, c1, 5, "up2", bias=False))
        p.update(_norm(2 * b, "up2.norm"))
        p.update(_conv(rng, d, b, 5, "out", bias=True))
        if arch.input_skip:
            p.update(_conv(rng, d, d, 1, "skip", bias=False))
        for name, t in p.items():
            t.name = name
        return cls(Direction(direction), arch, p)


@dataclass
class DiscriminatorParams:
    side: Side
    arch: Architecture
    params: dict[str, Tensor] = field(default_factory=dict)

    @classmethod
    def init(cls, side, arch: Architecture, rng: np.random.Generator) -> "DiscriminatorParams":
        c_prev = arch.n_features
        p: dict[str, Tensor] = {}
        for i, c in enumerate(arch.disc_channels):
            p.update(_conv(rng, 2 * c, c_prev, 5, f"block{i}", bias=i == 0))
            if i > 0:
                p.update(_norm(2 * c, f"block{i}.norm"))
            c_prev = c
        p.update(_conv(rng, 1, c_prev, 3, "out", bias=True))
        for name, t in p.items():
            t.name = name
        return cls(Side(side), arch, p)


def _gated(x: Tensor, p: dict[str, Tensor], name: str, stride: int = 1, padding: int = 2) -> Tensor:
    h = nx.conv1d(x, p[f"{name}.weight"], stride=stride, padding=padding)
    h = nx.instance_norm(h, p[f"{name}.norm.gain"], p[f"{name}.norm.bias"])
    return nx.glu(h)


def generator_forward(g: GeneratorParams, features: Tensor) -> Tensor:
    """Map a [24, T] feature block to a [24, T] block.

    Lengths not divisible by 4 are edge-padded on the right and cropped back.
    """
    d = g.arch.n_features
    if features.ndim != 2 or features.shape[0] != d:
        raise ValueError(f"generator expects [{d}, T] features, got {features.shape}")
    t = features.shape[1]
    if t < 1:
        raise ValueError("generator input has no frames")
    extra = (-t) % 4
    x = nx.pad_time(features, 0, extra, mode="edge") if extra else features
    p = g.params
    h = nx.glu(nx.conv1d(x, p["in.weight"], p["in.bias"], padding=2))
    h = _gated(h, p, "down1", stride=2)
    h = _gated(h, p, "down2", stride=2)
    for r in range(g.arch.n_residual):
        a = _gated(h, p, f"res{r}.a", padding=1)
        b = nx.conv1d(a, p[f"res{r}.b.weight"], padding=1)
        b = nx.instance_norm(b, p[f"res{r}.b.norm.gain"], p[f"res{r}.b.norm.bias"])
        h = h + b
    h = _gated(nx.upsample_nearest(h, 2), p, "up1")
    h = _gated(nx.upsample_nearest(h, 2), p, "up2")
    out = nx.conv1d(h, p["out.weight"], p["out.bias"], padding=2)
    if g.arch.input_skip:
        out = out + nx.conv1d(x, p["skip.weight"])
    return nx.crop_time(out, 0, t) if extra else out


def discriminator_forward(d: DiscriminatorParams, features: Tensor) -> Tensor:
    """Score a [24, T] block with a [1, T/8] real-valued patch map."""
    n = d.arch.n_features
    if features.ndim != 2 or features.shape[0] != n:
        raise ValueError(f"discriminator expects [{n}, T] features, got {features.shape}")
    if features.shape[1] < 16:
        raise ValueError(f"discriminator needs at least 16 frames, got {features.shape[1]}")
    p = d.params
    h = nx.glu(nx.conv1d(features, p["block0.weight"], p["block0.bias"], stride=2, padding=2))
    for i in range(1, len(d.arch.disc_channels)):
        h = _gated(h, p, f"block{i}", stride=2)
    return nx.conv1d(h, p["out.weight"], p["out.bias"], padding=1)
