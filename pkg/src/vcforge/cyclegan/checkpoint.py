"""Binary checkpoint format.

Layout (little-endian)::

    b"VCGK" | u32 version
    u32 n | n bytes UTF-8 JSON {"config": ..., "arch": ...}   (sorted keys)
    4 x (u32 len | len f64)   source mean, source std, target mean, target std
    for net in G, F, D_X, D_Y:
        u32 n_params
        per parameter, in declaration order:
            u32 name_len | name | u32 ndim | ndim x u32 | prod(dims) f32
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from ..dsp.normalize import NormStats
from ..numerics import Tensor
from .model import CycleGanModel, TrainConfig
from .networks import Architecture, DiscriminatorParams, GeneratorParams

MAGIC = b"VCGK"
VERSION = 1
_NETS = (("G", GeneratorParams, "X_to_Y"), ("F", GeneratorParams, "Y_to_X"),
         ("D_X", DiscriminatorParams, "D_X"), ("D_Y", DiscriminatorParams, "D_Y"))


class CheckpointError(ValueError):
    pass


def dumps(model: CycleGanModel) -> bytes:
    if model.source_stats is None or model.target_stats is None:
        raise CheckpointError("model has no normalization statistics")
    out = bytearray(MAGIC)
    out += struct.pack("<I", VERSION)
    meta = json.dumps({"config": model.config.to_dict(), "arch": model.arch.to_dict()}, sort_keys=True).encode()
    out += struct.pack("<I", len(meta)) + meta
    for vec in (model.source_stats.mean, model.source_stats.std, model.target_stats.mean, model.target_stats.std):
        out += struct.pack("<I", vec.size) + np.asarray(vec, dtype="<f8").tobytes()
    for attr, _, _ in _NETS:
        params = getattr(model, attr).params
        out += struct.pack("<I", len(params))
        for name, t in params.items():
            enc = name.encode()
            out += struct.pack("<I", len(enc)) + enc
            out += struct.pack("<I", t.ndim) + struct.pack(f"<{t.ndim}I", *t.shape)
            out += np.asarray(t.data, dtype="<f4").tobytes()
    return bytes(out)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise CheckpointError(f"truncated checkpoint: needed {n} bytes at offset {self.pos}, file has {len(self.blob)}")
        chunk = self.blob[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def loads(blob: bytes) -> CycleGanModel:
    r = _Reader(blob)
    magic = r.take(4)
    if magic != MAGIC:
        raise CheckpointError(f"not a CycleGAN checkpoint (magic {magic!r}, expected {MAGIC!r})")
    version = r.u32()
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version} (expected {VERSION})")
    try:
        meta = json.loads(r.take(r.u32()).decode())
        config = TrainConfig(**meta["config"])
        arch = Architecture.from_dict(meta["arch"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CheckpointError(f"corrupt checkpoint metadata: {exc}") from exc
    vecs = []
    for _ in range(4):
        n = r.u32()
        vecs.append(np.frombuffer(r.take(8 * n), dtype="<f8").astype(np.float64))
    nets = {}
    for attr, cls, tag in _NETS:
        n = r.u32()
        params = {}
        for _ in range(n):
            name = r.take(r.u32()).decode()
            ndim = r.u32()
            shape = struct.unpack(f"<{ndim}I", r.take(4 * ndim))
            count = int(np.prod(shape)) if ndim else 1
            data = np.frombuffer(r.take(4 * count), dtype="<f4").reshape(shape).astype(np.float32)
            params[name] = Tensor(data, requires_grad=True, name=name)
        nets[attr] = cls(tag, arch, params)
    if r.pos != len(blob):
        raise CheckpointError(f"trailing {len(blob) - r.pos} bytes after checkpoint payload")
    expected = CycleGanModel.init(config, arch)
    for attr in ("G", "F", "D_X", "D_Y"):
        want = {k: v.shape for k, v in getattr(expected, attr).params.items()}
        got = {k: v.shape for k, v in nets[attr].params.items()}
        if want != got:
            raise CheckpointError(f"parameter layout of {attr} does not match its architecture")
    return CycleGanModel(
        nets["G"], nets["F"], nets["D_X"], nets["D_Y"],
        NormStats(vecs[0], vecs[1]), NormStats(vecs[2], vecs[3]), config,
    )


def save_checkpoint(model: CycleGanModel, path: str | os.PathLike) -> None:
    blob = dumps(model)
    with open(path, "wb") as fh:
        fh.write(blob)


def load_checkpoint(path: str | os.PathLike) -> CycleGanModel:
    with open(path, "rb") as fh:
        return loads(fh.read())
