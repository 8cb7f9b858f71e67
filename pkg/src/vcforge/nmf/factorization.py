"""Coupled dictionary learning with Euclidean NMF multiplicative updates."""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from ..numerics.random import make_rng

EPS = 1e-12
DICT_MAGIC = b"VCNF"
DICT_VERSION = 1


@dataclass
class DictionaryPair:
    """Paired source/target bases, each [F, K], sharing one activation convention."""

    source_basis: np.ndarray
    target_basis: np.ndarray

    def __post_init__(self):
        self.source_basis = np.asarray(self.source_basis, dtype=np.float64)
        self.target_basis = np.asarray(self.target_basis, dtype=np.float64)
        if self.source_basis.ndim != 2 or self.source_basis.shape != self.target_basis.shape:
            raise ValueError(
                f"bases must be equal-shape [F, K] matrices, got {self.source_basis.shape} and {self.target_basis.shape}"
            )
        if np.any(self.source_basis < 0) or np.any(self.target_basis < 0):
            raise ValueError("dictionary entries must be nonnegative")

    @property
    def n_bins(self) -> int:
        return self.source_basis.shape[0]

    @property
    def n_components(self) -> int:
        return self.source_basis.shape[1]


@dataclass
class Activation:
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if np.any(self.weights < 0):
            raise ValueError("activations must be nonnegative")


def frobenius_objective(V: np.ndarray, W: np.ndarray, H: np.ndarray) -> float:
    R = V - W @ H
    return float(np.sum(R * R))


def _positive_init(rng: np.random.Generator, shape) -> np.ndarray:
    # uniform on (0, 1]
    return 1.0 - rng.random(shape)


def update_activations(V: np.ndarray, W: np.ndarray, H: np.ndarray) -> np.ndarray:
    return H * (W.T @ V) / (W.T @ W @ H + EPS)


def update_basis(V: np.ndarray, W: np.ndarray, H: np.ndarray) -> np.ndarray:
    return W * (V @ H.T) / (W @ (H @ H.T) + EPS)


def normalize_pair(W_s: np.ndarray, W_t: np.ndarray, H: np.ndarray):
    """Scale source columns to unit L2 norm; the same factor scales the paired
    target column and inversely scales the activation row. Zero columns stay zero.
    """
    norms = np.linalg.norm(W_s, axis=0)
    scale = np.where(norms > 0, norms, 1.0)
    return W_s / scale, W_t / scale, H * scale[:, None]


def learn_joint_dictionaries(
    S: np.ndarray,
    Tg: np.ndarray,
    n_components: int = 100,
    iterations: int = 500,
    seed: int = 0,
    return_objective: bool = False,
):
    """Factorize the row-stacked matrix ``[S; Tg] ~ [W_s; W_t] H`` with shared ``H``.

    ``S`` and ``Tg`` are DTW-aligned nonnegative [F, N] magnitude matrices.
    Returns ``(DictionaryPair, Activation)`` and, with ``return_objective``,
    the objective after initialization and after every iteration.
    """
    S = np.asarray(S, dtype=np.float64)
    Tg = np.asarray(Tg, dtype=np.float64)
    if S.shape != Tg.shape or S.ndim != 2:
        raise ValueError(f"source and target matrices must share an [F, N] shape, got {S.shape} and {Tg.shape}")
    if np.any(S < 0) or np.any(Tg < 0):
        raise ValueError("input spectra must be nonnegative")
    f, n = S.shape
    if n_components > n:
        raise ValueError(f"n_components={n_components} exceeds the number of aligned frames ({n})")
    if n_components < 1 or iterations < 0:
        raise ValueError("n_components must be positive and iterations nonnegative")
    V = np.vstack([S, Tg])
    rng = make_rng(seed)
    W = _positive_init(rng, (2 * f, n_components))
    H = _positive_init(rng, (n_components, n))
    objective = [frobenius_objective(V, W, H)]
    for _ in range(iterations):
        H = update_activations(V, W, H)
        W = update_basis(V, W, H)
        objective.append(frobenius_objective(V, W, H))
    W_s, W_t, H = normalize_pair(W[:f], W[f:], H)
    result = (DictionaryPair(W_s, W_t), Activation(H))
    return (*result, objective) if return_objective else result


def infer_activations(
    source_basis: np.ndarray,
    S: np.ndarray,
    iterations: int = 200,
    seed: int = 0,
    return_objective: bool = False,
):
    """Estimate nonnegative ``H`` with ``S ~ source_basis @ H``, the basis held fixed."""
    W = np.asarray(source_basis, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    if np.any(W < 0):
        raise ValueError("basis must be nonnegative")
    if W.shape[0] != S.shape[0]:
        raise ValueError(f"basis has {W.shape[0]} rows but spectra have {S.shape[0]}")
    H = _positive_init(make_rng(seed), (W.shape[1], S.shape[1]))
    WtS = W.T @ S
    WtW = W.T @ W
    objective = [frobenius_objective(S, W, H)]
    for _ in range(iterations):
        H = H * WtS / (WtW @ H + EPS)
        if return_objective:
            objective.append(frobenius_objective(S, W, H))
    act = Activation(H)
    return (act, objective) if return_objective else act


def save_dictionary(path: str | os.PathLike, d: DictionaryPair) -> None:
    """``VCNF | u32 version | u32 F | u32 K | W_s | W_t`` as little-endian f32, row-major."""
    with open(path, "wb") as fh:
        fh.write(DICT_MAGIC)
        fh.write(struct.pack("<III", DICT_VERSION, d.n_bins, d.n_components))
        fh.write(np.ascontiguousarray(d.source_basis, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(d.target_basis, dtype="<f4").tobytes())


def load_dictionary(path: str | os.PathLike) -> DictionaryPair:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != DICT_MAGIC:
        raise ValueError(f"{path}: not an NMF dictionary (magic {blob[:4]!r})")
    if len(blob) < 16:
        raise ValueError(f"{path}: truncated dictionary header")
    version, f, k = struct.unpack_from("<III", blob, 4)
    if version != DICT_VERSION:
        raise ValueError(f"{path}: unsupported dictionary version {version}")
    expected = 16 + 2 * 4 * f * k
    if len(blob) != expected:
        raise ValueError(f"{path}: dictionary has {len(blob)} bytes, expected {expected}")
    ws = np.frombuffer(blob, dtype="<f4", count=f * k, offset=16).reshape(f, k)
    wt = np.frombuffer(blob, dtype="<f4", count=f * k, offset=16 + 4 * f * k).reshape(f, k)
    return DictionaryPair(ws.astype(np.float64), wt.astype(np.float64))
