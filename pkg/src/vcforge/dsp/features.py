"""Per-utterance feature sequences, extraction, and the binary feature cache."""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .audio import Waveform
from .mcep import N_COEFFS, mel_cepstral_analysis
from .spectral import stft

CACHE_MAGIC = b"VCF1"

# CycleGAN feature path framing
FRAME_LEN_MS = 25.0
HOP_MS = 10.0
ANALYSIS_N_FFT = 1024


@dataclass
class FeatureSequence:
    mel_cepstra: np.ndarray
    f0: np.ndarray
    frame_hop_ms: float = HOP_MS
    frame_len_ms: float = FRAME_LEN_MS

    def __post_init__(self):
        self.mel_cepstra = np.asarray(self.mel_cepstra, dtype=np.float64).reshape(-1, N_COEFFS)
        self.f0 = np.asarray(self.f0, dtype=np.float64).reshape(-1)
        if self.f0.size != self.mel_cepstra.shape[0]:
            raise ValueError(f"f0 has {self.f0.size} frames but mel_cepstra has {self.mel_cepstra.shape[0]}")
        voiced = self.f0 != 0
        if np.any((self.f0[voiced] < 50.0) | (self.f0[voiced] > 500.0)):
            raise ValueError("f0 values must be 0 (unvoiced) or within [50, 500] Hz")
        if self.frame_hop_ms <= 0 or self.frame_len_ms <= 0:
            raise ValueError("frame_hop_ms and frame_len_ms must be positive")

    @property
    def n_frames(self) -> int:
        return self.mel_cepstra.shape[0]

    @property
    def voiced(self) -> np.ndarray:
        return self.f0 > 0

    def with_cepstra(self, mel_cepstra: np.ndarray) -> "FeatureSequence":
        return FeatureSequence(mel_cepstra, self.f0.copy(), self.frame_hop_ms, self.frame_len_ms)


def extract_features(
    w: Waveform, frame_len_ms: float = FRAME_LEN_MS, hop_ms: float = HOP_MS, n_fft: int = ANALYSIS_N_FFT
) -> FeatureSequence:
    from .f0 import estimate_f0

    spec = stft(w, frame_len_ms, hop_ms, n_fft)
    mcep = mel_cepstral_analysis(spec, N_COEFFS)
    f0, _ = estimate_f0(w, frame_len_ms, hop_ms)
    return FeatureSequence(mcep, f0, hop_ms, frame_len_ms)


class FeatureExtractor(TransformerMixin, BaseEstimator):
    """Stateless transformer: waveforms in, :class:`FeatureSequence` list out."""

    def __init__(self, frame_len_ms: float = FRAME_LEN_MS, hop_ms: float = HOP_MS, n_fft: int = ANALYSIS_N_FFT):
        self.frame_len_ms = frame_len_ms
        self.hop_ms = hop_ms
        self.n_fft = n_fft

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return [extract_features(w, self.frame_len_ms, self.hop_ms, self.n_fft) for w in X]


def save_features(path: str | os.PathLike, f: FeatureSequence) -> None:
    """Write ``VCF1 | u32 T | u32 dim | T*dim f32 | T f32 f0``, little-endian."""
    t, dim = f.mel_cepstra.shape
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<II", t, dim))
        fh.write(f.mel_cepstra.astype("<f4").tobytes())
        fh.write(f.f0.astype("<f4").tobytes())


def load_features(path: str | os.PathLike, frame_hop_ms: float = HOP_MS, frame_len_ms: float = FRAME_LEN_MS) -> FeatureSequence:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != CACHE_MAGIC:
        raise ValueError(f"{path}: not a feature cache (bad magic {blob[:4]!r})")
    if len(blob) < 12:
        raise ValueError(f"{path}: truncated feature cache header")
    t, dim = struct.unpack_from("<II", blob, 4)
    expected = 12 + 4 * t * dim + 4 * t
    if len(blob) != expected:
        raise ValueError(f"{path}: feature cache has {len(blob)} bytes, expected {expected}")
    if dim != N_COEFFS:
        raise ValueError(f"{path}: feature dimension {dim}, expected {N_COEFFS}")
    mcep = np.frombuffer(blob, dtype="<f4", count=t * dim, offset=12).reshape(t, dim)
    f0 = np.frombuffer(blob, dtype="<f4", count=t, offset=12 + 4 * t * dim)
    return FeatureSequence(mcep.copy(), f0.copy(), frame_hop_ms, frame_len_ms)
