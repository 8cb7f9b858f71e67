"""Short-time Fourier analysis and weighted overlap-add resynthesis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .audio import Waveform


@dataclass
class Spectrogram:
    """Magnitudes and phases, both [T, n_fft // 2 + 1]."""

    frames: np.ndarray
    phases: np.ndarray
    n_fft: int = 1024
    sample_rate: int = 16000
    frame_len_ms: float = 20.0
    hop_ms: float = 10.0

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        self.phases = np.asarray(self.phases, dtype=np.float64)
        n_bins = self.n_fft // 2 + 1
        if self.frames.ndim != 2 or self.frames.shape[1] != n_bins:
            raise ValueError(f"magnitudes must be [T, {n_bins}], got {self.frames.shape}")
        if self.phases.shape != self.frames.shape:
            raise ValueError(f"phases {self.phases.shape} do not match magnitudes {self.frames.shape}")
        if np.any(self.frames < 0):
            raise ValueError("magnitudes must be nonnegative")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def ms_to_samples(ms: float, sample_rate: int) -> int:
    return int(round(ms * sample_rate / 1000.0))


def hann(n: int) -> np.ndarray:
    return get_window("hann", n, fftbins=True)


def frame_count(n_samples: int, frame_len: int, hop: int) -> int:
    if n_samples < frame_len:
        return 0
    return 1 + (n_samples - frame_len) // hop


def frame_signal(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    n = frame_count(len(x), frame_len, hop)
    if n == 0:
        return np.zeros((0, frame_len))
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n)[:, None]
    return x[idx]


def stft(w: Waveform, frame_len_ms: float = 20.0, hop_ms: float = 10.0, n_fft: int = 1024) -> Spectrogram:
    frame_len = ms_to_samples(frame_len_ms, w.sample_rate)
    hop = ms_to_samples(hop_ms, w.sample_rate)
    if n_fft < frame_len:
        raise ValueError(f"n_fft={n_fft} is shorter than the frame ({frame_len} samples)")
    if len(w) < frame_len:
        raise ValueError(f"waveform of {len(w)} samples is shorter than one {frame_len}-sample frame")
    frames = frame_signal(w.samples, frame_len, hop) * hann(frame_len)
    spec = np.fft.rfft(frames, n=n_fft, axis=1)
    return Spectrogram(np.abs(spec), np.angle(spec), n_fft, w.sample_rate, frame_len_ms, hop_ms)


def istft(s: Spectrogram, hop_ms: float | None = None) -> Waveform:
    """Weighted overlap-add with a Hann synthesis window, normalized by the summed squared window."""
    hop = ms_to_samples(s.hop_ms if hop_ms is None else hop_ms, s.sample_rate)
    frame_len = ms_to_samples(s.frame_len_ms, s.sample_rate)
    t = s.n_frames
    if t == 0:
        return Waveform(np.zeros(0), s.sample_rate)
    win = hann(frame_len)
    frames = np.fft.irfft(s.frames * np.exp(1j * s.phases), n=s.n_fft, axis=1)[:, :frame_len] * win
    n_out = (t - 1) * hop + frame_len
    out = np.zeros(n_out)
    norm = np.zeros(n_out)
    w2 = win * win
    for i in range(t):
        out[i * hop : i * hop + frame_len] += frames[i]
        norm[i * hop : i * hop + frame_len] += w2
    nz = norm > 1e-10
    out[nz] /= norm[nz]
    out[~nz] = 0.0
    return Waveform(out, s.sample_rate)
