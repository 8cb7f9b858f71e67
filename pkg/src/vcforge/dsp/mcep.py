"""Mel-cepstral analysis (mel filterbank -> log -> DCT-II) and its inverse."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.fft import dct, idct

from .spectral import Spectrogram

N_BANDS = 26
N_COEFFS = 24
LOG_FLOOR = 1e-10


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=16)
def _filterbank(n_fft: int, sample_rate: int, n_bands: int) -> tuple[np.ndarray, np.ndarray]:
    fmax = sample_rate / 2.0
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(fmax), n_bands + 2))
    bins = np.fft.rfftfreq(n_fft, 1.0 / sample_rate)
    fb = np.zeros((n_bands, bins.size))
    for b in range(n_bands):
        lo, mid, hi = edges[b], edges[b + 1], edges[b + 2]
        rise = (bins - lo) / (mid - lo)
        fall = (hi - bins) / (hi - mid)
        fb[b] = np.clip(np.minimum(rise, fall), 0.0, None)
    # unit-sum rows: a flat spectrum maps to equal band values
    fb /= fb.sum(axis=1, keepdims=True)
    fb.setflags(write=False)
    centers = edges[1:-1].copy()
    centers.setflags(write=False)
    return fb, centers


def mel_filterbank(n_fft: int = 1024, sample_rate: int = 16000, n_bands: int = N_BANDS) -> np.ndarray:
    """Triangular mel filters spanning 0 Hz to Nyquist, [n_bands, n_fft // 2 + 1]."""
    return _filterbank(n_fft, sample_rate, n_bands)[0]


def band_centers(n_fft: int = 1024, sample_rate: int = 16000, n_bands: int = N_BANDS) -> np.ndarray:
    return _filterbank(n_fft, sample_rate, n_bands)[1]


def log_mel_bands(magnitudes: np.ndarray, n_fft: int = 1024, sample_rate: int = 16000) -> np.ndarray:
    fb = mel_filterbank(n_fft, sample_rate)
    return np.log(np.maximum(np.asarray(magnitudes, dtype=np.float64) @ fb.T, LOG_FLOOR))


def mel_cepstral_analysis(s: Spectrogram, n_coeffs: int = N_COEFFS) -> np.ndarray:
    """Return a [T, n_coeffs] matrix of mel-cepstral coefficients."""
    if n_coeffs > N_BANDS:
        raise ValueError(f"at most {N_BANDS} coefficients are available, asked for {n_coeffs}")
    logmel = log_mel_bands(s.frames, s.n_fft, s.sample_rate)
    return dct(logmel, type=2, norm="ortho", axis=-1)[..., :n_coeffs]


def mel_cepstrum_to_envelope(c: np.ndarray, n_fft: int = 1024, sample_rate: int = 16000) -> np.ndarray:
    """Map cepstra ([24] or [T, 24]) to linear-frequency envelopes ([..., n_fft // 2 + 1]).

    Log band values are placed at the band center frequencies and linearly
    interpolated on the mel axis (held constant beyond the outer centers) before exponentiation.
    """
    c = np.asarray(c, dtype=np.float64)
    squeeze = c.ndim == 1
    c2 = np.atleast_2d(c)
    padded = np.zeros((c2.shape[0], N_BANDS))
    padded[:, : c2.shape[1]] = c2
    logmel = idct(padded, type=2, norm="ortho", axis=-1)
    centers = hz_to_mel(band_centers(n_fft, sample_rate))
    bins = hz_to_mel(np.fft.rfftfreq(n_fft, 1.0 / sample_rate))
    if len(logmel):
        log_env = np.stack([np.interp(bins, centers, row) for row in logmel])
    else:
        log_env = np.zeros((0, bins.size))
    env = np.exp(log_env)
    return env[0] if squeeze else env
