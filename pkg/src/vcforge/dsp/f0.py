"""Normalized-autocorrelation F0 tracker."""

from __future__ import annotations

import numpy as np

from .audio import Waveform
from .spectral import frame_count, ms_to_samples

F0_MIN = 50.0
F0_MAX = 500.0
VOICING_THRESHOLD = 0.3
RMS_THRESHOLD = 1e-4
# among local maxima, take the shortest lag within this fraction of the best
# peak; suppresses sub-octave picks on periodic signals
OCTAVE_TOLERANCE = 0.9


def _normalized_autocorr(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = x.size
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(x, nfft)
    ac = np.fft.irfft(spec * np.conj(spec), nfft)[: max_lag + 1]
    sq = np.concatenate([[0.0], np.cumsum(x * x)])
    lags = np.arange(max_lag + 1)
    head = sq[n - lags]  # energy of x[0 : n - lag]
    tail = sq[n] - sq[lags]  # energy of x[lag : n]
    denom = np.sqrt(head * tail)
    r = np.zeros(max_lag + 1)
    ok = denom > 1e-12
    r[ok] = ac[ok] / denom[ok]
    return r


def _pick_lag(r: np.ndarray, lo: int, hi: int) -> tuple[float, float]:
    seg = r[lo : hi + 1]
    if seg.size < 3:
        return 0.0, 0.0
    peaks = np.flatnonzero((seg[1:-1] >= seg[:-2]) & (seg[1:-1] > seg[2:])) + 1
    if peaks.size == 0:
        return 0.0, 0.0
    best = seg[peaks].max()
    if best <= 0:
        return 0.0, float(best)
    i = peaks[np.argmax(seg[peaks] >= OCTAVE_TOLERANCE * best)]
    a, b, c = seg[i - 1], seg[i], seg[i + 1]
    curvature = a - 2 * b + c
    shift = 0.5 * (a - c) / curvature if curvature < 0 else 0.0
    return lo + i + shift, float(b)


def estimate_f0(
    w: Waveform, frame_len_ms: float = 25.0, hop_ms: float = 10.0
) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame F0 in Hz (0 for unvoiced frames) and the boolean voicing flags.

    Frames follow the STFT layout (no centering). Each frame is analysed over a
    window of at least two periods of the lowest F0, centered on the frame.
    """
    sr = w.sample_rate
    frame_len = ms_to_samples(frame_len_ms, sr)
    hop = ms_to_samples(hop_ms, sr)
    n_frames = frame_count(len(w), frame_len, hop)
    lo = int(np.floor(sr / F0_MAX))
    hi = int(np.ceil(sr / F0_MIN))
    win = max(frame_len, 2 * hi)
    x = w.samples
    f0 = np.zeros(n_frames)
    for t in range(n_frames):
        center = t * hop + frame_len // 2
        start = max(0, center - win // 2)
        seg = x[start : min(len(x), start + win)]
        frame = x[t * hop : t * hop + frame_len]
        if np.sqrt(np.mean(frame * frame)) < RMS_THRESHOLD:
            continue
        max_lag = min(hi + 1, seg.size - 2)
        if max_lag <= lo + 1:
            continue
        r = _normalized_autocorr(seg - seg.mean(), max_lag)
        lag, peak = _pick_lag(r, lo, min(hi, max_lag - 1))
        if peak < VOICING_THRESHOLD or lag <= 0:
            continue
        f0[t] = np.clip(sr / lag, F0_MIN, F0_MAX)
    return f0, f0 > 0
