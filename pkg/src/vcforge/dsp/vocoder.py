"""Pulse/noise excitation vocoder driven by mel-cepstral envelopes."""

from __future__ import annotations

import numpy as np

from ..numerics.random import make_rng
from .audio import Waveform
from .features import FeatureSequence
from .mcep import mel_cepstrum_to_envelope
from .spectral import istft, ms_to_samples, stft

SYNTH_N_FFT = 1024
PEAK_LEVEL = 0.9


def excitation(f0: np.ndarray, hop: int, n_samples: int, sample_rate: int, seed: int = 0) -> np.ndarray:
    """Unit-power pulse train where voiced, unit-variance white noise elsewhere."""
    if n_samples == 0:
        return np.zeros(0)
    frame_of = np.minimum(np.arange(n_samples) // hop, len(f0) - 1)
    f0_per_sample = np.asarray(f0, dtype=np.float64)[frame_of]
    voiced = f0_per_sample > 0
    noise = make_rng(seed).standard_normal(n_samples)
    out = np.where(voiced, 0.0, noise)
    phase = np.cumsum(np.where(voiced, f0_per_sample / sample_rate, 0.0))
    # a pulse wherever the running phase crosses an integer; keeps pulse
    # spacing continuous across frame boundaries
    crossings = np.flatnonzero(np.diff(np.floor(phase), prepend=np.floor(phase[0]) - voiced[0]) > 0)
    crossings = crossings[voiced[crossings]]
    out[crossings] = np.sqrt(sample_rate / f0_per_sample[crossings])
    return out


def synthesize(f: FeatureSequence, sample_rate: int = 16000, seed: int = 0) -> Waveform:
    """Resynthesize a waveform from mel-cepstra and F0.

    The excitation is analysed with the feature framing, each frame is shaped
    by its cepstral envelope, and frames are overlap-added. The result is
    peak-normalized to 0.9.
    """
    t = f.n_frames
    frame_len = ms_to_samples(f.frame_len_ms, sample_rate)
    hop = ms_to_samples(f.frame_hop_ms, sample_rate)
    if t == 0:
        return Waveform(np.zeros(0), sample_rate)
    n_samples = (t - 1) * hop + frame_len
    exc = excitation(f.f0, hop, n_samples, sample_rate, seed)
    spec = stft(Waveform(exc, sample_rate), f.frame_len_ms, f.frame_hop_ms, SYNTH_N_FFT)
    spec.frames = spec.frames * mel_cepstrum_to_envelope(f.mel_cepstra, SYNTH_N_FFT, sample_rate)
    out = istft(spec).samples
    peak = np.max(np.abs(out))
    if peak > 0:
        out = out * (PEAK_LEVEL / peak)
    return Waveform(out, sample_rate)
