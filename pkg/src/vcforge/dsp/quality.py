"""Objective spectral-distance measures for vocoder and conversion checks."""

from __future__ import annotations

import numpy as np

from .features import FeatureSequence
from .mcep import mel_cepstrum_to_envelope


def envelope_db(mel_cepstra: np.ndarray, n_fft: int = 1024, sample_rate: int = 16000) -> np.ndarray:
    return 20.0 * np.log10(mel_cepstrum_to_envelope(mel_cepstra, n_fft, sample_rate))


def log_spectral_distortion(
    reference: FeatureSequence | np.ndarray,
    test: FeatureSequence | np.ndarray,
    frames: np.ndarray | None = None,
    remove_gain: bool = True,
) -> np.ndarray:
    """Per-frame RMS difference in dB between two spectral envelopes.

    Inputs are [T, 24] mel-cepstra (or feature sequences) truncated to the
    shorter length. With ``remove_gain`` the mean dB offset over the selected
    frames is subtracted first, since resynthesis is peak-normalized and an
    overall level change is not a spectral-shape error.
    """
    a = reference.mel_cepstra if isinstance(reference, FeatureSequence) else np.asarray(reference)
    b = test.mel_cepstra if isinstance(test, FeatureSequence) else np.asarray(test)
    t = min(len(a), len(b))
    mask = np.ones(t, dtype=bool) if frames is None else np.asarray(frames[:t], dtype=bool)
    if not mask.any():
        raise ValueError("no frames selected for the distortion measure")
    d = envelope_db(a[:t][mask]) - envelope_db(b[:t][mask])
    if remove_gain:
        d = d - d.mean()
    return np.sqrt(np.mean(d * d, axis=1))


def interior_voiced(f: FeatureSequence, margin: int = 5) -> np.ndarray:
    """Voiced frames at least ``margin`` frames away from any voicing boundary."""
    v = f.voiced
    out = v.copy()
    for k in range(1, margin + 1):
        out[k:] &= v[:-k]
        out[:-k] &= v[k:]
    out[:margin] = False
    out[len(out) - margin :] = False
    return out
