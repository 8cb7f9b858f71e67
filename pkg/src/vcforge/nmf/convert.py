"""Parallel-data NMF conversion: shared activations, target dictionary."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..dsp.audio import Waveform
from ..dsp.mcep import log_mel_bands
from ..dsp.spectral import Spectrogram, istft, stft
from .dtw import dtw_align
from .factorization import DictionaryPair, infer_activations, learn_joint_dictionaries

FRAME_LEN_MS = 20.0
HOP_MS = 10.0
N_FFT = 1024


def magnitude_spectrogram(w: Waveform) -> Spectrogram:
    return stft(w, FRAME_LEN_MS, HOP_MS, N_FFT)


def align_pair(src: Spectrogram, tgt: Spectrogram) -> tuple[np.ndarray, np.ndarray]:
    """DTW on log-mel frames; returns the aligned magnitudes as [F, N] matrices."""
    path, _ = dtw_align(log_mel_bands(src.frames, src.n_fft, src.sample_rate),
                        log_mel_bands(tgt.frames, tgt.n_fft, tgt.sample_rate))
    ia, ib = np.array(path).T
    return src.frames[ia].T, tgt.frames[ib].T


def stack_aligned(pairs: Sequence[tuple[Waveform, Waveform]]) -> tuple[np.ndarray, np.ndarray]:
    aligned = [align_pair(magnitude_spectrogram(s), magnitude_spectrogram(t)) for s, t in pairs]
    return np.hstack([a for a, _ in aligned]), np.hstack([b for _, b in aligned])


def convert_spectrogram(d: DictionaryPair, spec: Spectrogram, iterations: int = 200, seed: int = 0) -> Spectrogram:
    if d.n_components == 0 or not np.any(d.source_basis):
        raise ValueError("dictionary is empty; train it first")
    if spec.frames.shape[1] != d.n_bins:
        raise ValueError(f"spectrogram has {spec.frames.shape[1]} bins, dictionary expects {d.n_bins}")
    H = infer_activations(d.source_basis, spec.frames.T, iterations, seed).weights
    converted = (d.target_basis @ H).T
    return Spectrogram(converted, spec.phases, spec.n_fft, spec.sample_rate, spec.frame_len_ms, spec.hop_ms)


def convert_nmf(d: DictionaryPair, source_wav: Waveform, iterations: int = 200, seed: int = 0) -> Waveform:
    """STFT, activations on the source basis, target-basis magnitudes, source phase, inverse STFT."""
    return istft(convert_spectrogram(d, magnitude_spectrogram(source_wav), iterations, seed))


class NMFConverter(BaseEstimator):
    """Parallel voice conversion with coupled NMF dictionaries.

    ``fit(X, y)`` takes paired lists of source and target waveforms (same
    order); each pair is DTW-aligned before the dictionaries are learned.
    """

    def __init__(self, n_components: int = 100, max_iter: int = 500, infer_iter: int = 200, seed: int = 0):
        self.n_components = n_components
        self.max_iter = max_iter
        self.infer_iter = infer_iter
        self.seed = seed

    def fit(self, X: Sequence[Waveform], y: Sequence[Waveform]):
        if len(X) != len(y):
            raise ValueError(f"need paired data: {len(X)} source vs {len(y)} target utterances")
        if not X:
            raise ValueError("no training pairs")
        S, Tg = stack_aligned(list(zip(X, y)))
        self.dictionary_, self.activations_, self.objective_ = learn_joint_dictionaries(
            S, Tg, self.n_components, self.max_iter, self.seed, return_objective=True
        )
        return self

    def transform(self, X: Sequence[Waveform]) -> list[Waveform]:
        check_is_fitted(self, "dictionary_")
        return [convert_nmf(self.dictionary_, w, self.infer_iter, self.seed) for w in X]
