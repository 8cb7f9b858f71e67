"""Waveform I/O, spectral analysis, mel-cepstral features, F0, and the vocoder."""

from .audio import Waveform, WavFormatError, load_wav, resample_linear, save_wav
from .f0 import estimate_f0
from .features import (
    FeatureExtractor,
    FeatureSequence,
    extract_features,
    load_features,
    save_features,
)
from .mcep import (
    band_centers,
    log_mel_bands,
    mel_cepstral_analysis,
    mel_cepstrum_to_envelope,
    mel_filterbank,
)
from .normalize import FeatureNormalizer, NormStats, apply_norm, compute_norm_stats, invert_norm
from .quality import interior_voiced, log_spectral_distortion
from .spectral import Spectrogram, istft, stft
from .vocoder import synthesize

__all__ = [
    "FeatureExtractor",
    "FeatureNormalizer",
    "FeatureSequence",
    "NormStats",
    "Spectrogram",
    "WavFormatError",
    "Waveform",
    "apply_norm",
    "band_centers",
    "compute_norm_stats",
    "estimate_f0",
    "extract_features",
    "invert_norm",
    "interior_voiced",
    "istft",
    "load_features",
    "load_wav",
    "log_mel_bands",
    "log_spectral_distortion",
    "mel_cepstral_analysis",
    "mel_cepstrum_to_envelope",
    "mel_filterbank",
    "resample_linear",
    "save_features",
    "save_wav",
    "stft",
    "synthesize",
]
