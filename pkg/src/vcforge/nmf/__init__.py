"""Parallel NMF baseline: DTW alignment, coupled dictionaries, shared-activation conversion."""

from .convert import NMFConverter, align_pair, convert_nmf, convert_spectrogram, magnitude_spectrogram, stack_aligned
from .dtw import aligned_pairs, dtw_align
from .factorization import (
    Activation,
    DictionaryPair,
    frobenius_objective,
    infer_activations,
    learn_joint_dictionaries,
    load_dictionary,
    normalize_pair,
    save_dictionary,
)

__all__ = [
    "Activation",
    "DictionaryPair",
    "NMFConverter",
    "align_pair",
    "aligned_pairs",
    "convert_nmf",
    "convert_spectrogram",
    "dtw_align",
    "frobenius_objective",
    "infer_activations",
    "learn_joint_dictionaries",
    "load_dictionary",
    "magnitude_spectrogram",
    "normalize_pair",
    "save_dictionary",
    "stack_aligned",
]
