"""Per-coefficient zero-mean / unit-variance normalization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .features import FeatureSequence

STD_FLOOR = 1e-8


@dataclass
class NormStats:
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        self.std = np.maximum(np.asarray(self.std, dtype=np.float64).reshape(-1), STD_FLOOR)
        if self.mean.shape != self.std.shape:
            raise ValueError(f"mean {self.mean.shape} and std {self.std.shape} differ in length")


def _as_matrix(x) -> np.ndarray:
    return x.mel_cepstra if isinstance(x, FeatureSequence) else np.asarray(x)


def compute_norm_stats(corpus: Iterable[FeatureSequence | np.ndarray]) -> NormStats:
    """Pool every frame of every utterance and take per-coefficient mean and std."""
    mats = [np.asarray(_as_matrix(f), dtype=np.float64) for f in corpus]
    mats = [m for m in mats if m.size]
    if not mats:
        raise ValueError("cannot compute normalization statistics from an empty corpus")
    pooled = np.concatenate(mats, axis=0)
    return NormStats(pooled.mean(axis=0), pooled.std(axis=0))


def apply_norm(f: FeatureSequence, stats: NormStats) -> FeatureSequence:
    return f.with_cepstra((f.mel_cepstra - stats.mean) / stats.std)


def invert_norm(f: FeatureSequence, stats: NormStats) -> FeatureSequence:
    return f.with_cepstra(f.mel_cepstra * stats.std + stats.mean)


class FeatureNormalizer(TransformerMixin, BaseEstimator):
    """Estimator wrapper over :func:`compute_norm_stats`.

    Accepts a list of :class:`FeatureSequence` (returned as a list) or a
    single [n_frames, n_coeffs] array.
    """

    def fit(self, X: Sequence, y=None):
        if isinstance(X, np.ndarray) and X.ndim == 2:
            X = [X]
        self.stats_ = compute_norm_stats(X)
        self.n_features_in_ = self.stats_.mean.size
        return self

    def _map(self, X, fn):
        check_is_fitted(self, "stats_")
        if isinstance(X, np.ndarray) and X.ndim == 2:
            return fn(X)
        return [
            f.with_cepstra(fn(f.mel_cepstra)) if isinstance(f, FeatureSequence) else fn(np.asarray(f))
            for f in X
        ]

    def transform(self, X):
        s = self.stats_
        return self._map(X, lambda m: (m - s.mean) / s.std)

    def inverse_transform(self, X):
        s = self.stats_
        return self._map(X, lambda m: m * s.std + s.mean)
