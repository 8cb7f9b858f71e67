"""Deterministic synthetic parallel corpus.

Target ("normal") utterances are harmonic vowel-like words with two sharp
formant peaks. Source ("CLP") utterances share words, timing and pitch but
carry broadened, weakened formants and an added resonance near 1 kHz.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import ManifestRow, write_manifest
from .dsp.audio import Waveform, save_wav
from .numerics.random import make_rng

SAMPLE_RATE = 16000

# word -> (F1, F2) in Hz
VOCABULARY = {
    "taa": (730.0, 1090.0),
    "bii": (300.0, 2290.0),
    "puu": (320.0, 870.0),
    "kee": (530.0, 1840.0),
    "doo": (570.0, 840.0),
    "maa": (650.0, 1250.0),
}

FORMANT_BW = (90.0, 120.0)
NASAL_FREQ = 1000.0
NASAL_BW = 220.0
NASAL_GAIN = 1.2
FLATTEN_BW = 2.5
FLATTEN_GAIN = 0.55
NOISE_FLOOR = 1e-3


def _resonance(f: np.ndarray, center: float, bw: float) -> np.ndarray:
    return 1.0 / np.sqrt(1.0 + ((f - center) / (0.5 * bw)) ** 2)


def envelope(f: np.ndarray, formants: tuple[float, float], degraded: bool) -> np.ndarray:
    tilt = 1.0 / (1.0 + f / 1500.0)
    f1, f2 = formants
    if degraded:
        peaks = FLATTEN_GAIN * (
            _resonance(f, f1, FLATTEN_BW * FORMANT_BW[0]) + 0.6 * _resonance(f, f2, FLATTEN_BW * FORMANT_BW[1])
        )
        peaks = peaks + NASAL_GAIN * _resonance(f, NASAL_FREQ, NASAL_BW)
    else:
        peaks = _resonance(f, f1, FORMANT_BW[0]) + 0.6 * _resonance(f, f2, FORMANT_BW[1])
    return tilt * (peaks + 0.03)


def _word(f0_track: np.ndarray, formants, degraded: bool) -> np.ndarray:
    n = f0_track.size
    phase = np.cumsum(f0_track) / SAMPLE_RATE
    n_harm = int(7600.0 // f0_track.max())
    k = np.arange(1, n_harm + 1)
    out = np.zeros(n)
    # amplitudes follow the instantaneous harmonic frequency
    for h in k:
        amp = envelope(h * f0_track, formants, degraded)
        out += amp * np.cos(2 * np.pi * h * phase)
    ramp = min(n // 2, int(0.03 * SAMPLE_RATE))
    fade = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
    out[:ramp] *= fade
    out[n - ramp :] *= fade[::-1]
    return out


def steady_vowel(f0: float, formants: tuple[float, float], n_samples: int, degraded: bool = False) -> np.ndarray:
    """A constant-pitch vowel-like tone, peak-normalized to 0.5."""
    x = _word(np.full(n_samples, float(f0)), formants, degraded)
    return x * (0.5 / np.max(np.abs(x)))


@dataclass
class ToyUtterance:
    utterance_id: str
    words: list[str]
    source: np.ndarray
    target: np.ndarray


def make_utterance(rng: np.random.Generator, utterance_id: str) -> ToyUtterance:
    names = list(VOCABULARY)
    n_words = int(rng.integers(3, 6))
    words = [names[int(i)] for i in rng.integers(0, len(names), size=n_words)]
    base_f0 = rng.uniform(120.0, 200.0)
    src_parts, tgt_parts = [], []

    def gap():
        g = rng.normal(0.0, NOISE_FLOOR, size=int(rng.uniform(0.05, 0.10) * SAMPLE_RATE))
        src_parts.append(g)
        tgt_parts.append(g)

    gap()
    for w in words:
        n = int(rng.uniform(0.25, 0.40) * SAMPLE_RATE)
        start = base_f0 * rng.uniform(0.95, 1.05)
        f0_track = np.linspace(start, start * 0.9, n)
        tgt_parts.append(_word(f0_track, VOCABULARY[w], degraded=False))
        src_parts.append(_word(f0_track, VOCABULARY[w], degraded=True))
        gap()
    src = np.concatenate(src_parts)
    tgt = np.concatenate(tgt_parts)
    # equal peak level in both domains
    src *= 0.5 / np.max(np.abs(src))
    tgt *= 0.5 / np.max(np.abs(tgt))
    return ToyUtterance(utterance_id, words, src, tgt)


def generate(n_utterances: int, seed: int) -> list[ToyUtterance]:
    if n_utterances < 2:
        raise ValueError(f"need at least 2 utterances, got {n_utterances}")
    rng = make_rng(seed)
    return [make_utterance(rng, f"utt{i:03d}") for i in range(n_utterances)]


def write_corpus(out_dir: str | os.PathLike, n_utterances: int = 20, seed: int = 7, train_fraction: float = 0.75) -> dict[str, Path]:
    """Write WAVs, ``source.csv`` / ``target.csv`` and train/eval splits under ``splits/``."""
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1], got {train_fraction}")
    out = Path(out_dir)
    (out / "source").mkdir(parents=True, exist_ok=True)
    (out / "target").mkdir(parents=True, exist_ok=True)
    (out / "splits").mkdir(exist_ok=True)
    utts = generate(n_utterances, seed)
    rows = {"source": [], "target": []}
    for u in utts:
        text = " ".join(u.words)
        for domain, samples in (("source", u.source), ("target", u.target)):
            rel = Path(domain) / f"{u.utterance_id}.wav"
            save_wav(out / rel, Waveform(samples, SAMPLE_RATE))
            rows[domain].append(ManifestRow(u.utterance_id, rel, text))
    n_train = max(1, min(n_utterances - 1, int(round(train_fraction * n_utterances)))) if train_fraction < 1 else n_utterances
    paths = {}
    for domain, rs in rows.items():
        paths[domain] = out / f"{domain}.csv"
        write_manifest(paths[domain], rs)
        for split, part in (("train", rs[:n_train]), ("eval", rs[n_train:])):
            p = out / "splits" / f"{domain}_{split}.csv"
            write_manifest(p, [ManifestRow(r.utterance_id, Path("..") / r.audio_path, r.transcript) for r in part])
            paths[f"{domain}_{split}"] = p
    return paths
