"""PCM WAV input/output and linear-interpolation resampling."""

from __future__ import annotations

import os
import wave
from dataclasses import dataclass

import numpy as np

DEFAULT_SAMPLE_RATE = 16000


class WavFormatError(ValueError):
    pass


@dataclass
class Waveform:
    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("waveform contains non-finite samples")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def resample_linear(samples: np.ndarray, rate_in: int, rate_out: int) -> np.ndarray:
    if rate_in == rate_out:
        return np.asarray(samples, dtype=np.float64)
    n_out = int(round(len(samples) * rate_out / rate_in))
    t_in = np.arange(len(samples)) / rate_in
    t_out = np.arange(n_out) / rate_out
    return np.interp(t_out, t_in, samples)


def load_wav(path: str | os.PathLike, target_rate: int = DEFAULT_SAMPLE_RATE) -> Waveform:
    """Read a mono 16-bit PCM WAV, resampling to ``target_rate`` if needed."""
    try:
        with wave.open(os.fspath(path), "rb") as f:
            n_channels = f.getnchannels()
            width = f.getsampwidth()
            rate = f.getframerate()
            n_frames = f.getnframes()
            raw = f.readframes(n_frames)
    except wave.Error as exc:
        raise WavFormatError(f"{path}: not a PCM WAV file ({exc})") from exc
    except EOFError as exc:
        raise WavFormatError(f"{path}: truncated WAV header") from exc
    if n_channels != 1:
        raise WavFormatError(f"{path}: expected mono audio, found {n_channels} channels")
    if width != 2:
        raise WavFormatError(f"{path}: expected 16-bit samples, found {8 * width}-bit")
    if len(raw) != n_frames * 2:
        raise WavFormatError(f"{path}: truncated data chunk ({len(raw)} of {n_frames * 2} bytes)")
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if rate != target_rate:
        samples = resample_linear(samples, rate, target_rate)
    return Waveform(samples, target_rate)


def save_wav(path, w: Waveform) -> None:
    """Write 16-bit mono PCM; ``path`` may also be a writable binary file object."""
    pcm = np.clip(np.round(w.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(path if hasattr(path, "write") else os.fspath(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(int(w.sample_rate))
        f.writeframes(pcm.tobytes())
