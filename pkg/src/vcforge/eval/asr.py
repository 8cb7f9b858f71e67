"""Pluggable speech recognizers used by the evaluation harness."""

from __future__ import annotations

import hashlib
import io
import json
import os
import shlex
import subprocess
import tempfile
import urllib.request
from pathlib import Path
from typing import Mapping, Optional, Protocol, Sequence

import numpy as np

from ..dsp.audio import Waveform, save_wav
from .metrics import Transcript


class AsrError(RuntimeError):
    pass


class AsrClient(Protocol):
    def transcribe(self, audio: Waveform, utterance_id: str = "", audio_path: Optional[Path] = None) -> Transcript: ...


def fingerprint(w: Waveform) -> str:
    """SHA-256 over the sample rate and little-endian float64 samples."""
    h = hashlib.sha256()
    h.update(int(w.sample_rate).to_bytes(4, "little"))
    h.update(np.ascontiguousarray(w.samples, dtype="<f8").tobytes())
    return h.hexdigest()


class MockAsr:
    """Deterministic lookup from audio fingerprint to transcript text."""

    def __init__(self, table: Mapping[str, str | Sequence[str]], default: Optional[str] = None):
        self.table = {k: (v if isinstance(v, str) else " ".join(v)) for k, v in table.items()}
        self.default = default

    @classmethod
    def from_json(cls, path: str | os.PathLike) -> "MockAsr":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if isinstance(data, dict) and "table" in data:
            return cls(data["table"], data.get("default"))
        return cls(data)

    def transcribe(self, audio: Waveform, utterance_id: str = "", audio_path: Optional[Path] = None) -> Transcript:
        key = fingerprint(audio)
        text = self.table.get(key, self.default)
        if text is None:
            raise AsrError(f"mock recognizer has no entry for utterance {utterance_id!r} (fingerprint {key[:12]})")
        return Transcript(utterance_id, text)


def _first_line(text: str) -> str:
    lines = text.strip().splitlines()
    return lines[0] if lines else ""


class ExternalAsr:
    """Adapter to a user-supplied recognizer.

    With ``command``, the program runs once per utterance; ``{audio}`` in the
    command is replaced by the WAV path (appended if absent) and the first
    line of stdout is the transcript. With ``url``, the WAV bytes are POSTed
    and the first line of the response body is the transcript.
    """

    def __init__(self, command: str | Sequence[str] | None = None, url: Optional[str] = None, timeout: float = 30.0):
        if (command is None) == (url is None):
            raise ValueError("give exactly one of command or url")
        self.command = shlex.split(command) if isinstance(command, str) else (list(command) if command else None)
        self.url = url
        self.timeout = timeout

    def _run(self, path: Path) -> str:
        argv = [a.replace("{audio}", str(path)) for a in self.command]
        if not any("{audio}" in a for a in self.command):
            argv.append(str(path))
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=self.timeout, check=False)
        except subprocess.TimeoutExpired as exc:
            raise AsrError(f"recognizer timed out after {self.timeout} s on {path}") from exc
        except OSError as exc:
            raise AsrError(f"could not start recognizer {argv[0]!r}: {exc}") from exc
        if proc.returncode != 0:
            raise AsrError(f"recognizer exited with status {proc.returncode} on {path}: {proc.stderr.strip()[:200]}")
        return _first_line(proc.stdout)

    def _post(self, audio: Waveform) -> str:
        buf = io.BytesIO()
        save_wav(buf, audio)
        req = urllib.request.Request(self.url, data=buf.getvalue(), headers={"Content-Type": "audio/wav"}, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return _first_line(resp.read().decode("utf-8"))
        except OSError as exc:
            raise AsrError(f"recognizer request to {self.url} failed: {exc}") from exc

    def transcribe(self, audio: Waveform, utterance_id: str = "", audio_path: Optional[Path] = None) -> Transcript:
        if self.url is not None:
            return Transcript(utterance_id, self._post(audio))
        if audio_path is not None and Path(audio_path).exists():
            return Transcript(utterance_id, self._run(Path(audio_path)))
        with tempfile.TemporaryDirectory() as tmp:
            p = Path(tmp) / f"{utterance_id or 'utt'}.wav"
            save_wav(p, audio)
            return Transcript(utterance_id, self._run(p))
