"""Corpus manifests: UTF-8 CSV with header ``utterance_id,audio_path,transcript``."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path

MANIFEST_HEADER = ("utterance_id", "audio_path", "transcript")


@dataclass(frozen=True)
class ManifestRow:
    utterance_id: str
    audio_path: Path
    transcript: str

    @property
    def words(self) -> list[str]:
        return self.transcript.split()


def read_manifest(path: str | os.PathLike) -> list[ManifestRow]:
    """Read a manifest; relative audio paths resolve against the manifest's directory."""
    path = Path(path)
    base = path.parent
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != MANIFEST_HEADER:
            raise ValueError(f"{path}: manifest header must be {','.join(MANIFEST_HEADER)}, got {header}")
        rows = []
        seen = set()
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(rec)}")
            uid, audio, text = (c.strip() for c in rec)
            if not uid:
                raise ValueError(f"{path}:{lineno}: empty utterance_id")
            if uid in seen:
                raise ValueError(f"{path}:{lineno}: duplicate utterance_id {uid!r}")
            seen.add(uid)
            audio_path = Path(audio)
            if not audio_path.is_absolute():
                audio_path = base / audio_path
            rows.append(ManifestRow(uid, audio_path, text))
    return rows


def write_manifest(path: str | os.PathLike, rows, relative_to: str | os.PathLike | None = None) -> None:
    path = Path(path)
    base = Path(relative_to) if relative_to is not None else path.parent
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for r in rows:
            audio = Path(r.audio_path)
            try:
                audio = Path(os.path.relpath(audio, base)) if audio.is_absolute() else audio
            except ValueError:
                pass
            writer.writerow([r.utterance_id, audio.as_posix(), r.transcript])
