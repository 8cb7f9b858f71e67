"""Corpus-level evaluation and Table-1 style reporting."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from ..corpus import ManifestRow
from ..dsp.audio import load_wav
from .asr import AsrClient, AsrError
from .metrics import Transcript, align_words

# column order of the published comparison table
CANONICAL_SYSTEMS = ("Normal", "CLP", "CLP_nmf", "CLP_cyclegan")


@dataclass(frozen=True)
class SystemSpec:
    """A speech condition: where its audio lives. ``audio_dir=None`` uses the manifest paths."""

    name: str
    audio_dir: Optional[Path] = None

    def audio_for(self, row: ManifestRow) -> Path:
        if self.audio_dir is None:
            return Path(row.audio_path)
        return Path(self.audio_dir) / f"{row.utterance_id}.wav"


@dataclass
class DetailRow:
    id: str
    system: str
    wer: Optional[float]
    intelligibility: Optional[float]
    errors: int = 0
    n_words: int = 0
    hypothesis: str = ""
    error: Optional[str] = None


@dataclass
class SystemRow:
    system_name: str
    wer_percent: float
    intelligibility_percent: float
    mos: Optional[float] = None
    n_utterances: int = 0
    n_failed: int = 0

    @property
    def complete(self) -> bool:
        return self.n_failed == 0


@dataclass
class EvalReport:
    asr_name: str
    systems: list[SystemRow] = field(default_factory=list)
    details: list[DetailRow] = field(default_factory=list)

    def row(self, name: str) -> SystemRow:
        for r in self.systems:
            if r.system_name == name:
                return r
        raise KeyError(name)

    @property
    def incomplete_systems(self) -> list[str]:
        return [r.system_name for r in self.systems if not r.complete]


def order_systems(names: Sequence[str]) -> list[str]:
    canonical = [n for n in CANONICAL_SYSTEMS if n in names]
    return canonical + [n for n in names if n not in CANONICAL_SYSTEMS]


def _score_one(asr: AsrClient, system: SystemSpec, row: ManifestRow) -> DetailRow:
    ref = Transcript(row.utterance_id, row.transcript)
    path = system.audio_for(row)
    try:
        audio = load_wav(path)
        hyp = asr.transcribe(audio, row.utterance_id, path)
    except (OSError, ValueError, AsrError) as exc:
        return DetailRow(row.utterance_id, system.name, None, None, error=f"{type(exc).__name__}: {exc}")
    if not ref.words:
        return DetailRow(row.utterance_id, system.name, None, None, error="empty reference transcript")
    a = align_words(ref.words, hyp.words)
    n = len(ref.words)
    return DetailRow(
        row.utterance_id, system.name, 100.0 * a.errors / n, 100.0 * a.hits / n,
        errors=a.errors, n_words=n, hypothesis=" ".join(hyp.words),
    )


def evaluate_corpus(
    manifest: Sequence[ManifestRow],
    systems: Sequence[SystemSpec],
    asr: AsrClient,
    asr_name: str = "ASR",
    workers: int = 1,
    mos: Optional[dict[str, float]] = None,
) -> EvalReport:
    """Transcribe every utterance of every system and aggregate.

    Corpus WER is pooled (total errors / total reference words); the
    intelligibility is the mean of per-utterance scores. Failed utterances
    are recorded and excluded from the aggregates; their system is flagged
    incomplete.
    """
    if not manifest:
        raise ValueError("manifest is empty")
    if not systems:
        raise ValueError("no systems to evaluate")
    rows = sorted(manifest, key=lambda r: r.utterance_id)
    jobs = [(s, r) for s in systems for r in rows]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            details = list(pool.map(lambda job: _score_one(asr, *job), jobs))
    else:
        details = [_score_one(asr, s, r) for s, r in jobs]

    by_name = {s.name: s for s in systems}
    report = EvalReport(asr_name)
    for name in order_systems(list(by_name)):
        mine = [d for d in details if d.system == name]
        ok = [d for d in mine if d.error is None]
        words = sum(d.n_words for d in ok)
        errors = sum(d.errors for d in ok)
        wer = 100.0 * errors / words if words else math.nan
        intel = math.fsum(d.intelligibility for d in ok) / len(ok) if ok else math.nan
        report.systems.append(
            SystemRow(name, wer, intel, (mos or {}).get(name), len(mine), len(mine) - len(ok))
        )
    order = {n: i for i, n in enumerate(order_systems(list(by_name)))}
    report.details = sorted(details, key=lambda d: (order[d.system], d.id))
    return report


def _fmt(v: Optional[float]) -> str:
    return "n/a" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.2f}"


def render_table(report: EvalReport) -> str:
    """Rows are metrics for one recognizer; columns are the speech conditions."""
    names = [r.system_name for r in report.systems]
    header = ["ASR system", "metric"] + [n + ("*" if not report.row(n).complete else "") for n in names]
    body = [
        [report.asr_name, "WER (%)"] + [_fmt(r.wer_percent) for r in report.systems],
        ["", "Intelligibility (%)"] + [_fmt(r.intelligibility_percent) for r in report.systems],
    ]
    if any(r.mos is not None for r in report.systems):
        body.append(["", "MOS"] + [_fmt(r.mos) for r in report.systems])
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]

    def line(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

    sep = "|" + "|".join("-" * (w + 2) for w in widths) + "|"
    out = [line(header), sep] + [line(r) for r in body]
    if report.incomplete_systems:
        out.append("* incomplete: some utterances failed (see detail file)")
    return "\n".join(out)


def write_details(report: EvalReport, path: str | os.PathLike) -> None:
    """JSON lines, one object per system x utterance."""
    with open(path, "w", encoding="utf-8") as fh:
        for d in report.details:
            rec = {"id": d.id, "system": d.system, "wer": d.wer, "intelligibility": d.intelligibility}
            if d.error is not None:
                rec["error"] = d.error
            fh.write(json.dumps(rec, sort_keys=False) + "\n")


def report_rows(report: EvalReport) -> list[dict]:
    return [asdict(r) | {"complete": r.complete} for r in report.systems]
