"""Word error rate, intelligibility score, and MOS aggregation."""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import Iterable, Sequence

_STRIP = string.punctuation + "‘’“”"


def normalize_tokens(text: str | Iterable[str]) -> list[str]:
    """Lowercase, strip leading/trailing punctuation from each token, drop empties."""
    tokens = text.split() if isinstance(text, str) else [t for chunk in text for t in str(chunk).split()]
    out = []
    for tok in tokens:
        tok = tok.lower().strip(_STRIP)
        if tok:
            out.append(tok)
    return out


@dataclass(frozen=True)
class Transcript:
    utterance_id: str
    words: tuple[str, ...]

    def __init__(self, utterance_id: str, words: str | Iterable[str]):
        object.__setattr__(self, "utterance_id", utterance_id)
        object.__setattr__(self, "words", tuple(normalize_tokens(words)))

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class Alignment:
    hits: int
    substitutions: int
    deletions: int
    insertions: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def n_reference(self) -> int:
        return self.hits + self.substitutions + self.deletions


def align_words(reference: Sequence[str], hypothesis: Sequence[str]) -> Alignment:
    """Unit-cost Levenshtein alignment.

    Among minimum-cost alignments the one with the most hits is chosen, so
    the intelligibility count never depends on arbitrary tie-breaking.
    """
    ref, hyp = list(reference), list(hypothesis)
    n, m = len(ref), len(hyp)
    # cell = (cost, -hits, subs, dels, ins); tuple order gives the preference
    prev = [(j, 0, 0, 0, j) for j in range(m + 1)]
    for i in range(1, n + 1):
        cur = [(i, 0, 0, i, 0)]
        for j in range(1, m + 1):
            c, h, s, d, ins = prev[j - 1]
            if ref[i - 1] == hyp[j - 1]:
                diag = (c, h - 1, s, d, ins)
            else:
                diag = (c + 1, h, s + 1, d, ins)
            c, h, s, d, ins = prev[j]
            up = (c + 1, h, s, d + 1, ins)
            c, h, s, d, ins = cur[j - 1]
            left = (c + 1, h, s, d, ins + 1)
            cur.append(min(diag, up, left))
        prev = cur
    _, neg_hits, s, d, ins = prev[m]
    return Alignment(-neg_hits, s, d, ins)


def _words(t) -> list[str]:
    return list(t.words) if isinstance(t, Transcript) else normalize_tokens(t)


def word_error_rate(reference, hypothesis) -> float:
    """100 * (S + D + I) / N for one utterance."""
    ref = _words(reference)
    if not ref:
        raise ValueError("reference transcript is empty")
    return 100.0 * align_words(ref, _words(hypothesis)).errors / len(ref)


def intelligibility_score(reference, recognized) -> float:
    """Percentage of reference words recognized correctly; insertions do not count against it."""
    ref = _words(reference)
    if not ref:
        raise ValueError("reference transcript is empty")
    return 100.0 * align_words(ref, _words(recognized)).hits / len(ref)


@dataclass(frozen=True)
class MosSummary:
    mean: float
    half_width: float
    n: int


def mos_aggregate(ratings: Iterable[int]) -> MosSummary:
    """Mean opinion score with a normal-approximation 95 % half-width, 1.96 * s / sqrt(n).

    ``s`` is the sample standard deviation; a single rating has half-width 0.
    """
    values = list(ratings)
    if not values:
        raise ValueError("no ratings to aggregate")
    for r in values:
        if isinstance(r, bool) or not float(r).is_integer() or not 1 <= r <= 5:
            raise ValueError(f"rating {r!r} is outside the 1..5 integer scale")
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return MosSummary(mean, 0.0, n)
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return MosSummary(mean, 1.96 * math.sqrt(var) / math.sqrt(n), n)
