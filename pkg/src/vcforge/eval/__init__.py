"""Evaluation harness: WER / intelligibility via a pluggable recognizer, MOS aggregation."""

from .asr import AsrClient, AsrError, ExternalAsr, MockAsr, fingerprint
from .metrics import (
    Alignment,
    MosSummary,
    Transcript,
    align_words,
    intelligibility_score,
    mos_aggregate,
    normalize_tokens,
    word_error_rate,
)
from .report import (
    CANONICAL_SYSTEMS,
    DetailRow,
    EvalReport,
    SystemRow,
    SystemSpec,
    evaluate_corpus,
    order_systems,
    render_table,
    report_rows,
    write_details,
)

__all__ = [
    "Alignment",
    "AsrClient",
    "AsrError",
    "CANONICAL_SYSTEMS",
    "DetailRow",
    "EvalReport",
    "ExternalAsr",
    "MockAsr",
    "MosSummary",
    "SystemRow",
    "SystemSpec",
    "Transcript",
    "align_words",
    "evaluate_corpus",
    "fingerprint",
    "intelligibility_score",
    "mos_aggregate",
    "normalize_tokens",
    "order_systems",
    "render_table",
    "report_rows",
    "word_error_rate",
    "write_details",
]
