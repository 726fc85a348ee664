"""MultiGED-style corpus parsing, sentence labeling and summaries.

Input files are UTF-8 text with one token per line as ``token<TAB>label``
and blank lines separating sentences. A sentence counts as correct only
when every one of its tokens is labeled correct.
"""

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

from . import normalize_language
from .detok import detokenize

DEFAULT_LABELS = {"correct": "c", "incorrect": "i"}


class ParseError(ValueError):
    """Malformed corpus input, carrying the offending line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class TokenRow:
    token: str
    correct: bool


@dataclass(frozen=True)
class SentenceRecord:
    id: str
    language: str
    tokens: tuple[TokenRow, ...]
    text: str
    is_correct: bool


@dataclass(frozen=True)
class SummaryRow:
    language: str
    total_sentences: int
    correct_sentences: int
    mean_tokens: float
    stddev_tokens: float


@dataclass(frozen=True)
class CorpusSummary:
    rows: tuple[SummaryRow, ...]  # per-language rows followed by the TOTAL row

    @property
    def total(self) -> SummaryRow:
        return self.rows[-1]


def parse_multiged(stream, language: str, labels: dict[str, str] | None = None) -> list[SentenceRecord]:
    """Parse a token/label stream into sentence records.

    ``stream`` is an iterable of lines (an open file or a list of strings).
    Sentence ids are file-order indices; an empty stream yields an empty list.
    """
    lang = normalize_language(language)
    scheme = labels or DEFAULT_LABELS
    correct_label = scheme["correct"]
    incorrect_label = scheme["incorrect"]

    records: list[SentenceRecord] = []
    pending: list[TokenRow] = []

    def flush() -> None:
        if not pending:
            return
        idx = len(records)
        rows = tuple(pending)
        text = detokenize([r.token for r in rows], lang)
        records.append(
            SentenceRecord(
                id=f"{lang}-{idx:05d}",
                language=lang,
                tokens=rows,
                text=text,
                is_correct=all(r.correct for r in rows),
            )
        )
        pending.clear()

    for line_number, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush()
            continue
        if "\t" not in line:
            raise ParseError("expected token<TAB>label", line_number)
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(f"expected 2 tab-separated fields, got {len(fields)}", line_number)
        token, label = fields[0].strip(), fields[1].strip()
        if not token:
            raise ParseError("empty token", line_number)
        if label == correct_label:
            pending.append(TokenRow(token, True))
        elif label == incorrect_label:
            pending.append(TokenRow(token, False))
        else:
            raise ParseError(f"unknown label {label!r} (scheme: {scheme})", line_number)
    flush()
    return records


def load_corpus_file(path: str | Path, language: str, labels: dict[str, str] | None = None) -> list[SentenceRecord]:
    with open(path, encoding="utf-8-sig") as handle:
        return parse_multiged(handle, language, labels)


def summarize(corpora: dict[str, list[SentenceRecord]], population: bool = True) -> CorpusSummary:
    """Per-language sentence counts and token statistics plus a pooled TOTAL row.

    ``population`` selects population standard deviation (divisor N); pass
    False for the sample estimator (divisor N-1).
    """
    if not corpora or all(not records for records in corpora.values()):
        raise ValueError("empty corpus: nothing to summarize")
    rows = []
    pooled: list[int] = []
    pooled_correct = 0
    for lang in sorted(corpora):
        records = corpora[lang]
        if not records:
            raise ValueError(f"no sentences for language {lang!r}")
        counts = [len(r.tokens) for r in records]
        correct = sum(1 for r in records if r.is_correct)
        rows.append(
            SummaryRow(lang, len(records), correct, _mean(counts), _stddev(counts, population))
        )
        pooled.extend(counts)
        pooled_correct += correct
    rows.append(
        SummaryRow("TOTAL", len(pooled), pooled_correct, _mean(pooled), _stddev(pooled, population))
    )
    return CorpusSummary(tuple(rows))


def _mean(values: list[int]) -> float:
    return sum(values) / len(values)


def _stddev(values: list[int], population: bool) -> float:
    n = len(values)
    if n == 1 or (not population and n < 2):
        return 0.0
    mu = _mean(values)
    ss = sum((v - mu) ** 2 for v in values)
    return math.sqrt(ss / (n if population else n - 1))


def summary_to_csv(summary: CorpusSummary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["language", "total_sentences", "correct_sentences", "mean_tokens", "stddev_tokens"])
    for row in summary.rows:
        writer.writerow(
            [row.language, row.total_sentences, row.correct_sentences,
             f"{row.mean_tokens:.2f}", f"{row.stddev_tokens:.2f}"]
        )
    return buf.getvalue()


def summary_to_text(summary: CorpusSummary) -> str:
    """Aligned plain-text rendering of the summary table."""
    header = ("language", "total", "correct", "tokens/sent")
    body = [
        (row.language, str(row.total_sentences), str(row.correct_sentences),
         f"{row.mean_tokens:.2f} (+/- {row.stddev_tokens:.2f})")
        for row in summary.rows
    ]
    widths = [max(len(col[i]) for col in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(col.ljust(widths[i]) for i, col in enumerate(r)).rstrip() for r in [header, *body]]
    return "\n".join(lines) + "\n"
