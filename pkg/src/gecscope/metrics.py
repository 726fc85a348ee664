"""Per-sentence correction metrics and their aggregation.

Covers the locally computable scores (edit-distance score, GLEU, token
length difference, preservation F1) plus assembly of full metric vectors
from the grammar checker and the scorer sidecar, per-cell averaging and
macro-averaging over languages. Missing values are never imputed; they
lower the metric's coverage ratio instead.
"""

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import LANGUAGES, METRIC_IDS
from .tokenizer import word_tokenize

# Metrics computable without any external service.
OFFLINE_METRICS = ("levenshtein", "length_diff", "gleu")


def levenshtein_distance(a: str, b: str) -> int:
    """Character-level edit distance with unit insert/delete/substitute costs."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            current[j] = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            )
        previous = current
    return previous[-1]


def levenshtein_score(source: str, output: str) -> float:
    """1 / (1 + edit_distance); 1.0 means the output equals the input."""
    return 1.0 / (1.0 + levenshtein_distance(source, output))


def _ngram_counts(tokens: list[str], max_order: int = 4) -> Counter:
    counts: Counter = Counter()
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i:i + n])] += 1
    return counts


def gleu_score(source: str, output: str) -> float:
    """Sentence GLEU over n-gram orders 1-4.

    Reference is the tokenized input sentence, hypothesis the tokenized
    output; the score is matched-n-gram count over max(hypothesis count,
    reference count), i.e. min(precision, recall). Empty reference or
    hypothesis gives 0.
    """
    ref = _ngram_counts(word_tokenize(source))
    hyp = _ngram_counts(word_tokenize(output))
    tp = sum((ref & hyp).values())
    n_all = max(sum(hyp.values()), sum(ref.values()))
    return tp / n_all if n_all else 0.0


def length_diff_score(source: str, output: str) -> float:
    """1 - |token count difference| / max(token counts); both empty -> 1.0."""
    ci = len(word_tokenize(source))
    co = len(word_tokenize(output))
    if ci == 0 and co == 0:
        return 1.0
    biggest = max(ci, co)
    return 1.0 - abs(ci - co) / biggest


def drift_score(p_in: dict[str, float], p_out: dict[str, float], language: str) -> float:
    """P(language | output) - P(language | input)."""
    if language not in p_in or language not in p_out:
        raise KeyError(f"language {language!r} missing from probability map")
    return p_out[language] - p_in[language]


@dataclass(frozen=True)
class PreservationCounts:
    tp: int  # input returned verbatim, gold-correct
    fp: int  # input returned verbatim, gold-incorrect
    fn: int  # input changed, gold-correct

    @property
    def f1(self) -> float:
        if self.tp == 0:
            return 0.0
        return 2 * self.tp / (2 * self.tp + self.fp + self.fn)


def preservation_counts(pairs: list[tuple[bool, bool]]) -> PreservationCounts:
    """Count preservation events from (gold_correct, output_equals_input) pairs."""
    tp = sum(1 for gold, copied in pairs if gold and copied)
    fp = sum(1 for gold, copied in pairs if not gold and copied)
    fn = sum(1 for gold, copied in pairs if gold and not copied)
    return PreservationCounts(tp, fp, fn)


@dataclass
class MetricVector:
    """Metric values for one (model, prompt, language) cell.

    Per-sentence vectors leave ``preservation_f1`` unset; aggregated vectors
    carry it plus a per-metric coverage ratio (fraction of sentences whose
    value was available).
    """

    lt: float | None = None
    bertscore: float | None = None
    sbert: float | None = None
    bleurt: float | None = None
    levenshtein: float | None = None
    length_diff: float | None = None
    gleu: float | None = None
    drift: float | None = None
    preservation_f1: float | None = None
    coverage: dict[str, float] = field(default_factory=dict)

    def get(self, metric: str) -> float | None:
        if metric not in METRIC_IDS:
            raise KeyError(f"unknown metric {metric!r}")
        return getattr(self, metric)

    def set(self, metric: str, value: float | None) -> None:
        if metric not in METRIC_IDS:
            raise KeyError(f"unknown metric {metric!r}")
        setattr(self, metric, value)

    def incomplete_metrics(self) -> list[str]:
        return [m for m, c in sorted(self.coverage.items()) if c < 1.0]


def sentence_metrics(source_text: str, output_text: str) -> dict[str, float]:
    """The three locally computable per-sentence scores."""
    return {
        "levenshtein": levenshtein_score(source_text, output_text),
        "length_diff": length_diff_score(source_text, output_text),
        "gleu": gleu_score(source_text, output_text),
    }


def evaluate_cell(records, corrections, grammar_client=None, scorer_client=None) -> tuple[MetricVector, list]:
    """Score one (model, prompt, language) cell.

    ``records`` is the full corpus slice for the language; ``corrections``
    maps sentence id to the Correction for this cell and must cover every
    record. Absent clients (or client errors) leave the affected per-sentence
    cells missing; the aggregated vector averages what is present and records
    the coverage ratio per metric. Returns the aggregated vector and the
    per-sentence score rows for the cache.
    """
    if not records:
        raise ValueError("empty corpus slice")
    missing = [r.id for r in records if r.id not in corrections]
    if missing:
        raise ValueError(f"corrections do not cover the corpus slice; first missing: {missing[0]}")

    language = records[0].language
    per_sentence: list[tuple[str, str, float]] = []  # (sentence_id, metric, value)
    sums: dict[str, float] = {m: 0.0 for m in METRIC_IDS if m != "preservation_f1"}
    present: dict[str, int] = {m: 0 for m in sums}
    pairs: list[tuple[bool, bool]] = []

    lt_errors = _batch_check(grammar_client, records, corrections, language)
    semantic = _batch_semantic(scorer_client, records, corrections)
    drift = _batch_drift(scorer_client, records, corrections, language)

    for record in records:
        correction = corrections[record.id]
        output = correction.output_text
        values = sentence_metrics(record.text, output)
        values.update(semantic.get(record.id, {}))
        if record.id in lt_errors:
            values["lt"] = 1.0 / (1.0 + lt_errors[record.id])
        if record.id in drift:
            values["drift"] = drift[record.id]
        for metric, value in sorted(values.items()):
            sums[metric] += value
            present[metric] += 1
            per_sentence.append((record.id, metric, value))
        pairs.append((record.is_correct, output == record.text))

    total = len(records)
    vector = MetricVector()
    for metric in sums:
        vector.coverage[metric] = present[metric] / total
        if present[metric]:
            vector.set(metric, sums[metric] / present[metric])
    counts = preservation_counts(pairs)
    vector.preservation_f1 = counts.f1
    vector.coverage["preservation_f1"] = 1.0
    return vector, per_sentence


def _batch_check(grammar_client, records, corrections, language) -> dict[str, int]:
    if grammar_client is None:
        return {}
    out: dict[str, int] = {}
    for record in records:
        try:
            result = grammar_client.check(corrections[record.id].output_text, language)
        except Exception:
            continue  # cell stays missing, never a silent zero
        out[record.id] = result.num_errors
    return out


def _batch_semantic(scorer_client, records, corrections) -> dict[str, dict[str, float]]:
    if scorer_client is None:
        return {}
    pairs = [(r.text, corrections[r.id].output_text) for r in records]
    out: dict[str, dict[str, float]] = {}
    for metric in ("bertscore", "sbert", "bleurt"):
        try:
            scores = scorer_client.score(metric, pairs)
        except Exception:
            continue
        for record, score in zip(records, scores):
            out.setdefault(record.id, {})[metric] = score
    return out


def _batch_drift(scorer_client, records, corrections, language) -> dict[str, float]:
    if scorer_client is None:
        return {}
    texts_in = [r.text for r in records]
    texts_out = [corrections[r.id].output_text for r in records]
    try:
        probs_in = scorer_client.lid(texts_in, [language])
        probs_out = scorer_client.lid(texts_out, [language])
    except Exception:
        return {}
    return {
        r.id: drift_score(pi, po, language)
        for r, pi, po in zip(records, probs_in, probs_out)
    }


def macro_average(per_language: dict[str, MetricVector]) -> MetricVector:
    """Unweighted mean of the per-language vectors; all four languages required."""
    missing = [lang for lang in LANGUAGES if lang not in per_language]
    if missing:
        raise ValueError(f"macro average needs all languages; missing: {', '.join(missing)}")
    result = MetricVector()
    for metric in METRIC_IDS:
        values = [per_language[lang].get(metric) for lang in LANGUAGES]
        if all(v is not None for v in values):
            result.set(metric, sum(values) / len(values))
        coverages = [per_language[lang].coverage.get(metric) for lang in LANGUAGES]
        if all(c is not None for c in coverages):
            result.coverage[metric] = sum(coverages) / len(coverages)
    return result


# --- score cache (sentence level) and cell table (aggregated) files ---

SENTENCE_CACHE_HEADER = ["sentence_id", "model_id", "prompt_id", "metric", "value"]
CELL_TABLE_HEADER = ["model_id", "prompt_id", "language", "metric", "value", "coverage"]


def write_sentence_cache(path: str | Path, rows) -> None:
    """rows: iterable of (sentence_id, model_id, prompt_id, metric, value)."""
    ordered = sorted(rows, key=lambda r: (r[1], r[2], r[0], r[3]))
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SENTENCE_CACHE_HEADER)
        for sentence_id, model_id, prompt_id, metric, value in ordered:
            writer.writerow([sentence_id, model_id, prompt_id, metric, repr(float(value))])


def read_sentence_cache(path: str | Path) -> list[tuple[str, str, str, str, float]]:
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != SENTENCE_CACHE_HEADER:
            raise ValueError(f"unexpected score cache header: {header}")
        return [(r[0], r[1], r[2], r[3], float(r[4])) for r in reader]


def write_cell_table(path: str | Path, cells: dict[tuple[str, str, str], MetricVector]) -> None:
    """cells: (model_id, prompt_id, language) -> aggregated MetricVector."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CELL_TABLE_HEADER)
        for key in sorted(cells):
            vector = cells[key]
            model_id, prompt_id, language = key
            for metric in METRIC_IDS:
                value = vector.get(metric)
                if value is None:
                    continue
                coverage = vector.coverage.get(metric, 1.0)
                writer.writerow([model_id, prompt_id, language, metric, repr(float(value)), repr(float(coverage))])


def read_cell_table(path: str | Path) -> dict[tuple[str, str, str], MetricVector]:
    cells: dict[tuple[str, str, str], MetricVector] = {}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != CELL_TABLE_HEADER:
            raise ValueError(f"unexpected cell table header: {header}")
        for model_id, prompt_id, language, metric, value, coverage in reader:
            vector = cells.setdefault((model_id, prompt_id, language), MetricVector())
            vector.set(metric, float(value))
            vector.coverage[metric] = float(coverage)
    return cells


