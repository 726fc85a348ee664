"""Report surfaces: prompt selection, language support, recurring-output
patterns, run stability and deterministic CSV/markdown table emission.

All emission is deterministic for a given score set: rows sort by model,
language and metric ids, and displayed numbers use 3-decimal half-up
rounding while the underlying caches keep full precision.
"""

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

from . import LANGUAGES, METRIC_IDS
from .metrics import MetricVector
from .ranking import GlobalRanking, RankTable
from .reportfmt import format_display

import yaml


# --- prompt selection -------------------------------------------------------

def prompt_selection_table(cells: dict[tuple[str, str], MetricVector],
                           drift_winner: str = "nearest_zero"):
    """Winner counts over the (language x metric) scenarios.

    ``cells`` maps (prompt_id, language) to the metric vector averaged over
    models. Every prompt/language/metric cell must be present. The winner of
    a scenario is the prompt with the highest value; for the drift metric the
    published convention judges the value closest to zero best, switchable to
    plain highest via ``drift_winner="highest"``. Ties credit every tied
    prompt. Returns (rows, win_counts) where rows is the table in
    prompt-within-language order.
    """
    if drift_winner not in ("nearest_zero", "highest"):
        raise ValueError(f"unknown drift_winner mode {drift_winner!r}")
    languages = sorted({lang for _, lang in cells})
    prompts = sorted({pid for pid, _ in cells})
    for lang in languages:
        for pid in prompts:
            vector = cells.get((pid, lang))
            if vector is None:
                raise ValueError(f"missing prompt-selection cell ({pid}, {lang})")
            for metric in METRIC_IDS:
                if vector.get(metric) is None:
                    raise ValueError(f"missing metric {metric} in cell ({pid}, {lang})")
    wins = {pid: 0 for pid in prompts}
    for lang in languages:
        for metric in METRIC_IDS:
            values = {pid: cells[(pid, lang)].get(metric) for pid in prompts}
            if metric == "drift" and drift_winner == "nearest_zero":
                best = min(abs(v) for v in values.values())
                winners = [pid for pid, v in values.items() if abs(v) == best]
            else:
                best = max(values.values())
                winners = [pid for pid, v in values.items() if v == best]
            for pid in winners:
                wins[pid] += 1
    rows = [
        (pid, lang, [cells[(pid, lang)].get(metric) for metric in METRIC_IDS])
        for lang in languages
        for pid in prompts
    ]
    return rows, wins


# --- language support -------------------------------------------------------

def language_support_verdict(drift_by_language: dict[str, dict[str, float]],
                             threshold: float = -0.05):
    """Per-model language support from mean drift.

    ``drift_by_language`` maps model -> {language: mean drift}. A language is
    supported when its mean drift is at or above ``threshold``; a model
    supports all languages when every listed language passes. Returns
    model -> {"languages": {lang: bool}, "supports_all": bool}.
    """
    verdicts = {}
    for model in sorted(drift_by_language):
        flags = {
            lang: drift_by_language[model][lang] >= threshold
            for lang in sorted(drift_by_language[model])
        }
        verdicts[model] = {"languages": flags, "supports_all": all(flags.values())}
    return verdicts


# --- recurring output patterns ----------------------------------------------

@dataclass(frozen=True)
class PatternRule:
    pattern: str
    language: str = "any"
    model: str = "any"
    match_mode: str = "substring"

    def __post_init__(self):
        if not self.pattern:
            raise ValueError("pattern must be non-empty")
        if self.match_mode not in ("substring", "prefix"):
            raise ValueError(f"unknown match_mode {self.match_mode!r}")

    def matches(self, correction) -> bool:
        if self.language != "any" and correction.language != self.language:
            return False
        if self.model != "any" and correction.model_id != self.model:
            return False
        text = correction.output_text.lower()
        needle = self.pattern.lower()
        if self.match_mode == "prefix":
            return text.startswith(needle)
        return needle in text


def load_pattern_rules(path: str | Path) -> list[PatternRule]:
    with open(path, encoding="utf-8") as handle:
        raw = yaml.safe_load(handle) or []
    rules = []
    for entry in raw:
        rules.append(
            PatternRule(
                pattern=entry["pattern"],
                language=entry.get("language", "any"),
                model=entry.get("model", "any"),
                match_mode=entry.get("match_mode", "substring"),
            )
        )
    return rules


def pattern_counts(corrections, rules: list[PatternRule]) -> list[tuple[PatternRule, int]]:
    return [(rule, sum(1 for c in corrections if rule.matches(c))) for rule in rules]


# --- run stability ----------------------------------------------------------

@dataclass(frozen=True)
class StabilityCell:
    values: tuple[float, ...]
    max_abs_deviation: float


@dataclass(frozen=True)
class StabilityReport:
    cells: dict[tuple[str, str, str, str], StabilityCell] = field(default_factory=dict)


def stability_report(runs: list[dict[tuple[str, str, str], MetricVector]]) -> StabilityReport:
    """Max absolute deviation per (model, prompt, language, metric) across runs."""
    if len(runs) < 2:
        raise ValueError("stability needs at least two runs")
    keysets = [
        {(cell, metric) for cell in run for metric in METRIC_IDS if run[cell].get(metric) is not None}
        for run in runs
    ]
    for i, keys in enumerate(keysets[1:], start=2):
        if keys != keysets[0]:
            diff = sorted(keys ^ keysets[0])[:3]
            raise ValueError(f"run {i} coverage differs from run 1 (e.g. {diff})")
    cells = {}
    for (model_id, prompt_id, language), metric in sorted(keysets[0]):
        values = tuple(run[(model_id, prompt_id, language)].get(metric) for run in runs)
        cells[(model_id, prompt_id, language, metric)] = StabilityCell(
            values=values, max_abs_deviation=max(values) - min(values)
        )
    return StabilityReport(cells)


# --- table emission ---------------------------------------------------------

def score_table_csv(vectors: dict[str, MetricVector]) -> str:
    """Model-per-row score table; header is exactly the nine metric ids."""
    if not vectors:
        raise ValueError("refusing to emit an empty score table")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", *METRIC_IDS])
    for model in sorted(vectors):
        row = [model]
        for metric in METRIC_IDS:
            value = vectors[model].get(metric)
            row.append("" if value is None else format_display(value))
        writer.writerow(row)
    return buf.getvalue()


def rank_table_csv(tables: dict[str, RankTable], global_ranking: GlobalRanking | None = None) -> str:
    if not tables:
        raise ValueError("refusing to emit an empty rank table")
    metrics = [m for m in METRIC_IDS if m in tables] + [m for m in tables if m not in METRIC_IDS]
    models = sorted(next(iter(tables.values())).ranks)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["model", *metrics]
    if global_ranking is not None:
        header += ["global_rank", "global_points"]
    writer.writerow(header)
    for model in models:
        row = [model] + [tables[m].ranks[model] for m in metrics]
        if global_ranking is not None:
            row += [global_ranking.ranks[model], format_display(global_ranking.borda_points[model])]
        writer.writerow(row)
    return buf.getvalue()


def prompt_selection_csv(rows, wins) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["prompt", "language", *METRIC_IDS])
    for pid, lang, values in rows:
        writer.writerow([pid, lang, *[format_display(v) for v in values]])
    writer.writerow([])
    writer.writerow(["prompt", "wins"])
    for pid in sorted(wins):
        writer.writerow([pid, wins[pid]])
    return buf.getvalue()


def patterns_csv(counts: list[tuple[PatternRule, int]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["pattern", "language", "model", "match_mode", "count"])
    for rule, count in counts:
        writer.writerow([rule.pattern, rule.language, rule.model, rule.match_mode, count])
    return buf.getvalue()


def stability_csv(report: StabilityReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model_id", "prompt_id", "language", "metric", "max_abs_deviation", "values"])
    for key in sorted(report.cells):
        cell = report.cells[key]
        writer.writerow([*key, repr(cell.max_abs_deviation), ";".join(repr(v) for v in cell.values)])
    return buf.getvalue()


def markdown_digest(per_language: dict[str, dict[str, MetricVector]],
                    macro: dict[str, MetricVector],
                    global_rankings: dict[str, GlobalRanking],
                    verdicts=None, wins=None) -> str:
    """One human-readable digest tying the emitted tables together."""
    lines = ["# Evaluation digest", ""]
    if wins:
        total = sum(1 for _ in LANGUAGES) * len(METRIC_IDS)
        lines.append("## Prompt selection")
        lines.append("")
        for pid in sorted(wins):
            lines.append(f"- {pid}: best in {wins[pid]}/{total} scenarios")
        lines.append("")
    lines.append("## Macro-averaged scores")
    lines.append("")
    lines.extend(_markdown_score_table(macro))
    for lang in LANGUAGES:
        if lang in per_language:
            lines.append(f"## Scores [{lang}]")
            lines.append("")
            lines.extend(_markdown_score_table(per_language[lang]))
    if global_rankings:
        lines.append("## Global ranking")
        lines.append("")
        lines.append("| model | " + " | ".join(sorted(global_rankings)) + " |")
        lines.append("|---" * (len(global_rankings) + 1) + "|")
        models = sorted(next(iter(global_rankings.values())).ranks)
        overall = global_rankings.get("overall")
        if overall is not None:
            models = sorted(models, key=lambda m: (overall.ranks[m], m))
        for model in models:
            cells = " | ".join(str(global_rankings[s].ranks[model]) for s in sorted(global_rankings))
            lines.append(f"| {model} | {cells} |")
        lines.append("")
    if verdicts:
        lines.append("## Language support")
        lines.append("")
        for model in sorted(verdicts):
            entry = verdicts[model]
            langs = ", ".join(k for k, ok in entry["languages"].items() if ok) or "none"
            lines.append(f"- {model}: {'all languages' if entry['supports_all'] else langs}")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def _markdown_score_table(vectors: dict[str, MetricVector]) -> list[str]:
    lines = ["| model | " + " | ".join(METRIC_IDS) + " |", "|---" * (len(METRIC_IDS) + 1) + "|"]
    for model in sorted(vectors):
        row = []
        for metric in METRIC_IDS:
            value = vectors[model].get(metric)
            row.append("" if value is None else format_display(value))
        lines.append(f"| {model} | " + " | ".join(row) + " |")
    lines.append("")
    return lines
