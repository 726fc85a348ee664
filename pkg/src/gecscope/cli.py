"""Pipeline orchestration: one subcommand per stage.

Stages form a DAG (summarize / generate -> score -> rank -> report), are
restartable, and write only under the configured output directory. Every
stage validates its upstream artifact and names the stage to run when it
is missing. Exit code 0 means full success.
"""

import argparse
import sys
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import LANGUAGES, METRIC_IDS, __version__
from .config import ConfigError, RunConfig, load_config, validate_paths, write_manifest
from .corpus import load_corpus_file, summarize, summary_to_csv, summary_to_text
from .gateway import (
    ChatCompletionsClient,
    CorrectionsCache,
    CorrectionsLoadError,
    generate as generate_one,
    load_corrections,
    write_corrections,
)
from .grammar import LanguageToolClient
from .metrics import (
    MetricVector,
    evaluate_cell,
    macro_average,
    read_cell_table,
    write_cell_table,
    write_sentence_cache,
)
from .prompts import PromptCatalog
from .ranking import overall_ranking, rank_by_metric, two_step_global_rank
from .reporting import (
    language_support_verdict,
    load_pattern_rules,
    markdown_digest,
    pattern_counts,
    patterns_csv,
    prompt_selection_csv,
    prompt_selection_table,
    rank_table_csv,
    score_table_csv,
    stability_csv,
    stability_report,
)
from .scorer_client import ScorerClient, ScorerError


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        _apply_overrides(config, args)
        return args.handler(config, args)
    except (ConfigError, CorrectionsLoadError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gecscope", description=__doc__)
    parser.add_argument("--version", action="version", version=f"gecscope {__version__}")
    sub = parser.add_subparsers(dest="stage", required=True)

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="run configuration YAML")
        p.add_argument("--out", help="override the configured output directory")
        p.add_argument("--languages", help="comma-separated language subset (e.g. en,de)")
        p.add_argument("--dry-run", action="store_true", help="validate config and connectivity only")
        p.set_defaults(handler=handler)
        return p

    add("summarize", stage_summarize, "parse corpora and write the dataset summary")

    p = add("generate", stage_generate, "query model endpoints and cache corrections")
    p.add_argument("--models", help="comma-separated model id subset")
    p.add_argument("--prompts", help="comma-separated prompt id subset (e.g. P3)")

    p = add("score", stage_score, "compute all metrics over a corrections set")
    p.add_argument("--offline-corrections", help="corrections replay file (JSONL)")

    p = add("rank", stage_rank, "per-metric ranks and the global Borda ranking")
    p.add_argument("--metrics-csv", help="hand-authored per-model metric table to rank directly")
    p.add_argument("--prompt", default="P3", help="prompt id to rank on (default P3)")

    p = add("report", stage_report, "emit all report tables and the markdown digest")
    p.add_argument("--offline-corrections", help="corrections replay file for pattern counts")
    p.add_argument("--prompt", default="P3", help="prompt id for rank/score tables (default P3)")
    p.add_argument("--runs", nargs="*", help="additional cell tables for the stability report")

    p = add("stability", stage_stability, "max per-cell deviation across repeated runs")
    p.add_argument("--runs", nargs="+", required=True, help="two or more cell-table CSVs")

    p = add("patterns", stage_patterns, "count recurring output patterns")
    p.add_argument("--offline-corrections", help="corrections replay file (JSONL)")
    p.add_argument("--rules", help="pattern rules YAML (overrides config)")

    return parser


def _apply_overrides(config: RunConfig, args) -> None:
    if getattr(args, "out", None):
        config.output_dir = Path(args.out)
    if getattr(args, "languages", None):
        langs = tuple(token.strip().lower() for token in args.languages.split(",") if token.strip())
        unknown = [lang for lang in langs if lang not in LANGUAGES]
        if unknown:
            raise ConfigError(f"unsupported language(s): {', '.join(unknown)}")
        config.languages = langs


def _ensure_out(config: RunConfig) -> Path:
    config.output_dir.mkdir(parents=True, exist_ok=True)
    return config.output_dir


def _load_corpora(config: RunConfig):
    problems = validate_paths(config)
    if problems:
        raise ConfigError("; ".join(problems))
    return {
        lang: load_corpus_file(config.corpus_paths[lang], lang, config.label_scheme)
        for lang in config.languages
    }


def _dry_run_report(config: RunConfig, need_corpus: bool = True) -> int:
    problems = validate_paths(config, need_corpus=need_corpus)
    for url, name in ((config.checker_url, "checker"), (config.scorer_url, "scorer")):
        if url:
            status = "reachable" if _probe(url) else "UNREACHABLE"
            print(f"{name}: {url} ({status})")
    if problems:
        for problem in problems:
            print(f"invalid: {problem}", file=sys.stderr)
        return 1
    print("config valid; no work performed (--dry-run)")
    return 0


def _probe(url: str) -> bool:
    import requests

    try:
        requests.get(url, timeout=5)
        return True
    except requests.RequestException:
        return False


# --- stages -----------------------------------------------------------------

def stage_summarize(config: RunConfig, args) -> int:
    if args.dry_run:
        return _dry_run_report(config)
    corpora = _load_corpora(config)
    summary = summarize(corpora, population=config.population_stddev)
    out = _ensure_out(config)
    (out / "corpus_summary.csv").write_text(summary_to_csv(summary), encoding="utf-8")
    (out / "corpus_summary.txt").write_text(summary_to_text(summary), encoding="utf-8")
    write_manifest(out, config)
    print(summary_to_text(summary), end="")
    return 0


def stage_generate(config: RunConfig, args) -> int:
    if args.dry_run:
        return _dry_run_report(config)
    if not config.models:
        raise ConfigError("no model endpoints configured; nothing to generate")
    corpora = _load_corpora(config)
    catalog = PromptCatalog.load(config.prompt_dir, config.languages)
    model_ids = set(args.models.split(",")) if args.models else None
    prompt_ids = tuple(args.prompts.split(",")) if args.prompts else config.prompts
    out = _ensure_out(config)
    cache = CorrectionsCache(out / "corrections_cache.jsonl")

    jobs = []
    for model in config.models:
        if model_ids is not None and model.id not in model_ids:
            continue
        client = ChatCompletionsClient(model.endpoint, api_token=config.api_token)
        for prompt_id in prompt_ids:
            for lang in config.languages:
                template = catalog.get(prompt_id, lang)
                for record in corpora[lang]:
                    jobs.append((record, template, model.id, client))

    def run(job):
        record, template, model_id, client = job
        try:
            generate_one(record, template, model_id, client, config.generation, cache)
            return None
        except Exception as exc:
            return f"{model_id}/{template.prompt_id}/{record.id}: {exc}"

    failures = 0
    with ThreadPoolExecutor(max_workers=config.request_concurrency) as executor:
        for error in executor.map(run, jobs):
            if error is not None:
                failures += 1
                print(f"error: {error}", file=sys.stderr)
    corrections = cache.corrections()
    write_corrections(out / "corrections.jsonl", corrections)
    write_manifest(out, config)
    print(f"generated {len(corrections)} corrections ({len(jobs)} requested)")
    return 0 if failures == 0 else 1


def _corrections_path(config: RunConfig, args) -> Path:
    override = getattr(args, "offline_corrections", None)
    if override:
        path = Path(override)
        if not path.is_file():
            raise ConfigError(f"corrections file not found: {path}")
        return path
    path = config.output_dir / "corrections.jsonl"
    if not path.is_file():
        raise ConfigError(
            f"corrections file not found: {path}; run the generate stage first "
            "or pass --offline-corrections PATH"
        )
    return path


def stage_score(config: RunConfig, args) -> int:
    if args.dry_run:
        return _dry_run_report(config)
    corpora = _load_corpora(config)
    known_ids = {record.id for records in corpora.values() for record in records}
    corrections = load_corrections(
        _corrections_path(config, args),
        known_ids=known_ids,
        warn=lambda msg: print(f"warning: {msg}", file=sys.stderr),
    )
    grammar_client, scorer_client, scorer_versions = _build_clients(config)

    groups = defaultdict(dict)
    for correction in corrections:
        groups[(correction.model_id, correction.prompt_id, correction.language)][
            correction.sentence_id
        ] = correction

    cells: dict[tuple[str, str, str], MetricVector] = {}
    sentence_rows = []
    for (model_id, prompt_id, language), by_id in sorted(groups.items()):
        records = corpora.get(language)
        if records is None:
            continue
        vector, per_sentence = evaluate_cell(records, by_id, grammar_client, scorer_client)
        cells[(model_id, prompt_id, language)] = vector
        sentence_rows.extend(
            (sentence_id, model_id, prompt_id, metric, value)
            for sentence_id, metric, value in per_sentence
        )
        incomplete = vector.incomplete_metrics()
        if incomplete:
            flags = ", ".join(f"{m}={vector.coverage[m]:.2f}" for m in incomplete)
            print(f"note: cell ({model_id}, {prompt_id}, {language}) incomplete: {flags}", file=sys.stderr)

    if not cells:
        raise ConfigError("no corrections matched the configured languages; nothing to score")
    out = _ensure_out(config)
    write_sentence_cache(out / "scores_sentences.csv", sentence_rows)
    write_cell_table(out / "scores_cells.csv", cells)
    checker_version = grammar_client.server_version if grammar_client else None
    write_manifest(out, config, checker_version=checker_version, scorer_versions=scorer_versions)
    print(f"scored {len(cells)} cells over {len(corrections)} corrections")
    return 0


def _build_clients(config: RunConfig):
    grammar_client = None
    scorer_client = None
    scorer_versions = {}
    if config.checker_url:
        client = LanguageToolClient(config.checker_url, config.checker_language_codes)
        try:
            client.check("", config.languages[0])
            grammar_client = client
            pin = config.checker_version_pin
            if pin and client.server_version and client.server_version != pin:
                print(
                    f"warning: checker reports version {client.server_version}, "
                    f"config pins {pin}; scores may not be comparable across runs",
                    file=sys.stderr,
                )
        except Exception as exc:
            print(f"warning: checker unavailable, lt cells will be missing: {exc}", file=sys.stderr)
    if config.scorer_url:
        client = ScorerClient(config.scorer_url)
        try:
            health = client.health()
            scorer_versions = health.get("model_versions", {})
            scorer_client = client
        except ScorerError as exc:
            print(f"warning: scorer unavailable, semantic/drift cells will be missing: {exc}", file=sys.stderr)
    return grammar_client, scorer_client, scorer_versions


def _cells_path(config: RunConfig) -> Path:
    path = config.output_dir / "scores_cells.csv"
    if not path.is_file():
        raise ConfigError(f"cell table not found: {path}; run the score stage first")
    return path


def _read_metrics_csv(path: str | Path) -> dict[str, MetricVector]:
    import csv

    vectors: dict[str, MetricVector] = {}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or "model" not in reader.fieldnames:
            raise ConfigError(f"{path}: expected a 'model' column")
        for row in reader:
            vector = MetricVector()
            for metric in METRIC_IDS:
                raw = (row.get(metric) or "").strip()
                if raw:
                    vector.set(metric, float(raw))
                    vector.coverage[metric] = 1.0
            vectors[row["model"]] = vector
    if not vectors:
        raise ConfigError(f"{path}: no rows")
    return vectors


def _vectors_by_language(cells, prompt_id: str, languages) -> dict[str, dict[str, MetricVector]]:
    per_language: dict[str, dict[str, MetricVector]] = defaultdict(dict)
    for (model_id, pid, language), vector in cells.items():
        if pid == prompt_id and language in languages:
            per_language[language][model_id] = vector
    return dict(per_language)


def stage_rank(config: RunConfig, args) -> int:
    if args.dry_run:
        return _dry_run_report(config, need_corpus=False)
    out = _ensure_out(config)
    round_to = config.display_decimals if config.rank_on_rounded else None

    if args.metrics_csv:
        vectors = _read_metrics_csv(args.metrics_csv)
        _emit_rank_tables(out, "custom", vectors, round_to)
        print(f"ranked {len(vectors)} models from {args.metrics_csv}")
        return 0

    cells = read_cell_table(_cells_path(config))
    per_language = _vectors_by_language(cells, args.prompt, config.languages)
    missing = [lang for lang in config.languages if lang not in per_language]
    if missing:
        raise ConfigError(
            f"no scored cells for prompt {args.prompt} in language(s): {', '.join(missing)}"
        )
    for lang in config.languages:
        _emit_rank_tables(out, lang, per_language[lang], round_to)
    if set(config.languages) == set(LANGUAGES):
        models = sorted(per_language[LANGUAGES[0]])
        macro = {
            model: macro_average({lang: per_language[lang][model] for lang in LANGUAGES})
            for model in models
        }
        _emit_rank_tables(out, "macro", macro, round_to)
        overall = overall_ranking(per_language, mode=config.overall_mode, round_to=round_to)
        (out / "ranks_overall.csv").write_text(_overall_csv(overall), encoding="utf-8")
    print("rank tables written")
    return 0


def _overall_csv(overall) -> str:
    import csv as _csv
    import io

    buf = io.StringIO()
    writer = _csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "global_rank", "global_points"])
    for model in sorted(overall.ranks, key=lambda m: (overall.ranks[m], m)):
        writer.writerow([model, overall.ranks[model], repr(overall.borda_points[model])])
    return buf.getvalue()


def _emit_rank_tables(out: Path, scope: str, vectors: dict[str, MetricVector], round_to) -> None:
    tables = {}
    for metric in METRIC_IDS:
        values = {m: v.get(metric) for m, v in vectors.items()}
        if any(value is None for value in values.values()):
            continue
        tables[metric] = rank_by_metric(values, metric, round_to)
    global_ranking = None
    try:
        global_ranking = two_step_global_rank(vectors, scope=scope, round_to=round_to)
    except ValueError as exc:
        print(f"note: no global ranking for {scope}: {exc}", file=sys.stderr)
    if not tables:
        raise ConfigError(f"no complete metric columns to rank for scope {scope}")
    (out / f"ranks_{scope}.csv").write_text(rank_table_csv(tables, global_ranking), encoding="utf-8")


def stage_report(config: RunConfig, args) -> int:
    if args.dry_run:
        return _dry_run_report(config, need_corpus=False)
    out = _ensure_out(config)
    cells = read_cell_table(_cells_path(config))
    round_to = config.display_decimals if config.rank_on_rounded else None

    per_language = _vectors_by_language(cells, args.prompt, config.languages)
    for lang in config.languages:
        if lang in per_language:
            (out / f"scores_{lang}.csv").write_text(score_table_csv(per_language[lang]), encoding="utf-8")

    macro = {}
    global_rankings = {}
    if set(config.languages) == set(LANGUAGES) and all(lang in per_language for lang in LANGUAGES):
        models = sorted(per_language[LANGUAGES[0]])
        macro = {
            model: macro_average({lang: per_language[lang][model] for lang in LANGUAGES})
            for model in models
        }
        (out / "scores_macro.csv").write_text(score_table_csv(macro), encoding="utf-8")
        for lang in LANGUAGES:
            _emit_rank_tables(out, lang, per_language[lang], round_to)
        _emit_rank_tables(out, "macro", macro, round_to)
        overall = overall_ranking(per_language, mode=config.overall_mode, round_to=round_to)
        (out / "ranks_overall.csv").write_text(_overall_csv(overall), encoding="utf-8")
        for lang in LANGUAGES:
            try:
                global_rankings[lang] = two_step_global_rank(per_language[lang], scope=lang, round_to=round_to)
            except ValueError:
                pass
        global_rankings["overall"] = overall

    verdicts = _drift_verdicts(per_language, config)
    wins = _emit_prompt_selection(out, cells, config)
    _emit_patterns(out, config, args)
    _emit_stability(out, getattr(args, "runs", None))

    digest = markdown_digest(per_language, macro, global_rankings, verdicts, wins)
    (out / "digest.md").write_text(digest, encoding="utf-8")
    write_manifest(out, config)
    print(f"report written to {out}")
    return 0


def _drift_verdicts(per_language, config):
    drift_by_model: dict[str, dict[str, float]] = defaultdict(dict)
    for lang, vectors in per_language.items():
        for model, vector in vectors.items():
            if vector.drift is not None:
                drift_by_model[model][lang] = vector.drift
    complete = {
        model: drifts
        for model, drifts in drift_by_model.items()
        if set(drifts) == set(config.languages)
    }
    if not complete:
        return None
    return language_support_verdict(complete, threshold=config.drift_threshold)


def _emit_prompt_selection(out: Path, cells, config):
    by_prompt_lang: dict[tuple[str, str], list[MetricVector]] = defaultdict(list)
    for (model_id, prompt_id, language), vector in cells.items():
        by_prompt_lang[(prompt_id, language)].append(vector)
    averaged = {}
    for key, vectors in by_prompt_lang.items():
        mean = MetricVector()
        for metric in METRIC_IDS:
            values = [v.get(metric) for v in vectors]
            if all(value is not None for value in values):
                mean.set(metric, sum(values) / len(values))
        averaged[key] = mean
    expected = {(pid, lang) for pid in config.prompts for lang in config.languages}
    if len(config.prompts) < 2 or set(averaged) < expected:
        print("note: prompt-selection table skipped (incomplete prompt/language grid)", file=sys.stderr)
        return None
    try:
        rows, wins = prompt_selection_table(
            {k: averaged[k] for k in expected}, drift_winner=config.drift_winner
        )
    except ValueError as exc:
        print(f"note: prompt-selection table skipped: {exc}", file=sys.stderr)
        return None
    (out / "prompt_selection.csv").write_text(prompt_selection_csv(rows, wins), encoding="utf-8")
    return wins


def _emit_patterns(out: Path, config: RunConfig, args) -> None:
    if config.pattern_rules_path is None and not getattr(args, "rules", None):
        return
    rules_path = Path(getattr(args, "rules", None) or config.pattern_rules_path)
    try:
        corrections_path = _corrections_path(config, args)
    except ConfigError:
        print("note: patterns skipped (no corrections available)", file=sys.stderr)
        return
    rules = load_pattern_rules(rules_path)
    corrections = load_corrections(corrections_path)
    counts = pattern_counts(corrections, rules)
    (out / "patterns.csv").write_text(patterns_csv(counts), encoding="utf-8")


def _emit_stability(out: Path, run_paths) -> None:
    if not run_paths:
        return
    runs = [read_cell_table(p) for p in run_paths]
    report = stability_report(runs)
    (out / "stability.csv").write_text(stability_csv(report), encoding="utf-8")


def stage_stability(config: RunConfig, args) -> int:
    if args.dry_run:
        return _dry_run_report(config, need_corpus=False)
    if len(args.runs) < 2:
        raise ConfigError("stability needs at least two run cell tables")
    for path in args.runs:
        if not Path(path).is_file():
            raise ConfigError(f"run cell table not found: {path}; run the score stage per run first")
    out = _ensure_out(config)
    runs = [read_cell_table(p) for p in args.runs]
    report = stability_report(runs)
    (out / "stability.csv").write_text(stability_csv(report), encoding="utf-8")
    worst = max((cell.max_abs_deviation for cell in report.cells.values()), default=0.0)
    print(f"stability over {len(runs)} runs: max deviation {worst}")
    return 0


def stage_patterns(config: RunConfig, args) -> int:
    if args.dry_run:
        return _dry_run_report(config, need_corpus=False)
    rules_path = getattr(args, "rules", None) or config.pattern_rules_path
    if rules_path is None:
        raise ConfigError("no pattern rules: set pattern_rules in the config or pass --rules")
    rules = load_pattern_rules(rules_path)
    corrections = load_corrections(_corrections_path(config, args))
    counts = pattern_counts(corrections, rules)
    out = _ensure_out(config)
    (out / "patterns.csv").write_text(patterns_csv(counts), encoding="utf-8")
    for rule, count in counts:
        print(f"{count:6d}  {rule.pattern!r} [{rule.language}/{rule.model}/{rule.match_mode}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
