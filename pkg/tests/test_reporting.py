import csv

import pytest

from gecscope import METRIC_IDS
from gecscope.gateway import Correction
from gecscope.metrics import MetricVector
from gecscope.reporting import (
    PatternRule,
    language_support_verdict,
    load_pattern_rules,
    pattern_counts,
    patterns_csv,
    prompt_selection_csv,
    prompt_selection_table,
    rank_table_csv,
    score_table_csv,
    stability_csv,
    stability_report,
)
from gecscope.ranking import rank_by_metric

from conftest import REFERENCE_DIR, load_score_table


def load_prompt_cells(name):
    cells = {}
    with open(REFERENCE_DIR / name, newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            vector = MetricVector()
            for metric in METRIC_IDS:
                vector.set(metric, float(row[metric]))
            cells[(row["prompt"], row["language"])] = vector
    return cells


# --- prompt selection -----------------------------------------------------------

def test_published_prompt_table_p3_wins_32_of_36():
    cells = load_prompt_cells("prompt_means.csv")
    _, wins = prompt_selection_table(cells)
    assert wins["P3"] == 32
    assert sum(wins.values()) >= 36  # ties credit every tied prompt


def test_restricted_subset_table_p3_wins_32_with_highest_drift():
    cells = load_prompt_cells("prompt_means_restricted.csv")
    _, wins = prompt_selection_table(cells, drift_winner="highest")
    assert wins["P3"] == 32


def test_identical_prompts_all_credited():
    vector = MetricVector()
    for metric in METRIC_IDS:
        vector.set(metric, 0.5)
    cells = {(pid, lang): vector for pid in ("P1", "P2", "P3") for lang in ("en", "de", "it", "sv")}
    _, wins = prompt_selection_table(cells)
    assert wins == {"P1": 36, "P2": 36, "P3": 36}


def test_missing_cell_raises():
    cells = load_prompt_cells("prompt_means.csv")
    del cells[("P2", "de")]
    with pytest.raises(ValueError, match=r"\(P2, de\)"):
        prompt_selection_table(cells)


def test_missing_metric_raises():
    cells = load_prompt_cells("prompt_means.csv")
    cells[("P1", "en")].gleu = None
    with pytest.raises(ValueError, match="gleu"):
        prompt_selection_table(cells)


def test_unknown_drift_mode_rejected():
    cells = load_prompt_cells("prompt_means.csv")
    with pytest.raises(ValueError):
        prompt_selection_table(cells, drift_winner="lowest")


def test_rows_cover_full_grid_in_order():
    cells = load_prompt_cells("prompt_means.csv")
    rows, _ = prompt_selection_table(cells)
    assert len(rows) == 12
    assert rows[0][:2] == ("P1", "de")
    csv_text = prompt_selection_csv(rows, {"P1": 1, "P2": 2, "P3": 33})
    assert csv_text.splitlines()[0] == "prompt,language," + ",".join(METRIC_IDS)


# --- language support -------------------------------------------------------------

def test_zero_drift_supported_everywhere():
    verdicts = language_support_verdict({"m": {"en": 0.0, "de": 0.0, "it": 0.0, "sv": 0.0}})
    assert verdicts["m"]["supports_all"] is True


def test_large_negative_drift_not_supported():
    verdicts = language_support_verdict({"SmolLM": {"de": -0.978}})
    assert verdicts["SmolLM"]["languages"]["de"] is False
    assert verdicts["SmolLM"]["supports_all"] is False


def test_published_macro_drift_yields_nine_supporting_models():
    vectors = load_score_table(REFERENCE_DIR / "scores_macro.csv")
    drift = {model: {"all": vector.drift} for model, vector in vectors.items()}
    verdicts = language_support_verdict(drift, threshold=-0.05)
    supporting = sorted(m for m, v in verdicts.items() if v["supports_all"])
    assert supporting == [
        "Aya", "EuroLLM (1.7B)", "EuroLLM (9B)", "Gemma (2B)", "Gemma (9B)",
        "Llama 3.1", "OpenChat", "Qwen 2.5", "Yi",
    ]


def test_threshold_is_inclusive():
    verdicts = language_support_verdict({"edge": {"en": -0.05}}, threshold=-0.05)
    assert verdicts["edge"]["supports_all"] is True


# --- pattern counts ----------------------------------------------------------------

def corr(output, model="m", language="en"):
    return Correction("en-00000", model, "P3", language, output)


def test_substring_rule_counts_case_insensitively():
    rule = PatternRule("grammatically correct")
    outputs = [corr("The text is Grammatically Correct already."), corr("fine")]
    assert pattern_counts(outputs, [rule]) == [(rule, 1)]


def test_prefix_rule():
    rule = PatternRule("delete all", match_mode="prefix")
    outputs = [corr("Delete all files."), corr("Please delete all")]
    assert pattern_counts(outputs, [rule])[0][1] == 1


def test_model_and_language_filters():
    rule = PatternRule("ok", model="a", language="de")
    outputs = [corr("ok", model="a", language="de"), corr("ok", model="b", language="de"),
               corr("ok", model="a", language="en")]
    assert pattern_counts(outputs, [rule])[0][1] == 1


def test_counts_are_monotone_in_outputs():
    rule = PatternRule("x")
    outputs = [corr("x here")]
    base = pattern_counts(outputs, [rule])[0][1]
    extended = pattern_counts(outputs + [corr("no match"), corr("more x")], [rule])[0][1]
    assert extended >= base


def test_known_embedding_counts_exact(tmp_path):
    outputs = [corr(f"filler {i}") for i in range(20)]
    for i in range(7):
        outputs.insert(2 * i, corr(f"note: grammatically correct #{i}"))
    rule = PatternRule("grammatically correct")
    assert pattern_counts(outputs, [rule])[0][1] == 7


def test_rules_file_roundtrip(tmp_path):
    rules_path = tmp_path / "rules.yaml"
    rules_path.write_text(
        "- pattern: 'grammatically correct'\n"
        "  language: en\n"
        "  model: Yi\n"
        "- pattern: 'delete all'\n"
        "  match_mode: prefix\n",
        encoding="utf-8",
    )
    rules = load_pattern_rules(rules_path)
    assert rules[0] == PatternRule("grammatically correct", language="en", model="Yi")
    assert rules[1].match_mode == "prefix"
    text = patterns_csv(pattern_counts([corr("delete ALL of it")], rules))
    assert text.splitlines()[2].startswith("delete all,any,any,prefix,1")


def test_invalid_rules_rejected():
    with pytest.raises(ValueError):
        PatternRule("")
    with pytest.raises(ValueError):
        PatternRule("x", match_mode="regex")


# --- stability ------------------------------------------------------------------

def cell_run(value, metric="lt"):
    vector = MetricVector()
    vector.set(metric, value)
    return {("m", "P3", "en"): vector}


def test_identical_runs_zero_deviation():
    report = stability_report([cell_run(0.9), cell_run(0.9)])
    assert report.cells[("m", "P3", "en", "lt")].max_abs_deviation == 0.0


def test_small_perturbation_reported():
    report = stability_report([cell_run(0.90000), cell_run(0.90037)])
    assert report.cells[("m", "P3", "en", "lt")].max_abs_deviation == pytest.approx(0.00037)


def test_three_identical_replays_all_zero():
    report = stability_report([cell_run(0.5)] * 3)
    assert all(cell.max_abs_deviation == 0.0 for cell in report.cells.values())


def test_coverage_mismatch_raises():
    with pytest.raises(ValueError, match="coverage"):
        stability_report([cell_run(0.9, metric="lt"), cell_run(0.9, metric="gleu")])


def test_fewer_than_two_runs_rejected():
    with pytest.raises(ValueError):
        stability_report([cell_run(0.9)])


def test_stability_csv_layout():
    report = stability_report([cell_run(0.1), cell_run(0.3)])
    lines = stability_csv(report).splitlines()
    assert lines[0] == "model_id,prompt_id,language,metric,max_abs_deviation,values"
    assert lines[1].startswith("m,P3,en,lt,")


# --- table emission ----------------------------------------------------------------

def test_score_table_header_is_the_nine_metric_ids():
    vectors = load_score_table(REFERENCE_DIR / "scores_macro.csv")
    text = score_table_csv(vectors)
    assert text.splitlines()[0] == "model," + ",".join(METRIC_IDS)


def test_score_table_deterministic():
    vectors = load_score_table(REFERENCE_DIR / "scores_macro.csv")
    assert score_table_csv(vectors) == score_table_csv(vectors)


def test_empty_tables_rejected():
    with pytest.raises(ValueError):
        score_table_csv({})
    with pytest.raises(ValueError):
        rank_table_csv({})


def test_rank_table_csv_includes_global_columns():
    table = rank_by_metric({"a": 0.9, "b": 0.5}, "lt")
    from gecscope.ranking import borda

    ranking = borda([table])
    text = rank_table_csv({"lt": table}, ranking)
    lines = text.splitlines()
    assert lines[0] == "model,lt,global_rank,global_points"
    assert lines[1] == "a,1,1,1.000"


def test_display_rounding_is_half_up():
    vectors = {"m": MetricVector()}
    vectors["m"].set("lt", 0.9485)
    line = score_table_csv(vectors).splitlines()[1]
    assert line.split(",")[1] == "0.949"
