"""Reference-less multilingual GEC evaluation harness.

Scores model corrections on nine reference-less metrics across English,
German, Italian and Swedish, aggregates per-metric ranks into a global
model ranking via two-step Borda aggregation, and emits reproducible
CSV/markdown reports.
"""

__version__ = "0.1.0"

LANGUAGES = ("en", "de", "it", "sv")

METRIC_IDS = (
    "lt",
    "bertscore",
    "sbert",
    "bleurt",
    "levenshtein",
    "length_diff",
    "gleu",
    "drift",
    "preservation_f1",
)

SEMANTIC_METRICS = ("bertscore", "sbert", "bleurt")
SYNTACTIC_METRICS = ("gleu", "length_diff", "levenshtein")

PROMPT_IDS = ("P1", "P2", "P3")


def normalize_language(code: str) -> str:
    """Lowercase a language code and validate it against the supported set."""
    lang = code.strip().lower()
    if lang not in LANGUAGES:
        raise ValueError(f"unsupported language {code!r}; expected one of {LANGUAGES}")
    return lang
