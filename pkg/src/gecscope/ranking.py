"""Per-metric ranking and two-step Borda aggregation into a global ranking.

Ranks use competition semantics (tied values share the minimal rank; the
next distinct value ranks one past all strictly better models). Borda
points are n - rank per input ranking, so tied models earn the points of
their shared rank; global ranks are the competition ranking of total
points. The two-step procedure first aggregates the three semantic and
three syntactic metrics into one ranking each, then aggregates those with
the grammar-correctness and preservation rankings so that each of the four
quality perspectives carries the same weight. Language drift is excluded
from aggregation.
"""

import math
from dataclasses import dataclass

from . import LANGUAGES, SEMANTIC_METRICS, SYNTACTIC_METRICS
from .metrics import MetricVector
from .reportfmt import round_display

AGGREGATED_METRICS = ("lt", "preservation_f1") + SEMANTIC_METRICS + SYNTACTIC_METRICS


@dataclass(frozen=True)
class RankTable:
    metric: str
    ranks: dict[str, int]
    direction: str = "higher_better"


@dataclass(frozen=True)
class GlobalRanking:
    scope: str
    borda_points: dict[str, float]
    ranks: dict[str, int]

    def as_rank_table(self, metric: str) -> RankTable:
        return RankTable(metric=metric, ranks=dict(self.ranks))


def competition_ranks(values: dict[str, float]) -> dict[str, int]:
    """Tied values share the minimal rank; higher values rank better."""
    return {m: 1 + sum(1 for w in values.values() if w > v) for m, v in values.items()}


def rank_by_metric(values: dict[str, float], metric: str = "", round_to: int | None = None) -> RankTable:
    """Competition-rank models by metric value, higher better.

    ``round_to`` ranks on display-rounded values (half-up at that many
    decimals) instead of full precision.
    """
    if not values:
        raise ValueError("cannot rank an empty value map")
    for model, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r} for model {model!r}")
    if round_to is not None:
        values = {m: float(round_display(v, round_to)) for m, v in values.items()}
    return RankTable(metric=metric, ranks=competition_ranks(values))


def borda(rankings: list[RankTable], scope: str = "overall") -> GlobalRanking:
    """Aggregate rank tables over one model set into a single ranking."""
    if not rankings:
        raise ValueError("borda needs at least one ranking")
    model_set = set(rankings[0].ranks)
    for table in rankings[1:]:
        if set(table.ranks) != model_set:
            raise ValueError(
                f"model set mismatch between rankings ({table.metric or 'unnamed'} differs)"
            )
    n = len(model_set)
    points = {m: 0.0 for m in sorted(model_set)}
    for table in rankings:
        for model, rank in table.ranks.items():
            points[model] += n - rank
    ranks = {m: 1 + sum(1 for o in points.values() if o > points[m]) for m in points}
    return GlobalRanking(scope=scope, borda_points=points, ranks=ranks)


def two_step_global_rank(metric_vectors: dict[str, MetricVector], scope: str = "overall",
                         round_to: int | None = None) -> GlobalRanking:
    """Semantic and syntactic Borda first, then Borda over the four perspectives."""
    tables = {}
    for metric in AGGREGATED_METRICS:
        values = {}
        for model, vector in metric_vectors.items():
            value = vector.get(metric)
            if value is None:
                raise ValueError(f"metric {metric!r} missing for model {model!r}")
            values[model] = value
        tables[metric] = rank_by_metric(values, metric, round_to)
    semantic = borda([tables[m] for m in SEMANTIC_METRICS], scope=f"{scope}/semantic")
    syntactic = borda([tables[m] for m in SYNTACTIC_METRICS], scope=f"{scope}/syntactic")
    return borda(
        [
            tables["lt"],
            tables["preservation_f1"],
            semantic.as_rank_table("semantic"),
            syntactic.as_rank_table("syntactic"),
        ],
        scope=scope,
    )


def overall_ranking(per_language: dict[str, dict[str, MetricVector]],
                    mode: str = "macro", round_to: int | None = None) -> GlobalRanking:
    """Aggregate the per-language vectors into one overall ranking.

    ``macro`` (default) macro-averages the metric vectors over languages and
    runs the two-step procedure on the averaged table; ``per_language_borda``
    instead Borda-aggregates the four per-language global rankings.
    """
    from .metrics import macro_average

    missing = [lang for lang in LANGUAGES if lang not in per_language]
    if missing:
        raise ValueError(f"overall ranking needs all languages; missing: {', '.join(missing)}")
    if mode == "macro":
        models = _common_models(per_language)
        averaged = {
            model: macro_average({lang: per_language[lang][model] for lang in LANGUAGES})
            for model in models
        }
        return two_step_global_rank(averaged, scope="overall", round_to=round_to)
    if mode == "per_language_borda":
        rankings = [
            two_step_global_rank(per_language[lang], scope=lang, round_to=round_to).as_rank_table(lang)
            for lang in LANGUAGES
        ]
        return borda(rankings, scope="overall")
    raise ValueError(f"unknown overall ranking mode {mode!r}")


def _common_models(per_language: dict[str, dict[str, MetricVector]]) -> list[str]:
    models = set(per_language[LANGUAGES[0]])
    for lang in LANGUAGES[1:]:
        if set(per_language[lang]) != models:
            raise ValueError("model sets differ between languages")
    return sorted(models)
