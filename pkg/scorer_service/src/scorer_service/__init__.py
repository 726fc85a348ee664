"""HTTP sidecar serving the neural scorers and language identification.

Exposes POST /score (bertscore, sbert, bleurt over reference/candidate
pairs), POST /lid (per-language probabilities) and GET /health (readiness
plus exact model identifiers for manifest stamping).
"""

__version__ = "0.1.0"

SUPPORTED_LANGUAGES = ("en", "de", "it", "sv")
SCORE_METRICS = ("bertscore", "sbert", "bleurt")
DEFAULT_BATCH_CAP = 64
