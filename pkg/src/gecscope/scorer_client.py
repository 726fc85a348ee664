"""Client for the neural scorer sidecar (semantic metrics and language id).

The sidecar exposes ``POST /score`` for bertscore/sbert/bleurt pairs,
``POST /lid`` for per-language probabilities and ``GET /health`` for model
version stamping. Requests are chunked to the sidecar's batch cap; the
orientation is fixed with the input sentence as reference and the model
output as candidate.
"""

import requests

BATCH_CAP = 64


class ScorerError(RuntimeError):
    pass


class ScorerClient:
    def __init__(self, base_url: str, timeout: float = 300.0,
                 session: requests.Session | None = None, batch_cap: int = BATCH_CAP):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.batch_cap = batch_cap
        self._session = session or requests.Session()

    def _post(self, route: str, body: dict) -> dict:
        try:
            response = self._session.post(f"{self.base_url}{route}", json=body, timeout=self.timeout)
            response.raise_for_status()
            return response.json()
        except Exception as exc:
            raise ScorerError(f"scorer request {route} failed: {exc}") from exc

    def score(self, metric: str, pairs: list[tuple[str, str]]) -> list[float]:
        """One score per (reference, candidate) pair, order preserved."""
        scores: list[float] = []
        for start in range(0, len(pairs), self.batch_cap):
            chunk = pairs[start:start + self.batch_cap]
            payload = self._post(
                "/score",
                {"metric": metric, "pairs": [{"reference": r, "candidate": c} for r, c in chunk]},
            )
            batch = payload.get("scores")
            if not isinstance(batch, list) or len(batch) != len(chunk):
                raise ScorerError(f"scorer returned {batch!r} for a {len(chunk)}-pair batch")
            scores.extend(float(s) for s in batch)
        return scores

    def lid(self, texts: list[str], languages: list[str]) -> list[dict[str, float]]:
        """Per-text probability map for each requested language."""
        results: list[dict[str, float]] = []
        for start in range(0, len(texts), self.batch_cap):
            chunk = texts[start:start + self.batch_cap]
            payload = self._post("/lid", {"texts": chunk, "languages": list(languages)})
            batch = payload.get("probabilities")
            if not isinstance(batch, list) or len(batch) != len(chunk):
                raise ScorerError(f"scorer returned {batch!r} for a {len(chunk)}-text batch")
            results.extend({k: float(v) for k, v in entry.items()} for entry in batch)
        return results

    def health(self) -> dict:
        try:
            response = self._session.get(f"{self.base_url}/health", timeout=self.timeout)
            response.raise_for_status()
            return response.json()
        except Exception as exc:
            raise ScorerError(f"scorer health check failed: {exc}") from exc
