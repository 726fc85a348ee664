"""Scoring backends.

``LiteBackend`` is the default: deterministic character-n-gram models that
need no downloads. Token embeddings are hashed n-gram vectors scored with
BERTScore-style greedy matching; sentence similarity is the cosine of
pooled n-gram vectors; the language identifier is a smoothed character
n-gram likelihood model over the four supported languages, softmax-
normalized. All of it is exact, repeatable arithmetic.

``PretrainedBackend`` loads the pinned neural checkpoints instead, when
they are available locally; model identifiers are surfaced through
/health either way so reports can stamp what actually scored them.
"""

import math
import re
import threading
import zlib
from collections import Counter

import numpy as np

from . import SUPPORTED_LANGUAGES
from .seed_text import SEED_TEXT

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

EMBED_DIM = 256


def _tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def _char_ngrams(text: str, orders=(1, 2, 3)) -> list[str]:
    padded = f"\x02{text}\x03"
    grams = []
    for n in orders:
        grams.extend(padded[i:i + n] for i in range(len(padded) - n + 1))
    return grams


def _hashed_vector(grams: list[str]) -> np.ndarray:
    vector = np.zeros(EMBED_DIM, dtype=np.float64)
    for gram in grams:
        digest = zlib.crc32(gram.encode("utf-8"))
        index = digest % EMBED_DIM
        sign = 1.0 if (digest >> 16) & 1 else -1.0
        vector[index] += sign
    norm = np.linalg.norm(vector)
    return vector / norm if norm else vector


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(min(1.0, max(-1.0, np.dot(a, b))))


class LiteBackend:
    """Deterministic offline scorer; no model downloads."""

    name = "lite"

    def __init__(self):
        self._lid_logprobs: dict[str, dict[str, float]] = {}
        self._lid_fallback: dict[str, float] = {}
        self._locks = {key: threading.Lock() for key in ("score", "lid")}
        self._embedding_cache: dict[str, np.ndarray] = {}

    def load(self) -> None:
        for language, text in SEED_TEXT.items():
            counts = Counter(_char_ngrams(text.lower()))
            total = sum(counts.values())
            vocabulary = len(counts)
            self._lid_logprobs[language] = {
                gram: math.log((count + 1.0) / (total + vocabulary))
                for gram, count in counts.items()
            }
            self._lid_fallback[language] = math.log(1.0 / (total + vocabulary))

    def model_versions(self) -> dict[str, str]:
        return {
            "backend": self.name,
            "bertscore": "lite-char-ngram-greedy-256d",
            "sbert": "lite-char-ngram-cosine-256d",
            "bleurt": "lite-char-ngram-blend",
            "lid": "lite-char-trigram-multinomial",
            "bertscore_rescale_with_baseline": "off",
        }

    # --- similarity metrics ---

    def _token_vector(self, token: str) -> np.ndarray:
        cached = self._embedding_cache.get(token)
        if cached is None:
            cached = _hashed_vector(_char_ngrams(token.lower()))
            if len(self._embedding_cache) < 200_000:
                self._embedding_cache[token] = cached
        return cached

    def _sentence_vector(self, text: str) -> np.ndarray:
        return _hashed_vector(_char_ngrams(text.lower(), orders=(2, 3, 4)))

    def _bertscore(self, reference: str, candidate: str) -> float:
        if reference == candidate:
            return 1.0
        ref_tokens = _tokenize(reference)
        cand_tokens = _tokenize(candidate)
        if not ref_tokens and not cand_tokens:
            return 1.0
        if not ref_tokens or not cand_tokens:
            return 0.0
        ref_matrix = np.stack([self._token_vector(t) for t in ref_tokens])
        cand_matrix = np.stack([self._token_vector(t) for t in cand_tokens])
        similarity = cand_matrix @ ref_matrix.T
        precision = float(similarity.max(axis=1).mean())
        recall = float(similarity.max(axis=0).mean())
        if precision + recall <= 0.0:
            return 0.0
        return 2.0 * precision * recall / (precision + recall)

    def _sbert(self, reference: str, candidate: str) -> float:
        if reference == candidate:
            return 1.0
        return _cosine(self._sentence_vector(reference), self._sentence_vector(candidate))

    def _bleurt(self, reference: str, candidate: str) -> float:
        if not reference and not candidate:
            return 1.0
        if not reference or not candidate:
            return 0.0
        return 0.05 + 0.95 * max(0.0, self._sbert(reference, candidate))

    def score(self, metric: str, pairs: list[tuple[str, str]]) -> list[float]:
        scorer = {"bertscore": self._bertscore, "sbert": self._sbert, "bleurt": self._bleurt}[metric]
        with self._locks["score"]:
            return [scorer(reference, candidate) for reference, candidate in pairs]

    # --- language identification ---

    def _language_loglikelihood(self, text: str, language: str) -> float:
        logprobs = self._lid_logprobs[language]
        fallback = self._lid_fallback[language]
        return sum(logprobs.get(gram, fallback) for gram in _char_ngrams(text.lower()))

    def lid(self, texts: list[str], languages: list[str]) -> list[dict[str, float]]:
        with self._locks["lid"]:
            results = []
            for text in texts:
                if not text.strip():
                    results.append({language: 0.0 for language in languages})
                    continue
                loglik = {
                    supported: self._language_loglikelihood(text, supported)
                    for supported in SUPPORTED_LANGUAGES
                }
                peak = max(loglik.values())
                unnormalized = {k: math.exp(v - peak) for k, v in loglik.items()}
                total = sum(unnormalized.values())
                probabilities = {k: v / total for k, v in unnormalized.items()}
                results.append({
                    language: probabilities.get(language, 0.0) for language in languages
                })
            return results


# Pinned checkpoint identifiers served by the pretrained backend.
PRETRAINED_IDS = {
    "bertscore": "google-bert/bert-base-multilingual-cased",
    "sbert": "sentence-transformers/paraphrase-multilingual-MiniLM-L12-v2",
    "bleurt": "BLEURT-20-D12",
    "lid": "facebook/fasttext-language-identification",
}


class PretrainedBackend:
    """Loads the pinned neural checkpoints from the local model cache.

    Imports are deferred so the sidecar starts without the heavyweight
    stack installed; every missing piece fails with the checkpoint id it
    wanted.
    """

    name = "pretrained"

    def __init__(self, bleurt_path: str | None = None, lid_path: str | None = None):
        self.bleurt_path = bleurt_path
        self.lid_path = lid_path
        self._sbert_model = None
        self._bert_model = None
        self._bert_tokenizer = None
        self._lid_model = None
        self._bleurt_model = None
        self._locks = {key: threading.Lock() for key in ("score", "lid")}

    def load(self) -> None:
        from sentence_transformers import SentenceTransformer
        from transformers import AutoModel, AutoTokenizer

        self._sbert_model = SentenceTransformer(PRETRAINED_IDS["sbert"])
        self._bert_tokenizer = AutoTokenizer.from_pretrained(PRETRAINED_IDS["bertscore"])
        self._bert_model = AutoModel.from_pretrained(PRETRAINED_IDS["bertscore"])
        self._bert_model.eval()
        if self.lid_path:
            import fasttext

            self._lid_model = fasttext.load_model(self.lid_path)
        if self.bleurt_path:
            from bleurt import score as bleurt_score

            self._bleurt_model = bleurt_score.BleurtScorer(self.bleurt_path)

    def model_versions(self) -> dict[str, str]:
        versions = {"backend": self.name, **PRETRAINED_IDS}
        versions["bertscore_rescale_with_baseline"] = "off"
        return versions

    def score(self, metric: str, pairs: list[tuple[str, str]]) -> list[float]:
        with self._locks["score"]:
            if metric == "sbert":
                return self._score_sbert(pairs)
            if metric == "bertscore":
                return self._score_bertscore(pairs)
            if metric == "bleurt":
                if self._bleurt_model is None:
                    raise RuntimeError(
                        f"bleurt checkpoint {PRETRAINED_IDS['bleurt']} not configured; "
                        "pass --bleurt-path"
                    )
                references = [r for r, _ in pairs]
                candidates = [c for _, c in pairs]
                return [float(s) for s in
                        self._bleurt_model.score(references=references, candidates=candidates)]
            raise ValueError(f"unknown metric {metric!r}")

    def _score_sbert(self, pairs):
        import numpy as np

        references = self._sbert_model.encode([r for r, _ in pairs], normalize_embeddings=True)
        candidates = self._sbert_model.encode([c for _, c in pairs], normalize_embeddings=True)
        return [float(np.dot(r, c)) for r, c in zip(references, candidates)]

    def _score_bertscore(self, pairs):
        import torch

        scores = []
        with torch.no_grad():
            for reference, candidate in pairs:
                ref = self._embed_tokens(reference)
                cand = self._embed_tokens(candidate)
                if ref is None and cand is None:
                    scores.append(1.0)
                    continue
                if ref is None or cand is None:
                    scores.append(0.0)
                    continue
                similarity = cand @ ref.T
                precision = similarity.max(dim=1).values.mean().item()
                recall = similarity.max(dim=0).values.mean().item()
                scores.append(0.0 if precision + recall <= 0
                              else 2 * precision * recall / (precision + recall))
        return scores

    def _embed_tokens(self, text: str):
        import torch

        encoded = self._bert_tokenizer(text, return_tensors="pt", truncation=True, max_length=512)
        if encoded["input_ids"].shape[1] <= 2:  # only special tokens: empty text
            return None
        output = self._bert_model(**encoded).last_hidden_state[0, 1:-1]
        return torch.nn.functional.normalize(output, dim=-1)

    def lid(self, texts: list[str], languages: list[str]) -> list[dict[str, float]]:
        if self._lid_model is None:
            raise RuntimeError(
                f"lid checkpoint {PRETRAINED_IDS['lid']} not configured; pass --lid-path"
            )
        with self._locks["lid"]:
            results = []
            for text in texts:
                if not text.strip():
                    results.append({language: 0.0 for language in languages})
                    continue
                labels, probabilities = self._lid_model.predict(text.replace("\n", " "), k=-1)
                by_code = {}
                for label, probability in zip(labels, probabilities):
                    code = label.removeprefix("__label__").split("_")[0]
                    by_code[code] = max(by_code.get(code, 0.0), float(probability))
                results.append({language: by_code.get(language, 0.0) for language in languages})
            return results


def build_backend(name: str, **kwargs):
    if name == "lite":
        return LiteBackend()
    if name == "pretrained":
        return PretrainedBackend(**kwargs)
    raise ValueError(f"unknown backend {name!r} (expected lite or pretrained)")
