"""Obtaining corrections: live chat-completion calls or offline replay.

Live generation speaks the OpenAI-compatible chat-completions schema and
caches every result in an append-only JSONL log keyed by the full request
identity. Offline replay loads a corrections file (one JSON object per
line) so published outputs can be re-scored without any model server.
"""

import hashlib
import json
import threading
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import requests

from . import normalize_language

MAX_RETRIES = 3
BACKOFF_START_SECONDS = 1.0


class GenerationError(RuntimeError):
    def __init__(self, message: str, sentence_id: str):
        super().__init__(f"{message} (sentence {sentence_id})")
        self.sentence_id = sentence_id


class CorrectionsLoadError(ValueError):
    pass


@dataclass(frozen=True)
class GenerationConfig:
    max_new_tokens: int = 256
    repetition_penalty: float = 1.18
    top_k: int = 40
    top_p: float = 0.1
    sampling: bool = True
    renormalize_logits: bool = False
    use_cache: bool = True

    def __post_init__(self):
        if self.max_new_tokens <= 0:
            raise ValueError("max_new_tokens must be positive")
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError("top_p must be in (0, 1]")
        if self.top_k < 0:
            raise ValueError("top_k must be >= 0")
        if self.repetition_penalty < 1.0:
            raise ValueError("repetition_penalty must be >= 1")

    def request_fields(self) -> dict:
        """Fields merged into the chat-completions request body."""
        return {
            "max_tokens": self.max_new_tokens,
            "top_p": self.top_p,
            "top_k": self.top_k,
            "repetition_penalty": self.repetition_penalty,
            "do_sample": self.sampling,
        }

    def digest(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Correction:
    sentence_id: str
    model_id: str
    prompt_id: str
    language: str
    output_text: str
    raw_response: str = ""
    timestamp: str | None = None


# End-of-sequence markers some chat templates leak into completions.
_EOS_MARKERS = ("<|im_end|>", "<|eot_id|>", "<|endoftext|>", "</s>", "[/INST]")


def postprocess(raw: str) -> str:
    """Trim transport artifacts: whitespace, trailing end-of-sequence
    markers and one symmetric quote pair.

    Interior characters are never touched and the function is idempotent.
    """
    text = raw.strip()
    stripped = True
    while stripped:
        stripped = False
        for marker in _EOS_MARKERS:
            if text.endswith(marker):
                text = text[: -len(marker)].rstrip()
                stripped = True
    for quote in ('"', "'", "“”", "„“", "«»"):
        opening, closing = (quote, quote) if len(quote) == 1 else (quote[0], quote[1])
        while (
            len(text) >= 2
            and text.startswith(opening)
            and text.endswith(closing)
            and not _has_interior(text, opening, closing)
        ):
            text = text[1:-1].strip()
    return text


def _has_interior(text: str, opening: str, closing: str) -> bool:
    interior = text[1:-1]
    return opening in interior or closing in interior


def cache_key(model_id: str, prompt_id: str, language: str, sentence_text: str, config: GenerationConfig) -> str:
    text_hash = hashlib.sha256(sentence_text.encode("utf-8")).hexdigest()
    return "|".join([model_id, prompt_id, language, text_hash, config.digest()])


class CorrectionsCache:
    """Append-only JSONL log with an in-memory index, safe for concurrent writers."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._index: dict[str, Correction] = {}
        if self.path.exists():
            self._rebuild_index()

    def _rebuild_index(self) -> None:
        with open(self.path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                key = entry.pop("cache_key")
                self._index[key] = Correction(**entry)

    def get(self, key: str) -> Correction | None:
        with self._lock:
            return self._index.get(key)

    def put(self, key: str, correction: Correction) -> None:
        entry = {"cache_key": key, **asdict(correction)}
        line = json.dumps(entry, ensure_ascii=False, sort_keys=True)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")
            self._index[key] = correction

    def corrections(self) -> list[Correction]:
        with self._lock:
            return list(self._index.values())


class ChatCompletionsClient:
    """Minimal OpenAI-compatible chat client with retry/backoff."""

    def __init__(self, endpoint: str, api_token: str | None = None, timeout: float = 120.0,
                 session: requests.Session | None = None, backoff: float = BACKOFF_START_SECONDS):
        self.endpoint = endpoint
        self.api_token = api_token
        self.timeout = timeout
        self.backoff = backoff
        self._session = session or requests.Session()

    def complete(self, model_id: str, messages: list[dict], config: GenerationConfig) -> str:
        body = {"model": model_id, "messages": messages, **config.request_fields()}
        headers = {"Content-Type": "application/json"}
        if self.api_token:
            headers["Authorization"] = f"Bearer {self.api_token}"
        last_error: Exception | None = None
        for attempt in range(MAX_RETRIES):
            try:
                response = self._session.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
                response.raise_for_status()
                payload = response.json()
                return payload["choices"][0]["message"]["content"] or ""
            except Exception as exc:  # transport, HTTP status or schema
                last_error = exc
                if attempt < MAX_RETRIES - 1:
                    time.sleep(self.backoff * (2 ** attempt))
        raise RuntimeError(f"chat completion failed after {MAX_RETRIES} attempts: {last_error}")


def generate(sentence, template, model_id: str, client: ChatCompletionsClient,
             config: GenerationConfig, cache: CorrectionsCache | None = None,
             catalog=None) -> Correction:
    """Fetch one correction, consulting and filling the cache.

    ``sentence`` is a SentenceRecord and ``template`` a PromptTemplate of the
    same language; ``catalog`` renders the message (defaults to a plain
    instruction+newline+sentence user message).
    """
    if template.language != sentence.language:
        raise ValueError(
            f"template language {template.language!r} does not match sentence language {sentence.language!r}"
        )
    key = cache_key(model_id, template.prompt_id, sentence.language, sentence.text, config)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    messages = [{"role": "user", "content": f"{template.instruction}\n{sentence.text}"}]
    try:
        raw = client.complete(model_id, messages, config)
    except Exception as exc:
        raise GenerationError(str(exc), sentence.id) from exc
    correction = Correction(
        sentence_id=sentence.id,
        model_id=model_id,
        prompt_id=template.prompt_id,
        language=sentence.language,
        output_text=postprocess(raw),
        raw_response=raw,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    )
    if cache is not None:
        cache.put(key, correction)
    return correction


REQUIRED_CORRECTION_FIELDS = ("sentence_id", "model_id", "prompt_id", "language", "output_text")


def load_corrections(path: str | Path, known_ids: set[str] | None = None,
                     warn=None) -> list[Correction]:
    """Parse a corrections replay file (JSON object per line).

    Unknown sentence ids (when ``known_ids`` is given) and schema violations
    raise with the line number; duplicate (sentence, model, prompt) keys keep
    the last record and emit a warning through ``warn``.
    """
    warn = warn or (lambda message: None)
    by_key: dict[tuple[str, str, str], Correction] = {}
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorrectionsLoadError(f"line {line_number}: invalid JSON ({exc})") from exc
            missing = [f for f in REQUIRED_CORRECTION_FIELDS if f not in entry]
            if missing:
                raise CorrectionsLoadError(f"line {line_number}: missing field(s) {', '.join(missing)}")
            language = normalize_language(entry["language"])
            if known_ids is not None and entry["sentence_id"] not in known_ids:
                raise CorrectionsLoadError(f"line {line_number}: unknown sentence_id {entry['sentence_id']!r}")
            correction = Correction(
                sentence_id=entry["sentence_id"],
                model_id=entry["model_id"],
                prompt_id=entry["prompt_id"],
                language=language,
                output_text=entry["output_text"],
                raw_response=entry.get("raw_response", ""),
                timestamp=entry.get("timestamp"),
            )
            dedup_key = (correction.sentence_id, correction.model_id, correction.prompt_id)
            if dedup_key in by_key:
                warn(f"line {line_number}: duplicate record for {dedup_key}; keeping the last one")
            by_key[dedup_key] = correction
    return list(by_key.values())


def write_corrections(path: str | Path, corrections: list[Correction]) -> None:
    ordered = sorted(corrections, key=lambda c: (c.model_id, c.prompt_id, c.sentence_id))
    with open(path, "w", encoding="utf-8") as handle:
        for c in ordered:
            entry = asdict(c)
            # optional companions are omitted when empty; required fields
            # always serialize, output_text may legitimately be ""
            if not entry["raw_response"]:
                del entry["raw_response"]
            if entry["timestamp"] is None:
                del entry["timestamp"]
            handle.write(json.dumps(entry, ensure_ascii=False, sort_keys=True) + "\n")
