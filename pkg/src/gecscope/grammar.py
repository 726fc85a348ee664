"""LanguageTool-compatible checking client and the correctness metric.

Texts are sent unmodified to the server's ``/v2/check`` endpoint; every
returned match counts as one error regardless of category. Server failures
raise so the affected cell is marked missing rather than scored zero.
"""

from dataclasses import dataclass

import requests

# Regional variants sent to the checker per harness language code.
DEFAULT_LANGUAGE_CODES = {"en": "en-US", "de": "de-DE", "it": "it", "sv": "sv"}


class CheckError(RuntimeError):
    pass


@dataclass(frozen=True)
class MatchSpan:
    offset: int
    length: int
    rule_id: str
    message: str


@dataclass(frozen=True)
class GrammarCheckResult:
    text: str
    language: str
    match_spans: tuple[MatchSpan, ...]

    @property
    def num_errors(self) -> int:
        return len(self.match_spans)


class LanguageToolClient:
    def __init__(self, base_url: str, language_codes: dict[str, str] | None = None,
                 timeout: float = 60.0, session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.language_codes = dict(DEFAULT_LANGUAGE_CODES)
        if language_codes:
            self.language_codes.update(language_codes)
        self.timeout = timeout
        self._session = session or requests.Session()
        self._server_version: str | None = None

    def check(self, text: str, language: str) -> GrammarCheckResult:
        if language not in self.language_codes:
            raise CheckError(f"no checker language code configured for {language!r}")
        try:
            response = self._session.post(
                f"{self.base_url}/v2/check",
                data={"text": text, "language": self.language_codes[language]},
                timeout=self.timeout,
            )
            response.raise_for_status()
            payload = response.json()
        except Exception as exc:
            raise CheckError(f"grammar check failed: {exc}") from exc
        if "matches" not in payload:
            raise CheckError("grammar check response carries no matches array")
        software = payload.get("software") or {}
        if software.get("version"):
            self._server_version = str(software["version"])
        spans = []
        for match in payload["matches"]:
            offset = int(match.get("offset", 0))
            length = int(match.get("length", 0))
            if offset < 0 or offset + length > len(text):
                raise CheckError(f"match span [{offset}, {offset + length}) outside text bounds")
            spans.append(
                MatchSpan(
                    offset=offset,
                    length=length,
                    rule_id=str((match.get("rule") or {}).get("id", "")),
                    message=str(match.get("message", "")),
                )
            )
        return GrammarCheckResult(text=text, language=language, match_spans=tuple(spans))

    @property
    def server_version(self) -> str | None:
        """Version reported by the server on the most recent check."""
        return self._server_version


def correctness_score(num_errors: int | GrammarCheckResult) -> float:
    """1 / (1 + number of reported errors), in (0, 1]."""
    errors = num_errors.num_errors if isinstance(num_errors, GrammarCheckResult) else num_errors
    if errors < 0:
        raise ValueError("error count cannot be negative")
    return 1.0 / (1.0 + errors)
