"""Prompt templates and chat-message rendering.

Three instruction templates (P1 short, P2 output-restricted, P3 minimal-
changes) exist per language. Templates live in one YAML file per language
mapping prompt id to instruction text; the package ships editable defaults.
"""

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from . import LANGUAGES, PROMPT_IDS, normalize_language


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    prompt_id: str
    language: str
    instruction: str


@dataclass(frozen=True)
class CatalogEntry:
    prompt_id: str
    language: str
    present: bool


class PromptCatalog:
    def __init__(self, templates: dict[tuple[str, str], PromptTemplate], languages=LANGUAGES):
        self._templates = templates
        self._languages = tuple(languages)

    @classmethod
    def load(cls, template_dir: str | Path | None = None, languages=LANGUAGES) -> "PromptCatalog":
        """Read one ``<language>.yaml`` per language; missing files leave gaps."""
        templates: dict[tuple[str, str], PromptTemplate] = {}
        for lang in languages:
            lang = normalize_language(lang)
            if template_dir is None:
                ref = resources.files("gecscope").joinpath(f"data/prompts/{lang}.yaml")
                raw = ref.read_text(encoding="utf-8") if ref.is_file() else None
            else:
                path = Path(template_dir) / f"{lang}.yaml"
                raw = path.read_text(encoding="utf-8") if path.is_file() else None
            if raw is None:
                continue
            data = yaml.safe_load(raw) or {}
            for prompt_id, instruction in data.items():
                if prompt_id not in PROMPT_IDS:
                    raise ConfigurationError(f"{lang}.yaml: unknown prompt id {prompt_id!r}")
                if not isinstance(instruction, str) or not instruction.strip():
                    raise ConfigurationError(f"{lang}.yaml: empty instruction for {prompt_id}")
                instruction = instruction.strip()
                if not instruction.endswith(":"):
                    raise ConfigurationError(
                        f"{lang}.yaml: instruction for {prompt_id} must end with a colon"
                    )
                templates[(prompt_id, lang)] = PromptTemplate(prompt_id, lang, instruction)
        return cls(templates, languages)

    def get(self, prompt_id: str, language: str) -> PromptTemplate:
        key = (prompt_id, normalize_language(language))
        if key not in self._templates:
            raise ConfigurationError(f"no template configured for ({prompt_id}, {language})")
        return self._templates[key]

    def render(self, prompt_id: str, language: str, sentence_text: str) -> list[dict[str, str]]:
        """A single user message: instruction, newline, the sentence verbatim."""
        template = self.get(prompt_id, language)
        return [{"role": "user", "content": f"{template.instruction}\n{sentence_text}"}]

    def list_prompts(self) -> list[CatalogEntry]:
        """All (prompt, language) slots in deterministic order, flagging gaps."""
        return [
            CatalogEntry(pid, lang, (pid, lang) in self._templates)
            for lang in self._languages
            for pid in PROMPT_IDS
        ]
