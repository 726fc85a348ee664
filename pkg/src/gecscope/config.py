"""Run configuration: one YAML file, env-var overrides for secrets.

Every pipeline stage receives the same RunConfig; validation checks path
existence and language codes up front so failures happen before any work.
Each output directory gets a manifest recording the config hash, corpus
hashes and service versions, which makes runs file-addressable.
"""

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import LANGUAGES, PROMPT_IDS
from .corpus import DEFAULT_LABELS
from .gateway import GenerationConfig
from .grammar import DEFAULT_LANGUAGE_CODES

API_TOKEN_ENV = "GECSCOPE_API_TOKEN"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelEndpoint:
    id: str
    endpoint: str


@dataclass
class RunConfig:
    languages: tuple[str, ...]
    corpus_paths: dict[str, Path]
    label_scheme: dict[str, str]
    prompt_dir: Path | None
    prompts: tuple[str, ...]
    models: tuple[ModelEndpoint, ...]
    generation: GenerationConfig
    checker_url: str | None
    checker_language_codes: dict[str, str]
    checker_version_pin: str | None
    scorer_url: str | None
    output_dir: Path
    request_concurrency: int = 4
    display_decimals: int = 3
    rank_on_rounded: bool = False
    overall_mode: str = "macro"
    drift_threshold: float = -0.05
    drift_winner: str = "nearest_zero"
    pattern_rules_path: Path | None = None
    population_stddev: bool = True
    api_token: str | None = field(default=None, repr=False)
    raw: dict = field(default_factory=dict, repr=False)

    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        raw = yaml.safe_load(handle) or {}
    base = path.parent

    languages = tuple(str(lang).lower() for lang in raw.get("languages", LANGUAGES))
    unknown = [lang for lang in languages if lang not in LANGUAGES]
    if unknown:
        raise ConfigError(f"unsupported language(s) in config: {', '.join(unknown)}")

    corpus_paths = {}
    for lang, rel in (raw.get("corpus") or {}).items():
        lang = str(lang).lower()
        if lang not in languages:
            raise ConfigError(f"corpus entry for unlisted language {lang!r}")
        corpus_paths[lang] = _resolve(base, rel)

    label_scheme = dict(DEFAULT_LABELS)
    label_scheme.update(raw.get("label_scheme") or {})

    prompt_dir = raw.get("prompt_dir")
    if prompt_dir is not None:
        prompt_dir = _resolve(base, prompt_dir)

    prompts = tuple(raw.get("prompts", PROMPT_IDS))
    bad_prompts = [p for p in prompts if p not in PROMPT_IDS]
    if bad_prompts:
        raise ConfigError(f"unknown prompt id(s): {', '.join(bad_prompts)}")

    models = tuple(
        ModelEndpoint(id=str(m["id"]), endpoint=str(m["endpoint"]))
        for m in raw.get("models") or []
    )

    generation = GenerationConfig(**(raw.get("generation") or {}))

    checker = raw.get("checker") or {}
    checker_codes = dict(DEFAULT_LANGUAGE_CODES)
    checker_codes.update(checker.get("language_codes") or {})

    scorer = raw.get("scorer") or {}

    rounding = raw.get("rounding") or {}

    rules = raw.get("pattern_rules")

    config = RunConfig(
        languages=languages,
        corpus_paths=corpus_paths,
        label_scheme=label_scheme,
        prompt_dir=prompt_dir,
        prompts=prompts,
        models=models,
        generation=generation,
        checker_url=checker.get("url"),
        checker_language_codes=checker_codes,
        checker_version_pin=str(checker["version_pin"]) if checker.get("version_pin") else None,
        scorer_url=scorer.get("url"),
        output_dir=_resolve(base, raw.get("output_dir", "out")),
        request_concurrency=int(raw.get("concurrency", {}).get("requests", 4)),
        display_decimals=int(rounding.get("display_decimals", 3)),
        rank_on_rounded=bool(rounding.get("rank_on_rounded", False)),
        overall_mode=str(raw.get("overall_mode", "macro")),
        drift_threshold=float(raw.get("drift_threshold", -0.05)),
        drift_winner=str(raw.get("drift_winner", "nearest_zero")),
        pattern_rules_path=_resolve(base, rules) if rules else None,
        population_stddev=bool(raw.get("population_stddev", True)),
        api_token=os.environ.get(API_TOKEN_ENV),
        raw=raw,
    )
    return config


def validate_paths(config: RunConfig, need_corpus: bool = True) -> list[str]:
    """Collect human-readable validation problems (empty list means valid)."""
    problems = []
    if need_corpus:
        for lang in config.languages:
            if lang not in config.corpus_paths:
                problems.append(f"no corpus path configured for language {lang!r}")
        for lang, corpus_path in sorted(config.corpus_paths.items()):
            if not corpus_path.is_file():
                problems.append(f"corpus file for {lang!r} not found: {corpus_path}")
    if config.prompt_dir is not None and not config.prompt_dir.is_dir():
        problems.append(f"prompt_dir not found: {config.prompt_dir}")
    if config.pattern_rules_path is not None and not config.pattern_rules_path.is_file():
        problems.append(f"pattern rules file not found: {config.pattern_rules_path}")
    return problems


def _resolve(base: Path, rel) -> Path:
    p = Path(rel)
    return p if p.is_absolute() else (base / p)


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir: str | Path, config: RunConfig,
                   checker_version: str | None = None,
                   scorer_versions: dict | None = None) -> Path:
    """Record what produced this output directory (no timestamps: manifests
    of identical runs must be byte-identical). Later stages keep the service
    versions an earlier stage recorded."""
    from . import __version__

    out_path = Path(out_dir) / "manifest.json"
    previous = {}
    if out_path.is_file():
        with open(out_path, encoding="utf-8") as handle:
            previous = json.load(handle)
    manifest = {
        "harness_version": __version__,
        "config_hash": config.config_hash(),
        "corpus_sha256": {
            lang: file_sha256(p) for lang, p in sorted(config.corpus_paths.items()) if p.is_file()
        },
        "checker_version": checker_version or previous.get("checker_version"),
        "scorer_versions": scorer_versions or previous.get("scorer_versions") or {},
    }
    with open(out_path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True, ensure_ascii=False)
        handle.write("\n")
    return out_path
