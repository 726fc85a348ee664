import pytest

from gecscope.config import API_TOKEN_ENV, ConfigError, load_config, validate_paths, write_manifest


def write_config(tmp_path, text):
    path = tmp_path / "config.yaml"
    path.write_text(text, encoding="utf-8")
    return path


def test_minimal_config_defaults(tmp_path):
    config = load_config(write_config(tmp_path, "output_dir: out\n"))
    assert config.languages == ("en", "de", "it", "sv")
    assert config.prompts == ("P1", "P2", "P3")
    assert config.generation.max_new_tokens == 256
    assert config.overall_mode == "macro"
    assert config.drift_threshold == -0.05
    assert config.rank_on_rounded is False


def test_paths_resolve_relative_to_config(tmp_path):
    (tmp_path / "data").mkdir()
    (tmp_path / "data" / "en.tsv").write_text("a\tc\n\n", encoding="utf-8")
    config = load_config(write_config(tmp_path, "languages: [en]\ncorpus:\n  en: data/en.tsv\n"))
    assert config.corpus_paths["en"].is_file()
    assert validate_paths(config) == []


def test_missing_corpus_reported(tmp_path):
    config = load_config(write_config(tmp_path, "languages: [en]\ncorpus:\n  en: nowhere.tsv\n"))
    problems = validate_paths(config)
    assert problems and "nowhere.tsv" in problems[0]


def test_unknown_language_rejected(tmp_path):
    with pytest.raises(ConfigError, match="cz"):
        load_config(write_config(tmp_path, "languages: [en, cz]\n"))


def test_corpus_for_unlisted_language_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, "languages: [en]\ncorpus:\n  de: x.tsv\n"))


def test_unknown_prompt_rejected(tmp_path):
    with pytest.raises(ConfigError, match="P9"):
        load_config(write_config(tmp_path, "prompts: [P1, P9]\n"))


def test_generation_overrides(tmp_path):
    config = load_config(write_config(tmp_path, "generation:\n  top_p: 0.5\n"))
    assert config.generation.top_p == 0.5
    assert config.generation.top_k == 40


def test_api_token_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(API_TOKEN_ENV, "secret-token")
    config = load_config(write_config(tmp_path, "output_dir: out\n"))
    assert config.api_token == "secret-token"
    assert "secret-token" not in repr(config)


def test_config_hash_stable_and_sensitive(tmp_path):
    a = load_config(write_config(tmp_path, "output_dir: out\n"))
    b = load_config(write_config(tmp_path, "output_dir: out\n"))
    assert a.config_hash() == b.config_hash()
    c = load_config(write_config(tmp_path, "output_dir: elsewhere\n"))
    assert a.config_hash() != c.config_hash()


def test_manifest_deterministic_and_merging(tmp_path):
    (tmp_path / "en.tsv").write_text("a\tc\n\n", encoding="utf-8")
    config = load_config(write_config(tmp_path, "languages: [en]\ncorpus:\n  en: en.tsv\n"))
    out = tmp_path / "out"
    out.mkdir()
    first = write_manifest(out, config, checker_version="6.4")
    bytes_with_version = first.read_bytes()
    write_manifest(out, config)  # later stage without version info
    assert first.read_bytes() == bytes_with_version
