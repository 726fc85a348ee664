#!/usr/bin/env python3
"""Generate synthetic MultiGED-format dev fixtures.

The real dev sets cannot be redistributed with this repository, so the test
fixtures are statistical twins: same file format (token<TAB>label, blank
line between sentences), same sentence and correct-sentence counts, and
token-count distributions whose per-language mean/stddev match the
published dataset summary to well under the acceptance tolerances.

Deterministic: a fixed seed always reproduces byte-identical files.
Run from the repository root:  python3 scripts/make_synthetic_multiged.py
"""

import math
import random
from pathlib import Path

SEED = 20240917
OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "data" / "multiged"

# language: (sentences, correct sentences, mean tokens, population stddev)
TARGETS = {
    "en": (2191, 906, 15.90, 10.97),
    "de": (2503, 619, 15.81, 9.46),
    "it": (758, 268, 11.98, 7.61),
    "sv": (911, 199, 17.25, 11.43),
}

MIN_TOKENS, MAX_TOKENS = 1, 120

VOWELS = {
    "en": "aeiou",
    "de": "aeiouäöü",
    "it": "aeio",
    "sv": "aeiouåäö",
}
CONSONANTS = {
    "en": "bcdfghlmnprstwv",
    "de": "bdfghklmnprstwz",
    "it": "bcdflmnprstvz",
    "sv": "bdfghjklmnprstv",
}
FUNCTION_WORDS = {
    "en": ["the", "a", "and", "to", "of", "in", "was", "that", "it", "for", "with", "on"],
    "de": ["der", "die", "das", "und", "in", "zu", "mit", "auf", "ist", "ein", "nicht", "von"],
    "it": ["il", "la", "di", "che", "e", "un", "una", "per", "non", "con", "sono", "del"],
    "sv": ["och", "att", "det", "som", "en", "på", "är", "av", "för", "med", "den", "inte"],
}


def make_counts(rng: random.Random, n: int, mean: float, stddev: float) -> list[int]:
    """Integer token counts with exact target sum and sum of squares."""
    target_sum = round(n * mean)
    mu_hat = target_sum / n
    target_ss = round(n * (stddev ** 2 + mu_hat ** 2))
    if (target_ss - target_sum) % 2:  # x^2 == x (mod 2) forces ss parity
        target_ss += 1

    sigma_log = math.sqrt(math.log(1.0 + (stddev / mean) ** 2))
    mu_log = math.log(mean) - sigma_log ** 2 / 2.0
    counts = [
        min(MAX_TOKENS, max(MIN_TOKENS, round(math.exp(rng.gauss(mu_log, sigma_log)))))
        for _ in range(n)
    ]

    # Repair the sum with single-unit moves.
    delta = target_sum - sum(counts)
    while delta != 0:
        i = rng.randrange(n)
        if delta > 0 and counts[i] < MAX_TOKENS:
            counts[i] += 1
            delta -= 1
        elif delta < 0 and counts[i] > MIN_TOKENS:
            counts[i] -= 1
            delta += 1

    # Repair the sum of squares with sum-preserving pair moves:
    # (x_i+1, x_j-1) changes ss by 2*(x_i - x_j) + 2.
    ss = sum(c * c for c in counts)
    guard = 0
    while ss != target_ss:
        guard += 1
        if guard > 2_000_000:
            raise RuntimeError("sum-of-squares repair did not converge")
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        need = target_ss - ss
        move = 2 * (counts[i] - counts[j]) + 2
        if need > 0:
            if 0 < move <= need and counts[i] < MAX_TOKENS and counts[j] > MIN_TOKENS:
                counts[i] += 1
                counts[j] -= 1
                ss += move
        else:
            if need <= move < 0 and counts[i] < MAX_TOKENS and counts[j] > MIN_TOKENS:
                counts[i] += 1
                counts[j] -= 1
                ss += move
    return counts


def make_word(rng: random.Random, lang: str) -> str:
    if rng.random() < 0.4:
        return rng.choice(FUNCTION_WORDS[lang])
    vowels, consonants = VOWELS[lang], CONSONANTS[lang]
    syllables = rng.randint(1, 3)
    word = "".join(rng.choice(consonants) + rng.choice(vowels) for _ in range(syllables))
    if rng.random() < 0.3:
        word += rng.choice(consonants)
    if lang == "de" and rng.random() < 0.35:
        word = word.capitalize()
    return word


def make_tokens(rng: random.Random, lang: str, count: int) -> list[str]:
    tokens = [make_word(rng, lang) for _ in range(count)]
    if count >= 2 and rng.random() < 0.92:
        tokens[-1] = rng.choices([".", "!", "?"], weights=[86, 7, 7])[0]
    if count >= 8:
        for pos in range(3, count - 2, 5):
            if rng.random() < 0.35:
                tokens[pos] = ","
    if lang == "en" and count >= 4 and rng.random() < 0.06:
        tokens[rng.randrange(1, count - 1)] = "'s"
    if lang == "it" and count >= 4 and rng.random() < 0.08:
        tokens[rng.randrange(0, count - 2)] = "l'"
    if count >= 6 and rng.random() < 0.04:
        left = rng.randrange(1, count - 3)
        tokens[left] = '"'
        tokens[left + 2] = '"'
    tokens[0] = tokens[0].capitalize() if tokens[0][0].isalpha() else tokens[0]
    return tokens


def write_language(lang: str, out_dir: Path) -> None:
    n, n_correct, mean, stddev = TARGETS[lang]
    rng = random.Random(f"{SEED}-{lang}")
    counts = make_counts(rng, n, mean, stddev)
    correct_idx = set(rng.sample(range(n), n_correct))
    lines: list[str] = []
    for idx, count in enumerate(counts):
        tokens = make_tokens(rng, lang, count)
        labels = ["c"] * count
        if idx not in correct_idx:
            for pos in rng.sample(range(count), min(count, rng.randint(1, 3))):
                labels[pos] = "i"
        lines.extend(f"{token}\t{label}" for token, label in zip(tokens, labels))
        lines.append("")
    out_path = out_dir / f"{lang}_dev.tsv"
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    total = sum(counts)
    ss = sum(c * c for c in counts)
    mu = total / n
    sigma = math.sqrt(ss / n - mu * mu)
    print(f"{lang}: {n} sentences, {n_correct} correct, mean {mu:.4f} (target {mean}), "
          f"stddev {sigma:.4f} (target {stddev}) -> {out_path}")


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for lang in TARGETS:
        write_language(lang, OUT_DIR)


if __name__ == "__main__":
    main()
