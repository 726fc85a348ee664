"""Word tokenizer shared by the GLEU and length-difference metrics.

One pinned rule set for all four languages: split on whitespace, then peel
punctuation off both ends of each chunk as separate tokens. Interior
apostrophes and hyphens stay inside the word.
"""

# Characters peeled off chunk edges. Interior occurrences are kept.
_PUNCT = set(".,;:!?%\"'()[]{}«»„“”‘’…¿¡-–—/\\")


def word_tokenize(text: str) -> list[str]:
    """Split text into word and punctuation tokens.

    Runs of identical punctuation ("...", "!!") stay together as one token;
    mixed punctuation is emitted char by char.
    """
    tokens: list[str] = []
    for chunk in text.split():
        tokens.extend(_split_chunk(chunk))
    return tokens


def _split_chunk(chunk: str) -> list[str]:
    leading: list[str] = []
    while chunk and chunk[0] in _PUNCT:
        if leading and leading[-1][-1] == chunk[0]:
            leading[-1] += chunk[0]
        else:
            leading.append(chunk[0])
        chunk = chunk[1:]
    trailing: list[str] = []
    while chunk and chunk[-1] in _PUNCT:
        if trailing and trailing[-1][0] == chunk[-1]:
            trailing[-1] = chunk[-1] + trailing[-1]
        else:
            trailing.append(chunk[-1])
        chunk = chunk[:-1]
    middle = [chunk] if chunk else []
    return leading + middle + list(reversed(trailing))
