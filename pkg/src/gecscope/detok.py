"""Moses-style detokenizer for English, German, Italian and Swedish.

Joins a token sequence back into surface text by deciding spacing only;
token characters are never altered. Covers the core Moses rules: closing
punctuation attaches left, opening brackets attach right, paired straight
quotes alternate, English apostrophe contractions attach left, and
Italian-style elisions (token ending in an apostrophe) swallow the space
that follows them.
"""

import re

# Tokens made only of these characters attach to the preceding word.
_LEFT_ATTACH = re.compile(r"^[,.:;!?%…)\]}»”’]+$")
# Tokens made only of these characters attach to the following word.
# The German low-9 quote has its own pairing branch below.
_RIGHT_ATTACH = re.compile(r"^[$(\[{«‘¿¡]+$")

_ALPHA = re.compile(r"[^\W\d_]", re.UNICODE)

# Languages where a token ending in an apostrophe is an elided article or
# preposition ("l'", "dell'") and binds to the next word.
_ELISION_LANGS = {"it"}


def detokenize(tokens: list[str], language: str) -> str:
    """Reconstruct a single line of text from tokens.

    The output carries every token's characters in the original order and
    differs from a plain space-join only in the whitespace placed between
    tokens.
    """
    if not tokens:
        raise ValueError("cannot detokenize an empty token list")
    lang = language.strip().lower()
    parts: list[str] = []
    prepend_space = ""
    quote_open: dict[str, bool] = {}
    open_low9 = 0  # unmatched German low-9 quotes awaiting a closing one

    for i, token in enumerate(tokens):
        if _LEFT_ATTACH.match(token):
            parts.append(token)
            prepend_space = " "
        elif _RIGHT_ATTACH.match(token):
            parts.append(prepend_space + token)
            prepend_space = ""
        elif token == "„":
            open_low9 += 1
            parts.append(prepend_space + token)
            prepend_space = ""
        elif token == "“":
            # Closes a German low-9 quote when one is open, else opens.
            if open_low9 > 0:
                open_low9 -= 1
                parts.append(token)
                prepend_space = " "
            else:
                parts.append(prepend_space + token)
                prepend_space = ""
        elif token in ("'", '"', "''", "``"):
            if lang == "en" and token == "'" and parts and parts[-1].endswith("s"):
                # trailing possessive: the boys ' -> the boys'
                parts.append(token)
                prepend_space = " "
            elif quote_open.get(token, False):
                quote_open[token] = False
                parts.append(token)
                prepend_space = " "
            else:
                quote_open[token] = True
                parts.append(prepend_space + token)
                prepend_space = ""
        elif lang == "en" and i > 0 and token[0] == "'" and len(token) > 1 and _ALPHA.match(token[1]):
            # contraction suffix: It 's -> It's
            parts.append(token)
            prepend_space = " "
        else:
            parts.append(prepend_space + token)
            prepend_space = " "
        if lang in _ELISION_LANGS and token.endswith("'") and not _LEFT_ATTACH.match(token):
            # l' acqua -> l'acqua
            prepend_space = ""

    return "".join(parts).strip()
