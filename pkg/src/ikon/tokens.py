"""Shared tokenizer.

One tokenizer serves both corpus relevance matching and linguistic
analysis so the two can never drift: words are maximal alphanumeric runs
(underscore excluded), sentences end at [.?!] followed by whitespace or
end of text. Deliberately naive: no abbreviation handling.
"""

from __future__ import annotations

import re

_WORD = re.compile(r"[^\W_]+", re.UNICODE)
_SENTENCE_END = re.compile(r"[.?!]+(?=\s|$)")


def words(text: str) -> list[str]:
    """All word tokens in order, punctuation dropped, casing preserved."""
    return _WORD.findall(text)


def words_lower(text: str) -> list[str]:
    return [w.lower() for w in _WORD.findall(text)]


def sentences(text: str) -> list[list[str]]:
    """Split into sentences, each a list of word tokens; empty sentences dropped."""
    out = []
    for chunk in _SENTENCE_END.split(text):
        toks = words(chunk)
        if toks:
            out.append(toks)
    return out
