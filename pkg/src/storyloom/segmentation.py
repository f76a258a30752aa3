"""Deterministic sentence segmentation.

The rules are fixed and documented rather than linguistic:

* a sentence ends at ``.``, ``!`` or ``?`` followed by whitespace and an
  uppercase letter, or by the end of the text;
* terminators inside double quotes (straight or curly) do not split;
* a fixed abbreviation list (Mr., Mrs., Dr., St., e.g., i.e.) never ends a
  sentence;
* spans exclude surrounding whitespace, so the original text is exactly the
  spans joined back with the whitespace between them.
"""
from __future__ import annotations

from .model import SentenceSpan, sentence_hash

__all__ = ["segment_sentences", "ABBREVIATIONS"]

ABBREVIATIONS = frozenset({"mr.", "mrs.", "dr.", "st.", "e.g.", "i.e."})

_TERMINATORS = ".!?"
_WORD_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ.")


def _ends_with_abbreviation(text: str, dot_index: int) -> bool:
    start = dot_index
    while start > 0 and text[start - 1] in _WORD_CHARS:
        start -= 1
    word = text[start : dot_index + 1].casefold()
    return word in ABBREVIATIONS


def _is_boundary(text: str, i: int) -> bool:
    """True when the terminator at ``i`` ends a sentence."""
    j = i + 1
    if j == len(text):
        return True
    if not text[j].isspace():
        return False
    while j < len(text) and text[j].isspace():
        j += 1
    if j == len(text):
        return True
    if not text[j].isupper():
        return False
    if text[i] == "." and _ends_with_abbreviation(text, i):
        return False
    return True


def segment_sentences(text: str) -> tuple[SentenceSpan, ...]:
    """Split ``text`` into sentence spans. Empty text yields no spans."""
    spans: list[SentenceSpan] = []
    start: int | None = None
    in_quotes = False

    def close(end: int) -> None:
        nonlocal start
        assert start is not None and start < end
        spans.append(
            SentenceSpan(
                index=len(spans),
                char_start=start,
                char_end=end,
                text_hash=sentence_hash(text[start:end]),
            )
        )
        start = None

    for i, ch in enumerate(text):
        if start is None and not ch.isspace():
            start = i
        if ch == '"':
            in_quotes = not in_quotes
        elif ch == "“":  # opening curly quote
            in_quotes = True
        elif ch == "”":  # closing curly quote
            in_quotes = False
        if ch in _TERMINATORS and not in_quotes and start is not None and _is_boundary(text, i):
            close(i + 1)

    if start is not None:
        end = len(text)
        while end > start and text[end - 1].isspace():
            end -= 1
        if end > start:
            close(end)
    return tuple(spans)
