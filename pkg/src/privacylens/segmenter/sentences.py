"""Rule-based sentence splitter (terminators plus an abbreviation list)."""

import re

__all__ = ["split_sentences"]

# lowercase, without trailing period
_ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st",
    "e.g", "i.e", "etc", "vs", "cf", "al",
    "inc", "ltd", "llc", "co", "corp",
    "no", "nos", "approx", "dept", "est", "sec", "fig", "art",
    "u.s", "u.k", "e.u",
}

_CANDIDATE = re.compile(r"[.!?]+")


def _is_abbreviation(prefix):
    word = prefix.rsplit(" ", 1)[-1].lower()
    word = word.lstrip("(\"'")
    return word in _ABBREVIATIONS or (len(word) == 1 and word.isalpha())


def split_sentences(text):
    """Split on . ! ? runs, keeping the terminator with its sentence.

    A period does not end a sentence when it follows a known abbreviation
    or a single letter (initials), or when it sits between digits (3.5).
    Whitespace is normalized; an empty input yields [].
    """
    text = re.sub(r"\s+", " ", text).strip()
    if not text:
        return []
    sentences = []
    start = 0
    for match in _CANDIDATE.finditer(text):
        end = match.end()
        if end < len(text) and not text[end].isspace():
            continue  # mid-token punctuation (3.5 handled since no space follows)
        prefix = text[start : match.start()]
        if match.group().startswith(".") and _is_abbreviation(prefix):
            continue
        sentence = text[start:end].strip()
        if sentence:
            sentences.append(sentence)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences
