"""Rule-based tokenizer shared by the classifiers and the embedding trainer.

The rules approximate Treebank conventions and are fixed so tests can assert
exact outputs:

1. lowercase the text;
2. detach ``. , ; : ! ? " ( ) [ ] { }`` as standalone tokens, except a
   ``.`` or ``,`` sitting between two digits (keeps ``3.5`` and ``1,000``);
3. split a trailing ``n't`` into its own token (``can't`` -> ``ca n't``);
4. split the clitics ``'s 're 've 'll 'd 'm`` into their own tokens;
5. split on whitespace.

Hyphenated terms (``opt-out``) stay single tokens. The function is
idempotent over its own re-joined output.
"""

import re

__all__ = ["tokenize"]

_PUNCT = re.compile(r"(?<![0-9])([.,;:!?\"()\[\]{}])|([.,;:!?\"()\[\]{}])(?![0-9])")
_NT = re.compile(r"(?<=[a-z])(n't)\b")
_CLITIC = re.compile(r"(?<=[a-z0-9])('(?:s|re|ve|ll|d|m))\b")


def tokenize(text):
    """Lowercased token list per the module rule table; empty text gives []."""
    if not text:
        return []
    s = text.lower()
    s = _PUNCT.sub(lambda m: f" {m.group(1) or m.group(2)} ", s)
    s = _NT.sub(r" \1", s)
    s = _CLITIC.sub(r" \1", s)
    return s.split()
