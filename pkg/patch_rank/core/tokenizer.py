"""
Lexical tokenizer for JavaScript snippets.

Separates words and punctuation, keeping dot-joined member chains
(``this.bar``), string literals and numbers whole. Every other
non-whitespace character is its own token, so ``===`` becomes three tokens.
"""

from __future__ import annotations


import re

from patch_rank.core.models import TokenSequence

IDENTIFIER = r"[A-Za-z_$][A-Za-z0-9_$]*"

STRING_RE = re.compile(
    r"""
      "(?:[^"\\]|\\.)*"
    | '(?:[^'\\]|\\.)*'
    | `(?:[^`\\]|\\.)*`
    """,
    re.VERBOSE,
)
MEMBER_CHAIN_RE = re.compile(rf"{IDENTIFIER}(?:\.{IDENTIFIER})*")
NUMBER_RE = re.compile(r"[0-9]+(?:\.[0-9]+)?")
WHITESPACE_RE = re.compile(r"\s+")

QUOTES = frozenset("\"'`")


def _tokenize_line(line: str, tokens: list[str]) -> None:
    pos = 0
    end = len(line)
    while pos < end:
        ch = line[pos]
        if ch.isspace():
            pos += 1
            continue

        if ch in QUOTES:
            match = STRING_RE.match(line, pos)
            if match is None:
                # unterminated literal: the rest of the line goes out char by char
                tokens.extend(c for c in line[pos:] if not c.isspace())
                return
            tokens.append(WHITESPACE_RE.sub("", match.group()))
            pos = match.end()
            continue

        match = MEMBER_CHAIN_RE.match(line, pos) or NUMBER_RE.match(line, pos)
        if match is not None:
            tokens.append(match.group())
            pos = match.end()
            continue

        tokens.append(ch)
        pos += 1


def tokenize_text(text: str) -> list[str]:
    """Tokens of text in source order."""
    tokens: list[str] = []
    for line in text.split("\n"):
        _tokenize_line(line, tokens)
    return tokens


def tokenize(text: str, doc_id: str = "") -> TokenSequence:
    """
    Tokenize a code snippet.

    String literals keep their quotes; whitespace inside them is dropped so
    that no token contains whitespace and the token stream equals the text
    with all whitespace removed.
    """
    return TokenSequence(doc_id=doc_id, tokens=tuple(tokenize_text(text)))


def normalize_whitespace(text: str) -> str:
    """Remove every run of whitespace."""
    return WHITESPACE_RE.sub("", text)
