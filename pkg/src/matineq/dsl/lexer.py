"""Tokenizer for the inequality language."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import MatIneqError

KEYWORDS = frozenset({"gm", "lam", "sig", "sqrt", "inv", "t", "loewner"})
FUNCTIONS = frozenset({"gm", "lam", "sig", "sqrt", "inv"})

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9]*")
_OPERATORS = (">=", "+", "-", "*", "^", "'", "♯")


class DslError(MatIneqError):
    """Any lexical, syntactic, typing or evaluation error in a statement."""

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{message}{where}")
        self.bare_message = message


class DslSyntaxError(DslError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # identifier | number | operator | paren | comma | keyword | end
    text: str
    pos: int


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens (maximal munch); ``#`` starts a comment.

    The returned list always ends with an ``end`` token.
    """
    tokens: list[Token] = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "#":
            j = source.find("\n", i)
            i = n if j < 0 else j
            continue
        if ch in "()":
            tokens.append(Token("paren", ch, i))
            i += 1
            continue
        if ch == ",":
            tokens.append(Token("comma", ch, i))
            i += 1
            continue
        m = _NUMBER.match(source, i)
        if m:
            tokens.append(Token("number", m.group(), i))
            i = m.end()
            continue
        m = _IDENT.match(source, i)
        if m:
            word = m.group()
            tokens.append(Token("keyword" if word in KEYWORDS else "identifier", word, i))
            i = m.end()
            continue
        for op in _OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token("operator", op, i))
                i += len(op)
                break
        else:
            raise DslSyntaxError(f"illegal character {ch!r}", i)
    tokens.append(Token("end", "", n))
    return tokens
