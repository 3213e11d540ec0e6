"""A small language for spectral matrix inequalities.

>>> from matineq.dsl import parse, evaluate
>>> import numpy as np
>>> stmt = parse("lam(A+B) >= 2*sqrt(sig(A*B))")
>>> evaluate(stmt, {"A": np.diag([4.0, 1.0]), "B": np.diag([1.0, 4.0])}).margins
array([1., 1.])
"""

from .ast import FORALL_J_GEQ, LOEWNER_GEQ, Statement, to_source
from .catalogue import NATIVE, PD_ONLY, SOURCES, bindings_for, builtin_catalogue, catalogue_file_text
from .evaluate import DslEvalError, evaluate
from .lexer import DslError, DslSyntaxError, Token, tokenize
from .parser import DslTypeError, parse, parse_expr


def parse_file(text: str) -> list[tuple[int, Statement]]:
    """Parse one statement per non-blank line; ``#`` starts a comment.

    Returns ``(line_number, statement)`` pairs. Errors carry the line number
    in their message.
    """
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.split("#", 1)[0].strip():
            continue
        try:
            out.append((lineno, parse(line)))
        except DslError as exc:
            raise type(exc)(f"line {lineno}: {exc.bare_message}", exc.pos) from exc
    return out


__all__ = [
    "FORALL_J_GEQ", "LOEWNER_GEQ", "NATIVE", "PD_ONLY", "SOURCES", "DslError",
    "DslEvalError", "DslSyntaxError", "DslTypeError", "Statement", "Token",
    "bindings_for", "builtin_catalogue", "catalogue_file_text", "evaluate", "parse",
    "parse_expr", "parse_file", "to_source", "tokenize",
]
