"""Recursive-descent parser with sort inference.

Grammar::

    statement := expr ">=" expr | expr ">=" "loewner" expr
    expr      := term (("+" | "-") term)*
    term      := factor (("*" | "♯") factor)*
    factor    := primary ("^" exponent | "'")*
    exponent  := ["-"|"+"] number | "t" | "(" expr ")"
    primary   := number | identifier | "t" | func "(" expr ("," expr)? ")" | "(" expr ")"
    func      := "gm" | "lam" | "sig" | "sqrt" | "inv"

Each node's sort is decided as it is built; ill-sorted input raises
:class:`DslTypeError` before any numeric work can happen.
"""

from __future__ import annotations

from .ast import (
    FORALL_J_GEQ, LOEWNER_GEQ, MATRIX, SCALAR, VECTOR,
    Add, Adjoint, Expr, Gm, Inv, Lam, MatMul, MatVar, ParamT, Power, ScalarLit,
    ScalarMul, Sig, Statement, Sub, VecScale, VecSqrt,
)
from .lexer import DslError, DslSyntaxError, Token, tokenize

MAX_DEPTH = 100
_ARITY = {"gm": 2, "lam": 1, "sig": 1, "sqrt": 1, "inv": 1}


class DslTypeError(DslError):
    pass


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0
        self.depth = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "end":
            self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "end"

    def expect(self, text: str, what: str | None = None) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise DslSyntaxError(f"expected {what or repr(text)}, found {found!r}", self.tok.pos)
        return self.advance()

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise DslSyntaxError("expression nested too deeply", self.tok.pos)

    # -- grammar ----------------------------------------------------------

    def statement(self) -> Statement:
        lhs = self.expr()
        op = self.expect(">=", "'>=' or '>=loewner'")
        relation = FORALL_J_GEQ
        if self.tok.kind == "keyword" and self.tok.text == "loewner":
            self.advance()
            relation = LOEWNER_GEQ
        rhs = self.expr()
        if self.tok.kind != "end":
            raise DslSyntaxError(f"unexpected {self.tok.text!r} after statement", self.tok.pos)
        want = VECTOR if relation == FORALL_J_GEQ else MATRIX
        for side, name in ((lhs, "left"), (rhs, "right")):
            if side.sort != want:
                kind = "'>='" if relation == FORALL_J_GEQ else "'>=loewner'"
                raise DslTypeError(f"{kind} needs {want}-valued sides; {name} side is {side.sort}",
                                   side.pos if side.pos >= 0 else op.pos)
        return Statement(lhs, relation, rhs)

    def expr(self) -> Expr:
        self.enter()
        left = self.term()
        while self.tok.kind == "operator" and self.tok.text in "+-":
            op = self.advance()
            right = self.term()
            if left.sort != right.sort:
                raise DslTypeError(f"cannot combine {left.sort} and {right.sort} with {op.text!r}", op.pos)
            if left.sort == VECTOR:
                raise DslTypeError("vector addition is not supported", op.pos)
            node = Add if op.text == "+" else Sub
            left = node(left, right, pos=left.pos)
        self.depth -= 1
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.tok.kind == "operator" and self.tok.text in ("*", "♯"):
            op = self.advance()
            right = self.factor()
            if op.text == "♯":
                left = self._gm(left, right, op.pos)
            else:
                left = self._mul(left, right, op.pos)
        return left

    @staticmethod
    def _mul(left: Expr, right: Expr, pos: int) -> Expr:
        ls, rs = left.sort, right.sort
        if ls == SCALAR and rs in (SCALAR, MATRIX):
            return ScalarMul(left, right, pos=left.pos)
        if ls == MATRIX and rs == SCALAR:
            return ScalarMul(right, left, pos=left.pos)
        if ls == MATRIX and rs == MATRIX:
            return MatMul(left, right, pos=left.pos)
        if ls == SCALAR and rs == VECTOR:
            return VecScale(left, right, pos=left.pos)
        if ls == VECTOR and rs == SCALAR:
            return VecScale(right, left, pos=left.pos)
        raise DslTypeError(f"cannot multiply {ls} by {rs}", pos)

    @staticmethod
    def _gm(left: Expr, right: Expr, pos: int) -> Expr:
        if left.sort != MATRIX or right.sort != MATRIX:
            raise DslTypeError("gm needs matrix arguments", pos)
        return Gm(left, right, pos=left.pos)

    def factor(self) -> Expr:
        base = self.primary()
        while self.tok.kind == "operator" and self.tok.text in ("^", "'"):
            op = self.advance()
            if base.sort != MATRIX:
                raise DslTypeError(f"{op.text!r} applies to matrices, not {base.sort}", op.pos)
            if op.text == "'":
                base = Adjoint(base, pos=base.pos)
            else:
                base = Power(base, self.exponent(), pos=base.pos)
        return base

    def exponent(self) -> Expr:
        tok = self.tok
        if tok.kind == "operator" and tok.text in "+-":
            self.advance()
            num = self.expect_number()
            value = float(num.text)
            return ScalarLit(-value if tok.text == "-" else value, pos=tok.pos)
        if tok.kind == "number":
            self.advance()
            return ScalarLit(float(tok.text), pos=tok.pos)
        if tok.kind == "keyword" and tok.text == "t":
            self.advance()
            return ParamT(pos=tok.pos)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            if e.sort != SCALAR:
                raise DslTypeError(f"exponent must be scalar, got {e.sort}", tok.pos)
            return e
        raise DslSyntaxError("expected exponent (number, 't' or parenthesized scalar)", tok.pos)

    def expect_number(self) -> Token:
        if self.tok.kind != "number":
            raise DslSyntaxError("expected number", self.tok.pos)
        return self.advance()

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return ScalarLit(float(tok.text), pos=tok.pos)
        if tok.kind == "identifier":
            self.advance()
            return MatVar(tok.text, pos=tok.pos)
        if tok.kind == "keyword" and tok.text == "t":
            self.advance()
            return ParamT(pos=tok.pos)
        if tok.kind == "keyword" and tok.text in _ARITY:
            return self.call()
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        found = tok.text or "end of input"
        raise DslSyntaxError(f"expected an operand, found {found!r}", tok.pos)

    def call(self) -> Expr:
        name = self.advance()
        self.expect("(", f"'(' after {name.text}")
        args = [self.expr()]
        while self.tok.kind == "comma":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) != _ARITY[name.text]:
            raise DslSyntaxError(
                f"{name.text} takes {_ARITY[name.text]} argument(s), got {len(args)}", name.pos)
        return self._apply(name, args)

    def _apply(self, name: Token, args: list[Expr]) -> Expr:
        fn, pos = name.text, name.pos
        a = args[0]
        if fn == "gm":
            return self._gm(args[0], args[1], pos)
        if fn == "sqrt":
            if a.sort == VECTOR:
                return VecSqrt(a, pos=pos)
            if a.sort == MATRIX:
                return Power(a, ScalarLit(0.5, pos=pos), pos=pos)
            raise DslTypeError("sqrt of a scalar is not supported", pos)
        if a.sort != MATRIX:
            raise DslTypeError(f"{fn} needs a matrix argument, got {a.sort}", pos)
        return {"lam": Lam, "sig": Sig, "inv": Inv}[fn](a, pos=pos)


def parse(source) -> Statement:
    """Parse a statement from source text or a token list."""
    tokens = tokenize(source) if isinstance(source, str) else list(source)
    if not tokens or tokens[-1].kind != "end":
        end = tokens[-1].pos + len(tokens[-1].text) if tokens else 0
        tokens.append(Token("end", "", end))
    return _Parser(tokens).statement()


def parse_expr(source: str) -> Expr:
    p = _Parser(tokenize(source))
    e = p.expr()
    if p.tok.kind != "end":
        raise DslSyntaxError(f"unexpected {p.tok.text!r}", p.tok.pos)
    return e
