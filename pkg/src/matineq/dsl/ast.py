"""AST node types and the canonical printer.

Every node carries its sort (``"scalar"``, ``"matrix"`` or ``"vector"``),
fixed when the parser builds it. Source positions are excluded from
equality so ``parse(to_source(s)) == s`` holds structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

SCALAR, MATRIX, VECTOR = "scalar", "matrix", "vector"
FORALL_J_GEQ = "forall_j_geq"
LOEWNER_GEQ = "loewner_geq"


@dataclass(frozen=True)
class Expr:
    pos: int = field(default=-1, compare=False, repr=False, kw_only=True)

    @property
    def sort(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class MatVar(Expr):
    name: str

    @property
    def sort(self):
        return MATRIX


@dataclass(frozen=True)
class ScalarLit(Expr):
    value: float

    @property
    def sort(self):
        return SCALAR


@dataclass(frozen=True)
class ParamT(Expr):
    @property
    def sort(self):
        return SCALAR


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    @property
    def sort(self):
        return self.left.sort


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr

    @property
    def sort(self):
        return self.left.sort


@dataclass(frozen=True)
class ScalarMul(Expr):
    """Scalar times scalar or scalar times matrix."""

    scalar: Expr
    operand: Expr

    @property
    def sort(self):
        return self.operand.sort


@dataclass(frozen=True)
class MatMul(Expr):
    left: Expr
    right: Expr

    @property
    def sort(self):
        return MATRIX


@dataclass(frozen=True)
class Adjoint(Expr):
    operand: Expr

    @property
    def sort(self):
        return MATRIX


@dataclass(frozen=True)
class Power(Expr):
    base: Expr
    exponent: Expr

    @property
    def sort(self):
        return MATRIX


@dataclass(frozen=True)
class Gm(Expr):
    left: Expr
    right: Expr

    @property
    def sort(self):
        return MATRIX


@dataclass(frozen=True)
class Inv(Expr):
    operand: Expr

    @property
    def sort(self):
        return MATRIX


@dataclass(frozen=True)
class Lam(Expr):
    operand: Expr

    @property
    def sort(self):
        return VECTOR


@dataclass(frozen=True)
class Sig(Expr):
    operand: Expr

    @property
    def sort(self):
        return VECTOR


@dataclass(frozen=True)
class VecSqrt(Expr):
    operand: Expr

    @property
    def sort(self):
        return VECTOR


@dataclass(frozen=True)
class VecScale(Expr):
    scalar: Expr
    operand: Expr

    @property
    def sort(self):
        return VECTOR


@dataclass(frozen=True)
class Statement:
    lhs: Expr
    relation: str
    rhs: Expr

    def __str__(self):
        return to_source(self)


# -- printer ------------------------------------------------------------------

_ADDITIVE = (Add, Sub)
_MULTIPLICATIVE = (ScalarMul, MatMul, VecScale)


def _fmt_number(x: float) -> str:
    return repr(float(x))


def _atom(e: Expr) -> str:
    """Render ``e`` so it can be the base of a postfix operator."""
    s = _expr(e)
    if isinstance(e, (MatVar, ParamT, Gm, Inv, Lam, Sig, VecSqrt, Power, Adjoint)):
        return s
    if isinstance(e, ScalarLit) and e.value >= 0:
        return s
    return f"({s})"


def _exponent(e: Expr) -> str:
    if isinstance(e, ScalarLit):
        return _fmt_number(e.value)
    if isinstance(e, ParamT):
        return "t"
    return f"({_expr(e)})"


def _expr(e: Expr) -> str:
    if isinstance(e, MatVar):
        return e.name
    if isinstance(e, ScalarLit):
        return _fmt_number(e.value)
    if isinstance(e, ParamT):
        return "t"
    if isinstance(e, _ADDITIVE):
        op = "+" if isinstance(e, Add) else "-"
        right = _expr(e.right)
        if isinstance(e.right, _ADDITIVE):
            right = f"({right})"
        return f"{_expr(e.left)} {op} {right}"
    if isinstance(e, _MULTIPLICATIVE):
        left, right = (e.left, e.right) if isinstance(e, MatMul) else (e.scalar, e.operand)
        ls, rs = _expr(left), _expr(right)
        if isinstance(left, _ADDITIVE):
            ls = f"({ls})"
        if isinstance(right, _ADDITIVE + _MULTIPLICATIVE):
            rs = f"({rs})"
        return f"{ls}*{rs}"
    if isinstance(e, Power):
        return f"{_atom(e.base)}^{_exponent(e.exponent)}"
    if isinstance(e, Adjoint):
        return f"{_atom(e.operand)}'"
    if isinstance(e, Gm):
        return f"gm({_expr(e.left)}, {_expr(e.right)})"
    if isinstance(e, Inv):
        return f"inv({_expr(e.operand)})"
    if isinstance(e, Lam):
        return f"lam({_expr(e.operand)})"
    if isinstance(e, Sig):
        return f"sig({_expr(e.operand)})"
    if isinstance(e, VecSqrt):
        return f"sqrt({_expr(e.operand)})"
    raise TypeError(f"unknown node {e!r}")


def to_source(node) -> str:
    """Canonical source text for a statement or expression."""
    if isinstance(node, Statement):
        rel = ">=" if node.relation == FORALL_J_GEQ else ">=loewner"
        return f"{_expr(node.lhs)} {rel} {_expr(node.rhs)}"
    return _expr(node)
