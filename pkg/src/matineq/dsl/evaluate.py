"""Numeric evaluation of parsed statements.

Matrix values stay symbolic while they are powers of bound PSD variables or
a product of two such powers; ``lam``/``sig`` of a product then use the
same factored kernels as the native checks, so DSL margins reproduce the
native ones to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .. import linalg as la
from ..errors import MatIneqError
from ..inequalities import InequalityResult
from .ast import (
    FORALL_J_GEQ, Add, Adjoint, Expr, Gm, Inv, Lam, MatMul, MatVar, ParamT, Power,
    ScalarLit, ScalarMul, Sig, Statement, Sub, VecScale, VecSqrt,
)
from .lexer import DslError


class DslEvalError(DslError):
    pass


@dataclass(frozen=True, eq=False)
class _PsdPow:
    base: NDArray
    power: float

    def dense(self) -> NDArray:
        return la.matrix_power(self.base, self.power)


@dataclass(frozen=True, eq=False)
class _Product:
    left: _PsdPow
    right: _PsdPow

    def dense(self) -> NDArray:
        return self.left.dense() @ self.right.dense()


def _dense(v) -> NDArray:
    if isinstance(v, (_PsdPow, _Product)):
        return v.dense()
    return v


def _shape(v) -> tuple[int, int]:
    if isinstance(v, _PsdPow):
        return v.base.shape
    if isinstance(v, _Product):
        return v.left.base.shape
    return v.shape


class _Evaluator:
    def __init__(self, bindings: Mapping[str, ArrayLike], t: float, tolerance: float):
        self.raw = {k: np.asarray(v) for k, v in bindings.items()}
        self.t = float(t)
        self.tol = tolerance
        self.cache: dict[str, object] = {}

    def var(self, node: MatVar):
        if node.name in self.cache:
            return self.cache[node.name]
        if node.name not in self.raw:
            raise DslEvalError(f"unbound variable {node.name!r}", node.pos)
        M = self.raw[node.name]
        if M.ndim == 0:
            M = M.reshape(1, 1)
        if M.ndim != 2:
            raise DslEvalError(f"variable {node.name!r} is not a matrix", node.pos)
        value = M
        if M.shape[0] == M.shape[1] and M.shape[0] > 0:
            H = la.hermitian(M)
            if np.linalg.norm(M - H) <= la.tol(M) and la.is_psd(H):
                value = _PsdPow(H, 1.0)
        self.cache[node.name] = value
        return value

    def same_shape(self, a, b, node: Expr):
        if _shape(a) != _shape(b):
            raise DslEvalError(f"dimension mismatch {_shape(a)} vs {_shape(b)}", node.pos)

    def square(self, v, node: Expr) -> None:
        r, c = _shape(v)
        if r != c:
            raise DslEvalError(f"square matrix required, got {r}x{c}", node.pos)

    def ev(self, e: Expr):
        if isinstance(e, ScalarLit):
            return e.value
        if isinstance(e, ParamT):
            return self.t
        if isinstance(e, MatVar):
            return self.var(e)
        if isinstance(e, (Add, Sub)):
            a, b = self.ev(e.left), self.ev(e.right)
            if isinstance(a, float):
                return a + b if isinstance(e, Add) else a - b
            self.same_shape(a, b, e)
            a, b = _dense(a), _dense(b)
            return a + b if isinstance(e, Add) else a - b
        if isinstance(e, ScalarMul):
            s, v = self.ev(e.scalar), self.ev(e.operand)
            return s * v if isinstance(v, float) else s * _dense(v)
        if isinstance(e, VecScale):
            return self.ev(e.scalar) * self.ev(e.operand)
        if isinstance(e, MatMul):
            a, b = self.ev(e.left), self.ev(e.right)
            if _shape(a)[1] != _shape(b)[0]:
                raise DslEvalError(f"dimension mismatch {_shape(a)} @ {_shape(b)}", e.pos)
            if isinstance(a, _PsdPow) and isinstance(b, _PsdPow):
                return _Product(a, b)
            return _dense(a) @ _dense(b)
        if isinstance(e, Adjoint):
            v = self.ev(e.operand)
            if isinstance(v, _PsdPow):
                return v
            if isinstance(v, _Product):
                return _Product(v.right, v.left)
            return v.conj().T
        if isinstance(e, Power):
            return self.power(e)
        if isinstance(e, Gm):
            a, b = self.ev(e.left), self.ev(e.right)
            self.square(a, e)
            self.same_shape(a, b, e)
            return la.geometric_mean(_dense(a), _dense(b))
        if isinstance(e, Inv):
            v = self.ev(e.operand)
            self.square(v, e)
            try:
                return np.linalg.inv(_dense(v))
            except np.linalg.LinAlgError as exc:
                raise DslEvalError("inverse of a singular matrix", e.pos) from exc
        if isinstance(e, Lam):
            return self.lam(e)
        if isinstance(e, Sig):
            v = self.ev(e.operand)
            if isinstance(v, _Product):
                return la.product_singulars(v.left.base, v.left.power, v.right.base, v.right.power)
            return la.svdvals_desc(_dense(v))
        if isinstance(e, VecSqrt):
            v = self.ev(e.operand)
            if v.size and v.min() < -self.tol:
                raise DslEvalError(f"sqrt of negative value {v.min():.3e}", e.pos)
            return np.sqrt(np.clip(v, 0.0, None))
        raise DslEvalError(f"cannot evaluate node {type(e).__name__}", e.pos)

    def power(self, e: Power):
        v = self.ev(e.base)
        p = float(self.ev(e.exponent))
        self.square(v, e)
        if isinstance(v, _PsdPow):
            return _PsdPow(v.base, v.power * p)
        M = _dense(v)
        H = la.hermitian(M)
        if np.linalg.norm(M - H) <= la.tol(M) and la.is_psd(H):
            return _PsdPow(H, p)
        if p == int(p):
            k = int(p)
            if k < 0:
                M, k = np.linalg.inv(M), -k
            return np.linalg.matrix_power(M, k)
        raise DslEvalError("fractional power of a matrix that is not PSD", e.pos)

    def lam(self, e: Lam):
        v = self.ev(e.operand)
        self.square(v, e)
        if isinstance(v, _Product):
            return la.product_eigs(v.left.base, v.left.power, v.right.base, v.right.power)
        M = _dense(v)
        H = la.hermitian(M)
        if np.linalg.norm(M - H) <= la.tol(M):
            return la.eigvalsh_desc(H)
        w = np.linalg.eigvals(M)
        if np.max(np.abs(w.imag)) > self.tol:
            raise DslEvalError("lam of a matrix with non-real spectrum", e.pos)
        return np.sort(w.real)[::-1]


def evaluate(stmt: Statement, bindings: Mapping[str, ArrayLike], t: float = 0.5,
             tol: float | None = None, name: str | None = None) -> InequalityResult:
    """Evaluate ``stmt`` on bound matrices.

    ``>=`` compares descending-sorted spectral vectors index by index;
    ``>=loewner`` reports ``lambda_min(lhs - rhs)``. The default tolerance is
    ``1e-9 (1 + sum of ||M||_2)`` over the bound matrices.
    """
    if tol is None:
        tol = la.tol(*bindings.values())
    ev = _Evaluator(bindings, t, tol)
    try:
        lhs, rhs = ev.ev(stmt.lhs), ev.ev(stmt.rhs)
        if stmt.relation == FORALL_J_GEQ:
            if lhs.shape != rhs.shape:
                raise DslEvalError(f"spectral vectors differ in length: {lhs.size} vs {rhs.size}")
            margins = np.sort(lhs)[::-1] - np.sort(rhs)[::-1]
        else:
            ev.same_shape(lhs, rhs, stmt.lhs)
            margins = np.array([la.loewner_margin(_dense(lhs), _dense(rhs))])
    except DslError:
        raise
    except MatIneqError as exc:
        raise DslEvalError(str(exc)) from exc
    return InequalityResult(name or str(stmt), margins, tol)
